#include "p1/ilp.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace p1 {

namespace {

// Rows are sum_j a[i][j] * x_j + slack_sign[i] * s_i = b[i] with s_i >= 0.
struct DenseProblem {
  std::size_t columns = 0;
  std::vector<std::vector<Integer>> a;
  std::vector<int> slack_sign;
  std::vector<Integer> b;
  bool trivially_infeasible = false;
};

DenseProblem densify(const LinearSystem& s) {
  const std::size_t columns = s.unknowns.size();
  std::map<Unknown, std::size_t> index;
  for (std::size_t u = 0; u < s.unknowns.size(); ++u) index.emplace(s.unknowns[u], u);

  DenseProblem p;
  p.columns = columns;
  for (const auto& row : s.constraints) {
    if (row.relation == RowRelation::kMod || row.relation == RowRelation::kNotMod) {
      throw Error("the ILP kernel accepts only inequality rows; eliminate congruences first");
    }
    if (row.is_constant()) {
      if (!row.constant_holds()) p.trivially_infeasible = true;
      continue;
    }
    std::vector<Integer> dense(columns, 0);
    for (const auto& [u, coeff] : row.terms) {
      auto it = index.find(u);
      if (it == index.end()) throw Error("row mentions unknown " + u.name() + " not in the system");
      dense[it->second] += coeff;
    }
    p.a.push_back(std::move(dense));
    p.slack_sign.push_back(row.relation == RowRelation::kGe ? -1 : 1);
    p.b.push_back(row.rhs);
  }
  return p;
}

// Bounded-variable primal simplex minimizing the sum of artificials, with
// Bland's rule for both entering and leaving choices.
class PhaseOne {
 public:
  PhaseOne(const DenseProblem& p, const std::vector<std::optional<Integer>>& lower,
           const std::vector<std::optional<Integer>>& upper)
      : n_(p.columns), m_(p.a.size()), width_(n_ + 2 * m_) {
    lo_.assign(width_, Rational(0));
    hi_.assign(width_, std::nullopt);
    val_.assign(width_, Rational(0));
    for (std::size_t j = 0; j < n_; ++j) {
      // Free columns start at zero, or at their upper bound if that is negative.
      if (lower[j]) lo_[j] = Rational(*lower[j]);
      else lo_[j] = std::nullopt;
      if (upper[j]) hi_[j] = Rational(*upper[j]);
      if (lo_[j]) val_[j] = *lo_[j];
      else if (hi_[j] && *hi_[j] < 0) val_[j] = *hi_[j];
    }
    tableau_.assign(m_, std::vector<Rational>(width_, Rational(0)));
    basis_.resize(m_);
    is_basic_.assign(width_, false);
    for (std::size_t i = 0; i < m_; ++i) {
      Rational residual = p.b[i];
      for (std::size_t j = 0; j < n_; ++j) {
        if (p.a[i][j] != 0) residual -= p.a[i][j] * val_[j];
      }
      const int sign = residual >= 0 ? 1 : -1;
      for (std::size_t j = 0; j < n_; ++j) {
        if (p.a[i][j] != 0) tableau_[i][j] = sign * p.a[i][j];
      }
      tableau_[i][n_ + i] = sign * p.slack_sign[i];
      const std::size_t art = n_ + m_ + i;
      tableau_[i][art] = 1;
      val_[art] = abs(residual);
      basis_[i] = art;
      is_basic_[art] = true;
    }
  }

  bool run(std::uint64_t& pivots) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (hi_[j] && lo_[j] && *hi_[j] < *lo_[j]) return false;
    }
    std::vector<Rational> reduced(width_);
    while (true) {
      // Reduced costs of the phase-1 objective.
      for (std::size_t j = 0; j < width_; ++j) reduced[j] = is_artificial(j) ? 1 : 0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!is_artificial(basis_[i])) continue;
        const auto& row = tableau_[i];
        for (std::size_t j = 0; j < width_; ++j) {
          if (sgn(row[j]) != 0) reduced[j] -= row[j];
        }
      }

      std::size_t entering = width_;
      int direction = 0;
      for (std::size_t j = 0; j < width_; ++j) {
        if (is_basic_[j]) continue;
        const int d = sgn(reduced[j]);
        if (d < 0 && (!hi_[j] || val_[j] < *hi_[j])) {
          entering = j;
          direction = 1;
          break;
        }
        if (d > 0 && (!lo_[j] || val_[j] > *lo_[j])) {
          entering = j;
          direction = -1;
          break;
        }
      }
      if (entering == width_) break;

      // Ratio test; a leaving row of -1 means the entering variable flips bound.
      std::optional<Rational> step;
      std::ptrdiff_t leaving = -1;
      if (direction > 0 && hi_[entering]) step = *hi_[entering] - val_[entering];
      if (direction < 0 && lo_[entering]) step = val_[entering] - *lo_[entering];
      std::size_t leaving_var = width_;
      for (std::size_t i = 0; i < m_; ++i) {
        const Rational& t = tableau_[i][entering];
        if (sgn(t) == 0) continue;
        const Rational rate = -t * direction;
        const std::size_t k = basis_[i];
        std::optional<Rational> room;
        if (sgn(rate) < 0) {
          if (lo_[k]) room = (val_[k] - *lo_[k]) / -rate;
        } else if (hi_[k]) {
          room = (*hi_[k] - val_[k]) / rate;
        }
        if (!room) continue;
        const bool better = !step || *room < *step ||
                            (leaving >= 0 && *room == *step && k < leaving_var);
        if (better) {
          step = room;
          leaving = static_cast<std::ptrdiff_t>(i);
          leaving_var = k;
        }
      }
      if (!step) throw Error("phase-one objective unbounded; internal error");

      const Rational theta = *step;
      if (sgn(theta) != 0) {
        val_[entering] += theta * direction;
        for (std::size_t i = 0; i < m_; ++i) {
          const Rational& t = tableau_[i][entering];
          if (sgn(t) != 0) val_[basis_[i]] -= t * direction * theta;
        }
      }
      if (leaving < 0) continue;  // bound flip

      pivot(static_cast<std::size_t>(leaving), entering);
      ++pivots;
    }

    for (std::size_t i = n_ + m_; i < width_; ++i) {
      if (sgn(val_[i]) != 0) return false;
    }
    return true;
  }

  const Rational& value(std::size_t j) const { return val_[j]; }

 private:
  bool is_artificial(std::size_t j) const { return j >= n_ + m_; }

  void pivot(std::size_t r, std::size_t entering) {
    const std::size_t leaving = basis_[r];
    auto& prow = tableau_[r];
    const Rational piv = prow[entering];
    for (auto& x : prow) {
      if (sgn(x) != 0) x /= piv;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const Rational factor = tableau_[i][entering];
      if (sgn(factor) == 0) continue;
      auto& row = tableau_[i];
      for (std::size_t j = 0; j < width_; ++j) {
        if (sgn(prow[j]) != 0) row[j] -= factor * prow[j];
      }
    }
    basis_[r] = entering;
    is_basic_[entering] = true;
    is_basic_[leaving] = false;
    if (is_artificial(leaving)) {
      // Artificials never re-enter once they leave.
      val_[leaving] = 0;
      hi_[leaving] = Rational(0);
    }
  }

  std::size_t n_, m_, width_;
  std::vector<std::vector<Rational>> tableau_;
  std::vector<std::optional<Rational>> lo_;
  std::vector<std::optional<Rational>> hi_;
  std::vector<Rational> val_;
  std::vector<std::size_t> basis_;
  std::vector<bool> is_basic_;
};

Integer floor_of(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Integer ceil_of(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

// Tries every floor/ceil rounding of the fractional coordinates of an LP
// point (at most kRoundingWidth of them); bounds hold automatically since
// they are integral.
constexpr std::size_t kRoundingWidth = 12;

std::optional<std::vector<Integer>> round_point(const DenseProblem& p, const PhaseOne& lp, std::size_t d) {
  std::vector<Integer> z(d);
  std::vector<std::size_t> frac;
  for (std::size_t c = 0; c < d; ++c) {
    z[c] = floor_of(lp.value(c));
    if (lp.value(c).get_den() != 1) frac.push_back(c);
  }
  if (frac.size() > kRoundingWidth) return std::nullopt;
  const std::size_t m = p.a.size();
  std::vector<Integer> activity(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      if (p.a[i][c] != 0 && z[c] != 0) activity[i] += p.a[i][c] * z[c];
    }
  }
  auto holds = [&] {
    for (std::size_t i = 0; i < m; ++i) {
      if (p.slack_sign[i] < 0 ? activity[i] < p.b[i] : activity[i] > p.b[i]) return false;
    }
    return true;
  };
  // Gray code order: each step moves one coordinate between floor and ceil.
  std::vector<bool> up(frac.size(), false);
  for (std::uint64_t step = 0;; ++step) {
    if (holds()) {
      for (std::size_t k = 0; k < frac.size(); ++k) {
        if (up[k]) z[frac[k]] += 1;
      }
      return z;
    }
    if (step + 1 == (std::uint64_t{1} << frac.size())) return std::nullopt;
    const std::size_t k = static_cast<std::size_t>(__builtin_ctzll(step + 1));
    const int delta = up[k] ? -1 : 1;
    up[k] = !up[k];
    for (std::size_t i = 0; i < m; ++i) {
      if (p.a[i][frac[k]] != 0) activity[i] += delta * p.a[i][frac[k]];
    }
  }
}

class Stopwatch {
 public:
  explicit Stopwatch(SolverStats* stats) : stats_(stats), start_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    if (!stats_) return;
    stats_->wall_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  SolverStats* stats_;
  std::chrono::steady_clock::time_point start_;
};

// Integer solutions of a system of equations, as x = x0 + K z for z ranging
// over all integer vectors.
struct Lattice {
  std::vector<Integer> x0;
  std::vector<std::vector<Integer>> k;  // n rows, one column per free z
  std::size_t dim = 0;
};

// Unimodular column operations reduce each equation to a single pivot
// column, whose value is then fixed. Columns with a zero entry in a row are
// never touched by it, so unit coefficients amount to plain substitution.
std::optional<Lattice> solve_equalities(const std::vector<std::vector<Integer>>& a,
                                        const std::vector<Integer>& b, std::size_t n) {
  std::vector<std::vector<Integer>> t = a;
  std::vector<std::vector<Integer>> u(n, std::vector<Integer>(n, 0));
  for (std::size_t j = 0; j < n; ++j) u[j][j] = 1;
  std::vector<bool> fixed(n, false);
  std::vector<Integer> y(n, 0);

  auto column_op = [&](std::size_t dst, std::size_t src, const Integer& q) {
    for (auto& row : t) {
      if (row[src] != 0) row[dst] -= q * row[src];
    }
    for (auto& row : u) {
      if (row[src] != 0) row[dst] -= q * row[src];
    }
  };

  for (std::size_t i = 0; i < t.size(); ++i) {
    std::optional<std::size_t> pivot;
    while (true) {
      pivot.reset();
      for (std::size_t j = 0; j < n; ++j) {
        if (fixed[j] || t[i][j] == 0) continue;
        if (!pivot || abs(t[i][j]) < abs(t[i][*pivot])) pivot = j;
      }
      if (!pivot) break;
      bool reduced = true;
      for (std::size_t j = 0; j < n; ++j) {
        if (fixed[j] || j == *pivot || t[i][j] == 0) continue;
        Integer q;
        mpz_tdiv_q(q.get_mpz_t(), t[i][j].get_mpz_t(), t[i][*pivot].get_mpz_t());
        column_op(j, *pivot, q);
        if (t[i][j] != 0) reduced = false;
      }
      if (reduced) break;
    }
    Integer rest = b[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (fixed[j]) rest -= t[i][j] * y[j];
    }
    if (!pivot) {
      if (rest != 0) return std::nullopt;
      continue;
    }
    if (!mpz_divisible_p(rest.get_mpz_t(), t[i][*pivot].get_mpz_t())) return std::nullopt;
    mpz_divexact(y[*pivot].get_mpz_t(), rest.get_mpz_t(), t[i][*pivot].get_mpz_t());
    fixed[*pivot] = true;
  }

  Lattice l;
  l.x0.assign(n, 0);
  l.k.assign(n, {});
  for (std::size_t j = 0; j < n; ++j) {
    if (fixed[j]) {
      for (std::size_t r = 0; r < n; ++r) l.x0[r] += u[r][j] * y[j];
    } else {
      for (std::size_t r = 0; r < n; ++r) l.k[r].push_back(u[r][j]);
      ++l.dim;
    }
  }
  return l;
}

// a . x (>= | <=) b over the merged columns.
struct Row {
  std::vector<Integer> a;
  bool ge = true;
  Integer b;
};

// The problem after substituting x = x0 + K z: rows over z plus bounds on
// the z columns that correspond one-to-one to a bounded x column.
struct Reduced {
  DenseProblem p;
  std::vector<std::optional<Integer>> lower;
  std::vector<std::optional<Integer>> upper;
  std::vector<Integer> scale;  // gcd divided out of each row of p
  std::vector<Row> source;     // the x-space row behind each row of p
  bool infeasible = false;
};

// Divides by the gcd of the coefficients and rounds the right-hand side
// inward; exact over the integers.
void normalize(std::vector<Integer>& a, Integer& b, bool ge, Integer& g) {
  g = 0;
  for (const auto& v : a) {
    if (v != 0) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
  }
  if (g <= 1) {
    if (g == 0) g = 1;
    return;
  }
  for (auto& v : a) {
    if (v != 0) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
  }
  if (ge) mpz_cdiv_q(b.get_mpz_t(), b.get_mpz_t(), g.get_mpz_t());
  else mpz_fdiv_q(b.get_mpz_t(), b.get_mpz_t(), g.get_mpz_t());
}

Reduced reduce(const std::vector<Row>& rows, std::size_t n, const Lattice& l) {
  Reduced r;
  r.p.columns = l.dim;
  r.lower.assign(l.dim, std::nullopt);
  r.upper.assign(l.dim, std::nullopt);

  auto add = [&](const Row& x_row) {
    std::vector<Integer> a(l.dim, 0);
    Integer b = x_row.b;
    for (std::size_t j = 0; j < n; ++j) {
      if (x_row.a[j] == 0) continue;
      b -= x_row.a[j] * l.x0[j];
      for (std::size_t c = 0; c < l.dim; ++c) {
        if (l.k[j][c] != 0) a[c] += x_row.a[j] * l.k[j][c];
      }
    }
    Integer g;
    normalize(a, b, x_row.ge, g);
    if (std::all_of(a.begin(), a.end(), [](const Integer& v) { return v == 0; })) {
      if (x_row.ge ? 0 < b : 0 > b) r.infeasible = true;
      return;
    }
    r.p.a.push_back(std::move(a));
    r.p.slack_sign.push_back(x_row.ge ? -1 : 1);
    r.p.b.push_back(b);
    r.scale.push_back(g);
    r.source.push_back(x_row);
  };

  for (const auto& row : rows) add(row);
  for (std::size_t j = 0; j < n; ++j) {
    std::optional<std::size_t> unit;
    std::size_t nonzero = 0;
    for (std::size_t c = 0; c < l.dim; ++c) {
      if (l.k[j][c] == 0) continue;
      ++nonzero;
      if (abs(l.k[j][c]) == 1) unit = c;
    }
    if (nonzero == 1 && unit) {
      // x_j = x0_j +- z_c: x_j >= 0 becomes a bound on z_c.
      const std::size_t c = *unit;
      if (l.k[j][c] > 0) {
        const Integer lo = -l.x0[j];
        if (!r.lower[c] || *r.lower[c] < lo) r.lower[c] = lo;
      } else {
        const Integer hi = l.x0[j];
        if (!r.upper[c] || *r.upper[c] > hi) r.upper[c] = hi;
      }
      continue;
    }
    Row lo_row{std::vector<Integer>(n, 0), true, 0};
    lo_row.a[j] = 1;
    add(lo_row);
  }
  return r;
}

// Exact integer feasibility of a . z >= b rows over unrestricted integer z
// by Fourier-Motzkin elimination with dark shadows and splinters.
struct Ineq {
  std::vector<Integer> a;
  Integer b;
};

Integer dot(const std::vector<Integer>& a, const std::vector<Integer>& z) {
  Integer v = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] != 0) v += a[j] * z[j];
  }
  return v;
}

std::optional<std::vector<Integer>> omega(std::vector<Ineq> rows, std::vector<Ineq> eqs, std::size_t n,
                                          SolverStats* stats);

std::optional<std::vector<Integer>> omega_eliminate(const std::vector<Ineq>& rows, std::size_t n,
                                                    SolverStats* stats) {
  if (rows.empty()) return std::vector<Integer>(n, 0);

  // Pick the variable: one-sided first, then exact, then fewest pairs.
  std::size_t best = n;
  int best_kind = 3;
  std::size_t best_pairs = 0;
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t lo = 0, hi = 0;
    bool unit_lo = true, unit_hi = true;
    for (const auto& r : rows) {
      const int sg = sgn(r.a[v]);
      if (sg > 0) {
        ++lo;
        unit_lo = unit_lo && r.a[v] == 1;
      } else if (sg < 0) {
        ++hi;
        unit_hi = unit_hi && r.a[v] == -1;
      }
    }
    if (lo + hi == 0) continue;
    const int kind = (lo == 0 || hi == 0) ? 0 : (unit_lo || unit_hi) ? 1 : 2;
    const std::size_t pairs = lo * hi;
    if (kind < best_kind || (kind == best_kind && pairs < best_pairs)) {
      best = v;
      best_kind = kind;
      best_pairs = pairs;
    }
  }
  if (best == n) throw Error("constant row survived normalization; internal error");
  const std::size_t v = best;

  std::vector<Ineq> lower, upper, rest;
  for (const auto& r : rows) {
    const int sg = sgn(r.a[v]);
    (sg > 0 ? lower : sg < 0 ? upper : rest).push_back(r);
  }

  // The smallest v allowed by the lower rows, else the largest allowed by the upper rows.
  auto extend = [&](std::vector<Integer> z) -> std::optional<std::vector<Integer>> {
    z[v] = 0;
    std::optional<Integer> lo, hi;
    for (const auto& r : lower) {
      Integer num = r.b - dot(r.a, z), q;
      mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), r.a[v].get_mpz_t());
      if (!lo || q > *lo) lo = q;
    }
    for (const auto& r : upper) {
      Integer num = dot(r.a, z) - r.b, den = -r.a[v], q;
      mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
      if (!hi || q < *hi) hi = q;
    }
    if (lo && hi && *lo > *hi) return std::nullopt;
    z[v] = lo ? *lo : hi ? *hi : Integer(0);
    return z;
  };

  auto shadow = [&](bool dark) {
    std::vector<Ineq> out = rest;
    for (const auto& l : lower) {
      for (const auto& u : upper) {
        const Integer alpha = l.a[v], gamma = -u.a[v];
        Ineq c{std::vector<Integer>(n, 0), gamma * l.b + alpha * u.b};
        for (std::size_t j = 0; j < n; ++j) c.a[j] = gamma * l.a[j] + alpha * u.a[j];
        if (dark) c.b += (alpha - 1) * (gamma - 1);
        out.push_back(std::move(c));
      }
    }
    return out;
  };

  if (best_kind < 2) {
    auto z = omega(shadow(false), {}, n, stats);
    if (!z) return std::nullopt;
    auto full = extend(*z);
    if (!full) throw Error("exact projection did not extend; internal error");
    return full;
  }

  if (!omega(shadow(false), {}, n, stats)) return std::nullopt;
  if (auto z = omega(shadow(true), {}, n, stats)) {
    auto full = extend(*z);
    if (!full) throw Error("dark shadow point did not extend; internal error");
    return full;
  }
  // Solutions outside the dark shadow lie close to some lower row.
  Integer widest = 0;
  for (const auto& u : upper) widest = std::max<Integer>(widest, -u.a[v]);
  for (const auto& l : lower) {
    const Integer alpha = l.a[v];
    Integer limit;
    const Integer num = widest * alpha - widest - alpha;
    mpz_fdiv_q(limit.get_mpz_t(), num.get_mpz_t(), widest.get_mpz_t());
    for (Integer i = 0; i <= limit; ++i) {
      if (auto z = omega(rows, {Ineq{l.a, l.b + i}}, n, stats)) return z;
    }
  }
  return std::nullopt;
}

std::optional<std::vector<Integer>> omega(std::vector<Ineq> rows, std::vector<Ineq> eqs, std::size_t n,
                                          SolverStats* stats) {
  if (stats) ++stats->nodes;
  while (true) {
    if (!eqs.empty()) {
      std::vector<std::vector<Integer>> ea;
      std::vector<Integer> eb;
      for (auto& e : eqs) {
        ea.push_back(std::move(e.a));
        eb.push_back(std::move(e.b));
      }
      const auto l = solve_equalities(ea, eb, n);
      if (!l) return std::nullopt;
      std::vector<Ineq> sub;
      for (const auto& r : rows) {
        Ineq t{std::vector<Integer>(l->dim, 0), r.b - dot(r.a, l->x0)};
        for (std::size_t j = 0; j < n; ++j) {
          if (r.a[j] == 0) continue;
          for (std::size_t c = 0; c < l->dim; ++c) {
            if (l->k[j][c] != 0) t.a[c] += r.a[j] * l->k[j][c];
          }
        }
        sub.push_back(std::move(t));
      }
      auto w = omega(std::move(sub), {}, l->dim, stats);
      if (!w) return std::nullopt;
      std::vector<Integer> z = l->x0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t c = 0; c < l->dim; ++c) {
          if (l->k[j][c] != 0) z[j] += l->k[j][c] * (*w)[c];
        }
      }
      return z;
    }

    // Normalize, keep the tightest row per direction, and turn opposite
    // rows that meet into equations.
    std::map<std::vector<Integer>, Integer> tight;
    for (auto& r : rows) {
      Integer g;
      normalize(r.a, r.b, true, g);
      if (std::all_of(r.a.begin(), r.a.end(), [](const Integer& x) { return x == 0; })) {
        if (r.b > 0) return std::nullopt;
        continue;
      }
      auto [it, inserted] = tight.emplace(r.a, r.b);
      if (!inserted && r.b > it->second) it->second = r.b;
    }
    rows.clear();
    for (const auto& [a, b] : tight) {
      std::vector<Integer> neg(a.size());
      for (std::size_t j = 0; j < a.size(); ++j) neg[j] = -a[j];
      auto it = tight.find(neg);
      if (it != tight.end()) {
        const Integer sum = b + it->second;
        if (sum > 0) return std::nullopt;
        if (sum == 0) {
          if (a < neg) eqs.push_back({a, b});
          continue;
        }
      }
      rows.push_back({a, b});
    }
    if (eqs.empty()) break;
  }
  return omega_eliminate(rows, n, stats);
}

}  // namespace

LpResult lp_feasible(const LinearSystem& s, SolverStats* stats) {
  Stopwatch watch(stats);
  const DenseProblem p = densify(s);
  LpResult out;
  if (p.trivially_infeasible) return out;

  std::vector<std::optional<Integer>> lower(p.columns, Integer(0));
  std::vector<std::optional<Integer>> upper(p.columns);
  PhaseOne lp(p, lower, upper);
  std::uint64_t pivots = 0;
  out.feasible = lp.run(pivots);
  if (stats) stats->pivots += pivots;
  if (out.feasible) {
    for (std::size_t u = 0; u < s.unknowns.size(); ++u) out.point.emplace(s.unknowns[u], lp.value(u));
  }
  return out;
}

constexpr std::size_t kNodeBudget = 2000;
constexpr std::size_t kPinnedBoundColumns = 32;

Integer variable_bound(const LinearSystem& s) {
  std::size_t rows = 0;
  Integer a = 1;
  for (const auto& row : s.constraints) {
    if (row.is_constant()) continue;
    ++rows;
    for (const auto& [u, coeff] : row.terms) a = std::max<Integer>(a, abs(coeff));
    a = std::max<Integer>(a, abs(row.rhs));
  }
  const Integer n = static_cast<unsigned long>(s.unknowns.size());
  const Integer m = static_cast<unsigned long>(rows);
  Integer power;
  const Integer base = m * a;
  mpz_pow_ui(power.get_mpz_t(), base.get_mpz_t(), 2 * rows + 1);
  Integer bound = (n + m) * power;
  return bound < 1 ? Integer(1) : bound;
}

std::optional<Assignment> ilp_solve(const LinearSystem& s, SolverStats* stats, const IlpOptions& options) {
  Stopwatch watch(stats);

  // Column signature of every unknown over the non-constant rows.
  std::map<Unknown, std::size_t> index;
  for (std::size_t u = 0; u < s.unknowns.size(); ++u) index.emplace(s.unknowns[u], u);
  std::vector<std::vector<std::pair<std::size_t, Integer>>> signature(s.unknowns.size());
  {
    std::size_t r = 0;
    for (const auto& row : s.constraints) {
      if (row.is_constant()) continue;
      for (const auto& [u, coeff] : row.terms) {
        auto it = index.find(u);
        if (it != index.end()) signature[it->second].emplace_back(r, coeff);
      }
      ++r;
    }
  }

  std::vector<std::size_t> representative;
  {
    std::map<std::vector<std::pair<std::size_t, Integer>>, std::size_t,
             bool (*)(const std::vector<std::pair<std::size_t, Integer>>&,
                      const std::vector<std::pair<std::size_t, Integer>>&)>
        groups([](const auto& x, const auto& y) {
          if (x.size() != y.size()) return x.size() < y.size();
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i].first != y[i].first) return x[i].first < y[i].first;
            if (x[i].second != y[i].second) return x[i].second < y[i].second;
          }
          return false;
        });
    for (std::size_t u = 0; u < s.unknowns.size(); ++u) {
      auto& sig = signature[u];
      std::sort(sig.begin(), sig.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      if (options.merge_identical_columns) {
        auto [it, inserted] = groups.emplace(sig, representative.size());
        if (!inserted) {
          continue;
        }
      }
      representative.push_back(u);
    }
  }

  // Merged columns share their coefficients, so each row keeps the
  // representative's entry.
  DenseProblem p = densify(s);
  for (auto& row : p.a) {
    std::vector<Integer> merged(representative.size());
    for (std::size_t j = 0; j < representative.size(); ++j) merged[j] = row[representative[j]];
    row = std::move(merged);
  }
  p.columns = representative.size();
  if (stats) ++stats->nodes;
  if (p.trivially_infeasible) return std::nullopt;
  const std::size_t n = p.columns;

  // Split rows into equations (a <= b and a >= b pairs) and inequalities.
  std::vector<std::vector<Integer>> eq_a;
  std::vector<Integer> eq_b;
  std::vector<Row> rows;
  {
    std::map<std::pair<std::vector<Integer>, Integer>, std::pair<bool, bool>> seen;
    for (std::size_t i = 0; i < p.a.size(); ++i) {
      auto& flags = seen[{p.a[i], p.b[i]}];
      (p.slack_sign[i] < 0 ? flags.first : flags.second) = true;
    }
    for (const auto& [key, flags] : seen) {
      if (flags.first && flags.second) {
        eq_a.push_back(key.first);
        eq_b.push_back(key.second);
      }
    }
    for (std::size_t i = 0; i < p.a.size(); ++i) {
      const auto& flags = seen[{p.a[i], p.b[i]}];
      if (flags.first && flags.second) continue;
      rows.push_back({p.a[i], p.slack_sign[i] < 0, p.b[i]});
    }
  }

  // Presolve: move to the integer solutions of the equations, then promote
  // every inequality the relaxation cannot satisfy strictly to an equation.
  std::optional<Lattice> lattice;
  Reduced red;
  while (true) {
    lattice = solve_equalities(eq_a, eq_b, n);
    if (!lattice) return std::nullopt;
    red = reduce(rows, n, *lattice);
    if (red.infeasible) return std::nullopt;
    {
      PhaseOne root(red.p, red.lower, red.upper);
      std::uint64_t pivots = 0;
      const bool feasible = root.run(pivots);
      if (stats) stats->pivots += pivots;
      if (!feasible) return std::nullopt;
    }
    bool promoted = false;
    for (std::size_t i = 0; i < red.p.a.size() && !promoted; ++i) {
      DenseProblem strict = red.p;
      strict.b[i] += strict.slack_sign[i] < 0 ? 1 : -1;
      PhaseOne lp(strict, red.lower, red.upper);
      std::uint64_t pivots = 0;
      const bool feasible = lp.run(pivots);
      if (stats) stats->pivots += pivots;
      if (feasible) continue;
      // a' z = b' with a = g a' on the lattice, so a x = a x0 + g b'.
      const Row& src = red.source[i];
      Integer rhs = red.scale[i] * red.p.b[i];
      for (std::size_t j = 0; j < n; ++j) rhs += src.a[j] * lattice->x0[j];
      eq_a.push_back(src.a);
      eq_b.push_back(rhs);
      promoted = true;
    }
    // Pinned bounds cost two LPs per column; wide systems skip this.
    for (std::size_t c = 0; c < red.p.columns && red.p.columns <= kPinnedBoundColumns && !promoted; ++c) {
      for (int side = 0; side < 2 && !promoted; ++side) {
        const auto& bnd = side == 0 ? red.lower[c] : red.upper[c];
        if (!bnd) continue;
        auto lower = red.lower;
        auto upper = red.upper;
        if (side == 0) lower[c] = *bnd + 1;
        else upper[c] = *bnd - 1;
        PhaseOne lp(red.p, lower, upper);
        std::uint64_t pivots = 0;
        const bool feasible = lp.run(pivots);
        if (stats) stats->pivots += pivots;
        if (feasible) continue;
        // z_c is pinned to the bound: one x column carrying it becomes an equation.
        for (std::size_t j = 0; j < n; ++j) {
          std::size_t nz = 0;
          for (std::size_t cc = 0; cc < lattice->dim; ++cc) nz += lattice->k[j][cc] != 0;
          if (nz != 1 || lattice->k[j][c] == 0) continue;
          std::vector<Integer> a(n, 0);
          a[j] = 1;
          eq_a.push_back(a);
          eq_b.push_back(lattice->x0[j] + lattice->k[j][c] * *bnd);
          promoted = true;
          break;
        }
      }
    }
    if (!promoted) break;
  }

  auto make_witness = [&](const std::vector<Integer>& point) {
    Assignment witness;
    for (const auto& u : s.unknowns) witness.emplace(u, 0);
    for (std::size_t j = 0; j < n; ++j) witness[s.unknowns[representative[j]]] = point[j];
    if (!satisfies(s, witness)) throw Error("ILP witness failed exact re-verification; internal error");
    return witness;
  };

  struct Node {
    std::vector<std::optional<Integer>> lower;
    std::vector<std::optional<Integer>> upper;
  };
  std::vector<Node> stack;
  stack.push_back({red.lower, red.upper});
  const std::size_t d = lattice->dim;
  std::size_t explored = 0;

  while (!stack.empty()) {
    if (++explored > kNodeBudget) break;
    Node node = std::move(stack.back());
    stack.pop_back();
    if (stats) ++stats->nodes;

    PhaseOne lp(red.p, node.lower, node.upper);
    std::uint64_t pivots = 0;
    const bool feasible = lp.run(pivots);
    if (stats) stats->pivots += pivots;
    if (!feasible) continue;

    // Integral x ends the search even if z is not integral.
    std::vector<Rational> x(n);
    bool integral = true;
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = lattice->x0[j];
      for (std::size_t c = 0; c < d; ++c) {
        if (lattice->k[j][c] != 0) x[j] += lattice->k[j][c] * lp.value(c);
      }
      x[j].canonicalize();
      if (x[j].get_den() != 1) integral = false;
    }

    if (integral) {
      std::vector<Integer> point(n);
      for (std::size_t j = 0; j < n; ++j) point[j] = x[j].get_num();
      return make_witness(point);
    }

    if (auto z = round_point(red.p, lp, d)) {
      std::vector<Integer> point = lattice->x0;
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t c = 0; c < d; ++c) {
          if (lattice->k[j][c] != 0) point[j] += lattice->k[j][c] * (*z)[c];
        }
      }
      return make_witness(point);
    }

    std::size_t fractional = d;
    for (std::size_t c = 0; c < d; ++c) {
      if (lp.value(c).get_den() != 1) {
        fractional = c;
        break;
      }
    }
    if (fractional == d) throw Error("integral lattice point with fractional image; internal error");

    const Rational& v = lp.value(fractional);
    Node down = node;
    down.upper[fractional] = floor_of(v);
    Node up = std::move(node);
    up.lower[fractional] = ceil_of(v);
    const bool up_ok = !up.upper[fractional] || *up.lower[fractional] <= *up.upper[fractional];
    const bool down_ok = !down.lower[fractional] || *down.upper[fractional] >= *down.lower[fractional];
    // Stack order: the branch explored first is pushed last.
    if (options.order == BranchOrder::kFloorFirst) {
      if (up_ok) stack.push_back(std::move(up));
      if (down_ok) stack.push_back(std::move(down));
    } else {
      if (down_ok) stack.push_back(std::move(down));
      if (up_ok) stack.push_back(std::move(up));
    }
  }
  if (stack.empty()) return std::nullopt;

  // Deep searches fall back to exact elimination.
  std::vector<Ineq> ineqs;
  for (const auto& r : rows) {
    Ineq q{r.a, r.b};
    if (!r.ge) {
      for (auto& v : q.a) v = -v;
      q.b = -q.b;
    }
    ineqs.push_back(std::move(q));
  }
  for (std::size_t j = 0; j < n; ++j) {
    Ineq q{std::vector<Integer>(n, 0), 0};
    q.a[j] = 1;
    ineqs.push_back(std::move(q));
  }
  std::vector<Ineq> eqs;
  for (std::size_t i = 0; i < eq_a.size(); ++i) eqs.push_back({eq_a[i], eq_b[i]});
  const auto point = omega(std::move(ineqs), std::move(eqs), n, stats);
  if (!point) return std::nullopt;
  return make_witness(*point);
}

}  // namespace p1
