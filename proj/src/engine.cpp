#include "p1/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "p1/flattener.hpp"
#include "p1/linear_system.hpp"

namespace p1 {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct LeafOutcome {
  std::optional<CharacteristicVector> model;
  std::size_t branch_index = 0;
  std::size_t branches = 0;
  std::size_t support_bound = 0;
  bool incomplete = false;
  SolverStats stats;
  double encode_ms = 0;
  double solve_ms = 0;
};

CharacteristicVector vector_from(const Assignment& a, const TypeSpace& ts) {
  CharacteristicVector chi(ts.signature());
  for (const auto& [u, v] : a) {
    if (u.kind == UnknownKind::kTypeCount && v != 0) chi.add(ts[u.index], v);
  }
  return chi;
}

std::size_t nonconstant_rows(const LinearSystem& s) {
  return static_cast<std::size_t>(std::count_if(s.constraints.begin(), s.constraints.end(),
                                                [](const auto& r) { return !r.is_constant(); }));
}

// Largest entry any encoding of the leaf can contain, whatever the type set.
Integer literal_magnitude(const FlatFormula& leaf) {
  Integer m = 1;
  for (const auto& lit : leaf.literals) {
    Integer sum = 0;
    for (const auto& s : lit.term().summands) sum += abs(s.coefficient);
    m = std::max<Integer>(m, sum);
    m = std::max<Integer>(m, abs(lit.bound()));
    m = std::max<Integer>(m, abs(lit.modulus()));
  }
  return m;
}

class LeafSolver {
 public:
  LeafSolver(const SolveConfig& cfg, const Signature& sig, const TypeSpace* full)
      : cfg_(cfg), sig_(sig), full_(full) {}

  LeafOutcome run(const FlatFormula& leaf, std::size_t leaf_index) const {
    if (cfg_.mode == SolveMode::kFull) return run_full(leaf);
    if (full_) return run_sparse_enumerated(leaf, leaf_index);
    return run_sparse_sampled(leaf, leaf_index);
  }

 private:
  std::optional<Assignment> solve_system(const LinearSystem& e, LeafOutcome& out) const {
    const auto t0 = Clock::now();
    auto result = ilp_solve(e, &out.stats, cfg_.ilp);
    out.solve_ms += ms_since(t0);
    return result;
  }

  LeafOutcome run_full(const FlatFormula& leaf) const {
    LeafOutcome out;
    auto t0 = Clock::now();
    const LinearSystem s = encode(leaf, *full_);
    const auto branches = expand_negated(s);
    out.encode_ms += ms_since(t0);
    for (std::size_t b = 0; b < branches.size(); ++b) {
      t0 = Clock::now();
      const LinearSystem e = eliminate_congruences(branches[b]);
      out.encode_ms += ms_since(t0);
      ++out.branches;
      if (auto a = solve_system(e, out)) {
        out.model = vector_from(*a, *full_);
        out.branch_index = b;
        return out;
      }
    }
    return out;
  }

  std::mt19937_64 rng_for(std::size_t leaf_index, std::size_t branch) const {
    std::seed_seq seq{cfg_.seed, static_cast<std::uint64_t>(leaf_index), static_cast<std::uint64_t>(branch)};
    return std::mt19937_64(seq);
  }

  // Sparse search over an enumerated type space: restrict the full system to
  // sampled supports of the size guaranteed by the sparse-solution bound.
  LeafOutcome run_sparse_enumerated(const FlatFormula& leaf, std::size_t leaf_index) const {
    LeafOutcome out;
    auto t0 = Clock::now();
    const LinearSystem s = encode(leaf, *full_);
    const auto branches = expand_negated(s);
    out.encode_ms += ms_since(t0);
    const std::size_t n = full_->size();

    for (std::size_t b = 0; b < branches.size(); ++b) {
      t0 = Clock::now();
      const LinearSystem e = eliminate_congruences(branches[b]);
      out.encode_ms += ms_since(t0);
      const std::size_t bound = static_cast<std::size_t>(
          std::min<std::uint64_t>(sparse_support_bound(std::max<std::size_t>(1, nonconstant_rows(e)),
                                                       max_abs_entry(e)),
                                  n));
      out.support_bound = std::max(out.support_bound, bound);

      if (bound >= n) {
        ++out.branches;
        if (auto a = solve_system(e, out)) {
          out.model = vector_from(*a, *full_);
          out.branch_index = b;
          return out;
        }
        continue;
      }

      // First support: the nonzero types of a relaxation vertex. An
      // infeasible relaxation settles the branch outright.
      t0 = Clock::now();
      const LpResult relaxed = lp_feasible(e, &out.stats);
      out.solve_ms += ms_since(t0);
      if (!relaxed.feasible) continue;
      std::vector<std::size_t> seeded;
      for (const auto& [u, v] : relaxed.point) {
        if (u.kind == UnknownKind::kTypeCount && sgn(v) != 0) seeded.push_back(u.index);
      }

      auto rng = rng_for(leaf_index, b);
      std::vector<std::size_t> pool(n);
      std::iota(pool.begin(), pool.end(), 0);
      bool found = false;
      for (std::size_t attempt = 0; attempt < cfg_.sparse_budget && !found; ++attempt) {
        std::set<std::size_t> keep;
        if (attempt == 0) keep.insert(seeded.begin(), seeded.end());
        // Partial Fisher-Yates fill up to the bound.
        for (std::size_t i = 0; keep.size() < bound && i < n; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, n - 1);
          std::swap(pool[i], pool[pick(rng)]);
          keep.insert(pool[i]);
        }
        t0 = Clock::now();
        const LinearSystem restricted = restrict_support(e, keep);
        out.encode_ms += ms_since(t0);
        ++out.branches;
        if (auto a = solve_system(restricted, out)) {
          out.model = vector_from(*a, *full_);
          out.branch_index = b;
          found = true;
        }
      }
      if (found) return out;
      out.incomplete = true;
    }
    return out;
  }

  // Sparse search when the type space is too large to enumerate: encode
  // directly over sampled one-types.
  LeafOutcome run_sparse_sampled(const FlatFormula& leaf, std::size_t leaf_index) const {
    LeafOutcome out;
    const Integer magnitude = literal_magnitude(leaf);
    const std::uint64_t width_mask =
        sig_.size() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << sig_.size()) - 1;

    auto rng = rng_for(leaf_index, 0);
    std::size_t branch_count = 0;
    bool any_branch_open = false;
    for (std::size_t attempt = 0; attempt < cfg_.sparse_budget; ++attempt) {
      auto t0 = Clock::now();
      // The row count does not depend on the type set; probe with one type.
      if (attempt == 0) {
        const TypeSpace probe(sig_, {OneType{0, sig_.size()}});
        const auto probe_branches = expand_negated(encode(leaf, probe));
        branch_count = probe_branches.size();
        std::size_t rows = 1;
        for (const auto& br : probe_branches) {
          rows = std::max(rows, eliminate_congruences(br).constraints.size());
        }
        out.support_bound = sparse_support_bound(rows, magnitude);
        if (sig_.size() < 64) {
          out.support_bound = std::min<std::uint64_t>(out.support_bound, std::uint64_t{1} << sig_.size());
        }
        any_branch_open = branch_count > 0;
      }
      if (!any_branch_open) break;

      std::set<std::uint64_t> masks;
      while (masks.size() < out.support_bound) masks.insert(rng() & width_mask);
      std::vector<OneType> types;
      for (auto m : masks) types.push_back(OneType{m, sig_.size()});
      const TypeSpace sub(sig_, std::move(types));
      const auto branches = expand_negated(encode(leaf, sub));
      out.encode_ms += ms_since(t0);

      for (std::size_t b = 0; b < branches.size(); ++b) {
        t0 = Clock::now();
        const LinearSystem e = eliminate_congruences(branches[b]);
        out.encode_ms += ms_since(t0);
        ++out.branches;
        if (auto a = solve_system(e, out)) {
          out.model = vector_from(*a, sub);
          out.branch_index = b;
          return out;
        }
      }
    }
    out.incomplete = any_branch_open;
    return out;
  }

  const SolveConfig& cfg_;
  const Signature& sig_;
  const TypeSpace* full_;
};

}  // namespace

Verdict solve(const Formula& input, const SolveConfig& cfg) {
  const auto start = Clock::now();
  if (cfg.signature_cap < 1) throw Error("signature cap must be at least 1");
  if (cfg.sparse_budget < 1) throw Error("sparse budget must be at least 1");

  Formula phi = input;
  if (!is_sentence(phi)) {
    if (!cfg.assume_exists) {
      throw Error("formula has a free occurrence of x outside counting terms "
                  "(use assume-exists to read it as #[phi] >= 1)");
    }
    phi = Formula::at_least(CountingTerm::of(phi), 1);
  }

  const Signature sig = signature_of(phi);
  std::optional<TypeSpace> full;
  if (cfg.mode == SolveMode::kFull || sig.size() <= cfg.signature_cap) {
    full = enumerate_types(sig, cfg.signature_cap);
  }
  const LeafSolver solver(cfg, sig, full ? &*full : nullptr);

  Verdict verdict;
  Flattener flattener(phi);
  const std::size_t width = std::max<std::size_t>(1, cfg.parallelism);
  std::size_t next_index = 0;
  bool exhausted = false;

  while (!exhausted && !verdict.sat()) {
    std::vector<FlatFormula> batch;
    auto t0 = Clock::now();
    while (batch.size() < width) {
      auto leaf = flattener.next();
      if (!leaf) {
        exhausted = true;
        break;
      }
      batch.push_back(std::move(*leaf));
    }
    verdict.times.flatten_ms += ms_since(t0);
    if (batch.empty()) break;

    std::vector<LeafOutcome> outcomes(batch.size());
    if (batch.size() == 1) {
      outcomes[0] = solver.run(batch[0], next_index);
    } else {
      std::vector<std::future<LeafOutcome>> tasks;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        tasks.push_back(std::async(std::launch::async, [&, i] { return solver.run(batch[i], next_index + i); }));
      }
      for (std::size_t i = 0; i < tasks.size(); ++i) outcomes[i] = tasks[i].get();
    }

    // Lowest leaf index wins, so the verdict does not depend on scheduling.
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      auto& o = outcomes[i];
      ++verdict.leaves;
      verdict.branches += o.branches;
      verdict.stats += o.stats;
      verdict.times.encode_ms += o.encode_ms;
      verdict.times.solve_ms += o.solve_ms;
      verdict.support_bound = std::max(verdict.support_bound, o.support_bound);
      verdict.incomplete |= o.incomplete;
      if (o.model) {
        verdict.status = Status::kSat;
        verdict.model = std::move(o.model);
        verdict.leaf_index = next_index + i;
        verdict.branch_index = o.branch_index;
        break;
      }
    }
    next_index += batch.size();
  }

  if (verdict.sat()) {
    verdict.incomplete = false;
    const auto t0 = Clock::now();
    if (!verify(phi, *verdict.model)) throw Error("solver model failed verification; internal error");
    if (verdict.model->total() <= kMaxExplicitDomain) {
      verdict.structure = build_structure(*verdict.model);
      if (!verify(phi, *verdict.structure)) {
        throw Error("solver structure failed verification; internal error");
      }
    }
    verdict.times.verify_ms = ms_since(t0);
  } else if (cfg.mode == SolveMode::kFull) {
    verdict.incomplete = false;
  }
  verdict.times.total_ms = ms_since(start);
  return verdict;
}

FiniteStructure build_structure(const CharacteristicVector& chi) {
  const Integer total = chi.total();
  if (total < 1) throw Error("cannot build a structure from an all-zero characteristic vector");
  if (total > kMaxExplicitDomain) throw Error("domain too large to materialize explicitly");
  std::vector<OneType> elements;
  elements.reserve(total.get_ui());
  for (const auto& [mask, count] : chi.counts()) {
    for (unsigned long i = 0; i < count.get_ui(); ++i) {
      elements.push_back(OneType{mask, chi.signature().size()});
    }
  }
  return FiniteStructure(chi.signature(), std::move(elements));
}

bool verify(const Formula& phi, const FiniteStructure& m) { return check_sentence(m, phi); }

bool verify(const Formula& phi, const CharacteristicVector& chi) { return check_sentence(chi, phi); }

std::uint64_t sparse_support_bound(std::uint64_t rows, const Integer& max_coefficient) {
  if (rows < 1) throw Error("sparse bound needs at least one row");
  if (max_coefficient < 1) throw Error("sparse bound needs a positive coefficient bound");
  std::uint64_t root = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(rows)));
  while (root * root < rows) ++root;
  while (root > 1 && (root - 1) * (root - 1) >= rows) --root;

  const Integer x = Integer(2) * max_coefficient * static_cast<unsigned long>(root);
  long double log2x;
  if (mpz_popcount(x.get_mpz_t()) == 1) {
    log2x = static_cast<long double>(mpz_sizeinbase(x.get_mpz_t(), 2) - 1);
  } else {
    long exp = 0;
    const double mant = mpz_get_d_2exp(&exp, x.get_mpz_t());
    log2x = static_cast<long double>(exp) + std::log2(static_cast<long double>(mant));
  }
  const long double value = 2.0L * static_cast<long double>(rows) * log2x;
  const long double up = std::ceil(value);
  if (up >= 1.8e19L) return ~std::uint64_t{0};
  return static_cast<std::uint64_t>(up);
}

}  // namespace p1
