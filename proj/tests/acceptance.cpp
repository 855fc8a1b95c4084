// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "p1/engine.hpp"
#include "p1/flattener.hpp"
#include "p1/ilp.hpp"
#include "p1/linear_system.hpp"
#include "p1/oracle.hpp"
#include "p1/parser.hpp"
#include "p1/type_space.hpp"
#include "support/harness.hpp"

using namespace p1;
using namespace p1::testing;

namespace {

// Pinned thresholds.
constexpr double kOracleAgreementSeconds = 300.0;
constexpr double kScaleSeconds = 60.0;
constexpr std::size_t kOracleBound = 24;
constexpr std::int64_t kIlpBox = 12;
constexpr std::int64_t kEliminationBox = 5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Every SAT verdict produced by this run, checked for criterion 2.
struct WitnessLog {
  std::size_t sat = 0;
  std::size_t verified = 0;
  std::vector<std::string> failures;

  void record(const Formula& phi, const Verdict& v) {
    if (!v.sat()) return;
    ++sat;
    bool ok = verify(phi, *v.model);
    // Small models are also rebuilt element by element and model-checked.
    if (ok && v.model->total() <= 4096) ok = check_sentence(build_structure(*v.model), phi);
    if (ok) ++verified;
    else failures.push_back(render(phi));
  }
};

Outcome oracle_agreement(WitnessLog& log) {
  const RandomFormulaParams params{.depth = 2, .signature_size = 3, .max_constant = 8, .max_atoms = 4};
  const auto t0 = Clock::now();
  std::size_t agree = 0, skipped = 0, disagree = 0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Formula phi = random_formula(params, seed);
    const Verdict v = solve(phi);
    log.record(phi, v);
    const auto o = oracle_sat_upto(phi, kOracleBound);
    bool bad = false;
    if (o && !v.sat()) bad = true;
    if (v.sat() && v.model->total() <= kOracleBound && !o) bad = true;
    if (v.sat() && !verify(phi, *v.model)) bad = true;
    if (bad) {
      ++disagree;
      if (first.empty()) first = render(phi);
    } else if (v.sat() && !o) {
      ++skipped;  // witness larger than the bound
    } else {
      ++agree;
    }
  }
  const double secs = seconds_since(t0);
  Outcome r;
  r.pass = disagree == 0 && secs < kOracleAgreementSeconds;
  std::ostringstream d;
  d << "300 sentences, " << agree << " agree, " << skipped << " beyond bound " << kOracleBound << ", " << disagree
    << " disagree, " << secs << " s (limit " << kOracleAgreementSeconds << " s)";
  if (!first.empty()) d << "; first disagreement: " << first;
  r.detail = d.str();
  return r;
}

Outcome flattening_equivalence() {
  const Signature s({predicate_name(0), predicate_name(1)});
  const auto structures = all_structures(s, 4);
  const RandomFormulaParams params{.depth = 3, .signature_size = 2, .max_constant = 4, .max_atoms = 4};
  std::size_t counterexamples = 0;
  std::string first;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Formula phi = random_formula(params, seed);
    const auto leaves = flatten(phi);
    for (const auto& m : structures) {
      bool any = false;
      for (const auto& leaf : leaves) any = any || check_sentence(m, leaf.as_formula());
      if (any != check_sentence(m, phi)) {
        ++counterexamples;
        if (first.empty()) first = render(phi);
        break;
      }
    }
  }
  Outcome r;
  r.pass = counterexamples == 0;
  r.detail = "200 sentences x " + std::to_string(structures.size()) + " structures, " +
             std::to_string(counterexamples) + " counterexamples";
  if (!first.empty()) r.detail += "; first: " + first;
  return r;
}

Unknown type_unknown(std::size_t k) { return {UnknownKind::kTypeCount, k}; }

// Up to 3 type unknowns, up to 2 congruence rows (either polarity), up to 2
// inequality rows; coefficients in [-4, 4], moduli in [1, 5].
LinearSystem random_congruence_system(std::mt19937_64& rng) {
  LinearSystem s;
  const std::size_t n = 1 + rng() % 3;
  for (std::size_t k = 0; k < n; ++k) s.unknowns.push_back(type_unknown(k));
  auto terms = [&] {
    std::vector<std::pair<Unknown, Integer>> t;
    for (std::size_t k = 0; k < n; ++k) {
      const long c = static_cast<long>(rng() % 9) - 4;
      if (c != 0) t.push_back({type_unknown(k), Integer(c)});
    }
    return t;
  };
  for (int j = 0, m = 1 + rng() % 2; j < m; ++j) {
    LinearConstraint row;
    row.terms = terms();
    row.relation = rng() % 2 ? RowRelation::kMod : RowRelation::kNotMod;
    row.modulus = 1 + rng() % 5;
    row.rhs = static_cast<long>(rng() % row.modulus.get_ui());
    s.constraints.push_back(row);
  }
  for (int j = 0, m = rng() % 3; j < m; ++j) {
    LinearConstraint row;
    row.terms = terms();
    row.relation = rng() % 2 ? RowRelation::kGe : RowRelation::kLe;
    row.rhs = static_cast<long>(rng() % 9) - 4;
    s.constraints.push_back(row);
  }
  return s;
}

Outcome congruence_elimination() {
  std::mt19937_64 rng(2024);
  std::size_t counterexamples = 0, points = 0;
  std::string first;
  for (int i = 0; i < 100; ++i) {
    const LinearSystem s = random_congruence_system(rng);
    std::vector<LinearSystem> branches;
    for (const auto& b : expand_negated(s)) branches.push_back(eliminate_congruences(b));
    for_each_box_point(s.unknowns, kEliminationBox, [&](const std::map<Unknown, std::int64_t>& pt) {
      ++points;
      const bool before = system_holds64(s, pt);
      bool after = false;
      for (const auto& b : branches) after = after || extends64(b, pt, aux_range(b, pt));
      if (before != after) {
        ++counterexamples;
        if (first.empty()) first = dump(s);
        return false;
      }
      return true;
    });
  }
  Outcome r;
  r.pass = counterexamples == 0;
  r.detail = "100 systems, " + std::to_string(points) + " box points in [0," + std::to_string(kEliminationBox) +
             "]^n, " + std::to_string(counterexamples) + " counterexamples";
  if (!first.empty()) r.detail += "; first system: " + first;
  return r;
}

Integer type_count(const CharacteristicVector& chi, std::uint64_t mask) {
  return chi.count({mask, chi.signature().size()});
}

// Count of elements of the rebuilt structure satisfying a Boolean test on
// their predicate set; independent of the vector bookkeeping.
std::size_t element_count(const FiniteStructure& m, const std::function<bool(std::uint64_t)>& pred) {
  std::size_t n = 0;
  for (const auto& e : m.elements()) n += pred(e.mask) ? 1 : 0;
  return n;
}

Outcome subsumption_encodings(WitnessLog& log) {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  {
    const Formula phi = parse("I(P(x), Q(x))");
    const Verdict v = solve(phi);
    log.record(phi, v);
    expect(v.sat(), "I(P,Q) sat");
    if (v.sat()) {
      const auto& chi = *v.model;
      const Signature& s = chi.signature();
      const std::uint64_t p = std::uint64_t{1} << *s.position("P");
      const std::uint64_t q = std::uint64_t{1} << *s.position("Q");
      expect(verify(phi, chi), "I(P,Q) verify");
      expect(type_count(chi, p) == type_count(chi, q), "I(P,Q) P-only = Q-only");
      const auto m = build_structure(chi);
      expect(element_count(m, [&](std::uint64_t k) { return (k & p) && !(k & q); }) ==
                 element_count(m, [&](std::uint64_t k) { return (k & q) && !(k & p); }),
             "I(P,Q) element counts");
    }
    // With a forced P-only element the equal count must be realized by Q-only elements.
    const Formula forced = parse("I(P(x), Q(x)) & #[P(x) & !Q(x)] >= 3");
    const Verdict w = solve(forced);
    log.record(forced, w);
    expect(w.sat(), "forced Hartig sat");
    if (w.sat()) {
      const auto m = build_structure(*w.model);
      const Signature& s = w.model->signature();
      const std::uint64_t p = std::uint64_t{1} << *s.position("P");
      const std::uint64_t q = std::uint64_t{1} << *s.position("Q");
      const auto p_only = element_count(m, [&](std::uint64_t k) { return (k & p) && !(k & q); });
      const auto q_only = element_count(m, [&](std::uint64_t k) { return (k & q) && !(k & p); });
      expect(p_only >= 3 && p_only == q_only, "forced Hartig counts");
      expect(verify(forced, m), "forced Hartig verify");
    }
  }
  {
    const Formula phi = parse("E%(0,2) x. P(x)");
    const Verdict v = solve(phi);
    log.record(phi, v);
    expect(v.sat(), "E%(0,2) sat");
    if (v.sat()) {
      const auto m = build_structure(*v.model);
      expect(element_count(m, [](std::uint64_t k) { return k & 1U; }) % 2 == 0, "E%(0,2) even P-count");
      expect(verify(phi, m), "E%(0,2) verify");
    }
    const Formula nonzero = parse("E%(0,2) x. P(x) & exists x. P(x)");
    const Verdict w = solve(nonzero);
    log.record(nonzero, w);
    expect(w.sat(), "E%(0,2) with a P sat");
    if (w.sat()) {
      const auto m = build_structure(*w.model);
      const auto n = element_count(m, [](std::uint64_t k) { return k & 1U; });
      expect(n >= 2 && n % 2 == 0, "E%(0,2) with a P: even positive P-count");
    }
  }
  {
    const Formula phi = parse("E>=5 x. P(x)");
    const Verdict v = solve(phi);
    log.record(phi, v);
    expect(v.sat(), "E>=5 sat");
    if (v.sat()) {
      const auto m = build_structure(*v.model);
      expect(element_count(m, [](std::uint64_t k) { return k & 1U; }) >= 5, "E>=5 P-count");
      expect(type_count(*v.model, 1) >= 5, "E>=5 vector count");
      expect(verify(phi, m), "E>=5 verify");
    }
  }
  Outcome r;
  r.pass = failures.empty();
  r.detail = failures.empty() ? "Hartig, modulo and threshold models checked" : "failed: " + failures.front();
  return r;
}

Formula random_body(std::mt19937_64& rng, std::size_t n, int depth) {
  const int pick = depth == 0 ? rng() % 4 : rng() % 7;
  if (pick <= 2) return Formula::atom(predicate_name(rng() % n));
  if (pick == 3) return rng() % 2 ? Formula::top() : Formula::bottom();
  if (pick == 4) return Formula::negate(random_body(rng, n, depth - 1));
  Formula a = random_body(rng, n, depth - 1);
  Formula b = random_body(rng, n, depth - 1);
  return pick == 5 ? Formula::conj(a, b) : Formula::disj(a, b);
}

Outcome counting_identity() {
  std::mt19937_64 rng(77);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng() % 3;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < n; ++k) names.push_back(predicate_name(k));
    const Signature s(names);
    std::vector<OneType> el;
    for (std::size_t e = 0, size = 1 + rng() % 12; e < size; ++e) el.push_back({rng() % (1u << n), n});
    const FiniteStructure m(s, el);
    std::vector<Summand> sm;
    for (int j = 0, k = 1 + rng() % 4; j < k; ++j) {
      long a = static_cast<long>(rng() % 17) - 8;
      if (a == 0) a = 1;
      sm.push_back({a, random_body(rng, n, 3)});
    }
    const CountingTerm t(sm);
    const auto chi = characteristic_vector(m);
    Integer dot = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
      for (const auto& part : t.summands) dot += part.coefficient * indicator(s, {mask, n}, part.body) * chi.count({mask, n});
    if (eval_term(m, t) != dot) ++mismatches;
  }
  Outcome r;
  r.pass = mismatches == 0;
  r.detail = "200 pairs, " + std::to_string(mismatches) + " mismatches";
  return r;
}

// Eight counting literals over twelve predicates A..L, constants below 1024.
const char* const kScaleInstance =
    "3*#[A(x) & B(x)] + 7*#[C(x) & !D(x)] >= 1000"
    " & #[E(x) | F(x)] - 2*#[G(x)] <= 900"
    " & #[H(x) & !A(x)] % 1021 = 517"
    " & 5*#[I(x)] - 3*#[J(x) & K(x)] >= 701"
    " & #[L(x) | A(x)] % 512 != 0"
    " & 11*#[B(x) & !L(x)] <= 1023"
    " & #[C(x) & E(x) & !G(x)] + #[K(x)] >= 333"
    " & #[D(x) | !H(x)] % 997 = 123";

Outcome scale_target(WitnessLog& log) {
  const Formula phi = parse(kScaleInstance);
  Outcome r;
  std::ostringstream d;
  if (signature_of(phi).size() != 12) {
    r.pass = false;
    r.detail = "instance does not use 12 predicates";
    return r;
  }
  const auto t0 = Clock::now();
  Verdict full;
  try {
    full = solve(phi);
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("full mode error: ") + e.what();
    return r;
  }
  const double secs = seconds_since(t0);
  log.record(phi, full);
  r.pass = secs < kScaleSeconds && (!full.sat() || verify(phi, *full.model));
  d << "full mode " << (full.sat() ? "sat" : "unsat") << " in " << secs << " s (limit " << kScaleSeconds << " s)";

  SolveConfig sparse;
  sparse.mode = SolveMode::kSparse;
  const Verdict sv = solve(phi, sparse);
  log.record(phi, sv);
  if (full.sat()) {
    const bool ok = sv.sat() && verify(phi, *sv.model) && sv.model->support_size() <= sv.support_bound;
    r.pass = r.pass && ok;
    d << "; sparse " << (sv.sat() ? "sat" : "no witness");
    if (sv.sat()) d << " with support " << sv.model->support_size() << " <= bound " << sv.support_bound;
  } else {
    r.pass = r.pass && !sv.sat();
    d << "; sparse " << (sv.sat() ? "sat (unsound)" : "no witness");
  }
  r.detail = d.str();
  return r;
}

Unknown ilp_unknown(std::size_t k) { return {UnknownKind::kTypeCount, k}; }

// Up to 4 unknowns, up to 4 rows, coefficients in [-6, 6].
LinearSystem random_ilp_system(std::mt19937_64& rng) {
  LinearSystem s;
  const std::size_t n = 1 + rng() % 4;
  for (std::size_t k = 0; k < n; ++k) s.unknowns.push_back(ilp_unknown(k));
  for (int j = 0, m = 1 + rng() % 4; j < m; ++j) {
    LinearConstraint row;
    for (std::size_t k = 0; k < n; ++k) {
      const long c = static_cast<long>(rng() % 13) - 6;
      if (c != 0) row.terms.push_back({ilp_unknown(k), Integer(c)});
    }
    row.relation = rng() % 2 ? RowRelation::kGe : RowRelation::kLe;
    row.rhs = static_cast<long>(rng() % 13) - 6;
    s.constraints.push_back(row);
  }
  return s;
}

// Exact check of an assignment without the solver's own verifier.
bool holds_exact(const LinearSystem& s, const Assignment& w) {
  for (const auto& u : s.unknowns) {
    if (!w.count(u) || w.at(u) < 0) return false;
  }
  for (const auto& row : s.constraints) {
    Integer v = 0;
    for (const auto& [u, c] : row.terms) v += c * w.at(u);
    if (row.relation == RowRelation::kGe ? v < row.rhs : v > row.rhs) return false;
  }
  return true;
}

Outcome ilp_kernel() {
  std::mt19937_64 rng(8);
  std::size_t mismatches = 0, sat = 0, outside = 0;
  std::string first;
  for (int i = 0; i < 500; ++i) {
    const LinearSystem s = random_ilp_system(rng);
    bool in_box = false;
    for_each_box_point(s.unknowns, kIlpBox, [&](const std::map<Unknown, std::int64_t>& pt) {
      in_box = system_holds64(s, pt);
      return !in_box;
    });
    const auto w = ilp_solve(s);
    bool bad = in_box && !w;
    if (w) {
      ++sat;
      bool beyond = false;
      for (const auto& u : s.unknowns) beyond = beyond || w->at(u) > kIlpBox;
      if (!holds_exact(s, *w) || !satisfies(s, *w)) bad = true;
      if (!in_box && !beyond) bad = true;
      if (!in_box && beyond) ++outside;
    }
    if (bad) {
      ++mismatches;
      if (first.empty()) first = dump(s);
    }
  }
  Outcome r;
  r.pass = mismatches == 0;
  r.detail = "500 systems, " + std::to_string(sat) + " sat (" + std::to_string(outside) + " only beyond box [0," +
             std::to_string(kIlpBox) + "]), " + std::to_string(mismatches) + " mismatches";
  if (!first.empty()) r.detail += "; first: " + first;
  return r;
}

// Corpus files add their SAT verdicts to the witness log.
void corpus_witnesses(WitnessLog& log) {
  namespace fs = std::filesystem;
  for (const auto& e : fs::directory_iterator(P1_CORPUS_DIR)) {
    if (e.path().extension() != ".p1") continue;
    std::ifstream in(e.path());
    std::stringstream ss;
    ss << in.rdbuf();
    const Formula phi = parse(ss.str());
    log.record(phi, solve(phi));
    SolveConfig sparse;
    sparse.mode = SolveMode::kSparse;
    log.record(phi, solve(phi, sparse));
  }
}

void report(int n, const char* name, const Outcome& o, bool& all) {
  std::printf("criterion %d (%s): %s - %s\n", n, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  all = all && o.pass;
}

template <typename F>
Outcome guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  WitnessLog log;
  bool all = true;
  report(1, "oracle agreement", guarded([&] { return oracle_agreement(log); }), all);

  // Criterion 2 needs the verdicts of 5 and 7 and the corpus; its line is printed in order afterwards.
  const Outcome c3 = guarded(flattening_equivalence);
  const Outcome c4 = guarded(congruence_elimination);
  const Outcome c5 = guarded([&] { return subsumption_encodings(log); });
  const Outcome c6 = guarded(counting_identity);
  const Outcome c7 = guarded([&] { return scale_target(log); });
  const Outcome c8 = guarded(ilp_kernel);
  Outcome c2 = guarded([&] {
    corpus_witnesses(log);
    return Outcome{};
  });
  if (c2.pass) {
    c2.pass = log.sat > 0 && log.verified == log.sat;
    c2.detail = std::to_string(log.verified) + "/" + std::to_string(log.sat) + " SAT verdicts verified";
    if (!log.failures.empty()) c2.detail += "; first failure: " + log.failures.front();
  }
  report(2, "witness soundness", c2, all);
  report(3, "flattening equivalence", c3, all);
  report(4, "congruence elimination", c4, all);
  report(5, "subsumption encodings", c5, all);
  report(6, "counting identity", c6, all);
  report(7, "scale target", c7, all);
  report(8, "ILP kernel", c8, all);
  return all ? 0 : 1;
}
