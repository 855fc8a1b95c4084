#include <gtest/gtest.h>

#include "p1/engine.hpp"
#include "p1/oracle.hpp"
#include "p1/parser.hpp"
#include "support/harness.hpp"

using namespace p1;
using namespace p1::testing;

namespace {

Integer count_of(const CharacteristicVector& chi, std::uint64_t mask) {
  return chi.count({mask, chi.signature().size()});
}

TEST(Solve, StrictMajority) {
  const Verdict v = solve(parse("2*#[P(x)] - #[true] >= 1"));
  ASSERT_TRUE(v.sat());
  ASSERT_TRUE(v.structure.has_value());
  EXPECT_TRUE(verify(parse("2*#[P(x)] - #[true] >= 1"), *v.structure));
  EXPECT_GT(2 * count_of(*v.model, 1) - v.model->total(), 0);
}

TEST(Solve, EmptyUniverseIsUnsat) {
  const Verdict v = solve(parse("#[true] <= 0"));
  EXPECT_FALSE(v.sat());
  EXPECT_FALSE(v.incomplete);
}

TEST(Solve, EqualOddCounts) {
  const Formula phi = parse("I(P(x), Q(x)) & #[P(x)] % 2 = 1");
  const Verdict v = solve(phi);
  ASSERT_TRUE(v.sat());
  const Integer p = count_of(*v.model, 1) + count_of(*v.model, 3);
  const Integer q = count_of(*v.model, 2) + count_of(*v.model, 3);
  EXPECT_EQ(p, q);
  EXPECT_EQ(Integer(p % 2), 1);
  EXPECT_TRUE(verify(phi, *v.model));
}

TEST(Solve, RejectsFreeVariableUnlessAssumed) {
  EXPECT_THROW(solve(P()), Error);
  SolveConfig cfg;
  cfg.assume_exists = true;
  const Verdict v = solve(Formula::conj(P(), Formula::negate(Q())), cfg);
  ASSERT_TRUE(v.sat());
  EXPECT_GE(count_of(*v.model, 1), 1);
}

TEST(Solve, CapExceededInFullMode) {
  SolveConfig cfg;
  cfg.signature_cap = 1;
  EXPECT_THROW(solve(parse("#[P(x) & Q(x)] >= 1"), cfg), Error);
}

TEST(Solve, LargeModelVerifiedOnVector) {
  const Formula phi = parse("#[P(x)] >= 5000000 & #[!P(x)] % 7 = 3");
  const Verdict v = solve(phi);
  ASSERT_TRUE(v.sat());
  EXPECT_FALSE(v.structure.has_value());
  EXPECT_TRUE(verify(phi, *v.model));
}

TEST(Solve, ProvenanceAndCounts) {
  const Formula phi = parse("#[P(x)] >= 1 | #[Q(x)] >= 1");
  const Verdict v = solve(phi);
  ASSERT_TRUE(v.sat());
  EXPECT_EQ(v.leaf_index, 0u);
  EXPECT_GE(v.leaves, 1u);
  EXPECT_GE(v.branches, 1u);
}

TEST(Solve, ParallelMatchesSequential) {
  RandomFormulaParams params{.depth = 2, .signature_size = 3, .max_constant = 6, .max_atoms = 4};
  SolveConfig wide;
  wide.parallelism = 4;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Formula phi = random_formula(params, seed);
    const Verdict a = solve(phi);
    const Verdict b = solve(phi, wide);
    ASSERT_EQ(a.sat(), b.sat());
    if (a.sat()) {
      EXPECT_EQ(a.leaf_index, b.leaf_index);
      EXPECT_EQ(*a.model, *b.model);
    }
  }
}

TEST(BuildStructure, Examples) {
  const auto s = sig({"P"});
  CharacteristicVector chi(s);
  chi.set({1, 1}, 2);
  chi.set({0, 1}, 1);
  const auto m = build_structure(chi);
  EXPECT_EQ(characteristic_vector(m), chi);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m.elements()[0].mask, 0u);  // canonical type order

  CharacteristicVector one(sig({}));
  one.set({0, 0}, 1);
  EXPECT_EQ(build_structure(one).size(), 1u);

  CharacteristicVector zero(s);
  zero.set({1, 1}, 0);
  EXPECT_THROW(build_structure(zero), Error);
}

TEST(Verify, Examples) {
  const auto s = sig({"P"});
  EXPECT_TRUE(verify(parse("2*#[P(x)] - #[true] >= 1"), structure(s, {{"P"}})));
  EXPECT_FALSE(verify(parse("#[P(x)] >= 2"), structure(s, {{"P"}})));
  EXPECT_TRUE(verify(parse("#[true] >= 1"), structure(s, {{}, {"P"}})));
}

TEST(SparseBound, Examples) {
  EXPECT_EQ(sparse_support_bound(1, 1), 2u);
  EXPECT_EQ(sparse_support_bound(4, 8), 40u);
  EXPECT_EQ(sparse_support_bound(1, 1024), 22u);
  EXPECT_EQ(sparse_support_bound(3, 5), 26u);  // ceil(6 * log2(20)) = ceil(25.93)
  EXPECT_THROW(sparse_support_bound(0, 1), Error);
}

TEST(Oracle, Examples) {
  const Formula both = parse("#[P(x)] >= 1 & #[!P(x)] >= 1");
  EXPECT_FALSE(oracle_sat_upto(both, 1).has_value());
  const auto two = oracle_sat_upto(both, 2);
  ASSERT_TRUE(two.has_value());
  EXPECT_EQ(count_of(*two, 0), 1);
  EXPECT_EQ(count_of(*two, 1), 1);

  EXPECT_FALSE(oracle_sat_upto(parse("#[false] >= 1"), 6).has_value());

  const auto three = oracle_sat_upto(parse("#[true] % 3 = 0"), 4);
  ASSERT_TRUE(three.has_value());
  EXPECT_EQ(three->total(), 3);
  EXPECT_EQ(three->support_size(), 1u);

  // One element in P & Q already gives #[P] = #[Q] = 1.
  const auto odd = oracle_sat_upto(parse("I(P(x), Q(x)) & #[P(x)] % 2 = 1"), 4);
  ASSERT_TRUE(odd.has_value());
  EXPECT_EQ(odd->total(), 1);
  EXPECT_EQ(count_of(*odd, 3), 1);
}

TEST(Oracle, SignatureCap) {
  EXPECT_THROW(oracle_sat_upto(parse("#[A(x) & B(x) & C(x) & D(x) & E(x)] >= 1"), 3), Error);
}

TEST(Oracle, Monotone) {
  RandomFormulaParams params{.depth = 2, .signature_size = 2, .max_constant = 5, .max_atoms = 3};
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Formula phi = random_formula(params, seed);
    bool seen = false;
    for (std::size_t n = 1; n <= 8; ++n) {
      const bool found = oracle_sat_upto(phi, n).has_value();
      if (seen) ASSERT_TRUE(found) << render(phi) << " N=" << n;
      seen = seen || found;
    }
  }
}

TEST(RandomFormula, Deterministic) {
  RandomFormulaParams params{.depth = 2, .signature_size = 1, .max_constant = 3};
  EXPECT_EQ(random_formula(params, 1), random_formula(params, 1));
  EXPECT_EQ(render(random_formula(params, 1)), render(random_formula(params, 1)));
  bool differs = false;
  for (std::uint64_t s = 2; s < 10; ++s) differs = differs || !(random_formula(params, s) == random_formula(params, 1));
  EXPECT_TRUE(differs);
}

TEST(RandomFormula, DepthOneIsSingleLiteral) {
  RandomFormulaParams params{.depth = 1, .signature_size = 3, .max_constant = 5};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Formula f = random_formula(params, seed);
    ASSERT_TRUE(f.is_count());
    for (const auto& sm : f.term().summands) EXPECT_TRUE(is_counting_free(sm.body));
  }
}

// Constants, sentence-hood and the atom budget hold for every draw.
void check_bounds(const Formula& f, const RandomFormulaParams& p, std::size_t& atoms) {
  switch (f.kind()) {
    case NodeKind::kNot: check_bounds(f.operand(), p, atoms); return;
    case NodeKind::kAnd:
    case NodeKind::kOr:
      check_bounds(f.lhs(), p, atoms);
      check_bounds(f.rhs(), p, atoms);
      return;
    case NodeKind::kCount:
      ++atoms;
      for (const auto& sm : f.term().summands) {
        EXPECT_LE(abs(sm.coefficient), p.max_constant);
        check_bounds(sm.body, p, atoms);
      }
      if (f.relation() == Relation::kGe || f.relation() == Relation::kLe) EXPECT_LE(abs(f.bound()), p.max_constant);
      else EXPECT_LE(f.modulus(), p.max_constant);
      return;
    default: return;
  }
}

TEST(RandomFormula, Bounds) {
  RandomFormulaParams params{.depth = 2, .signature_size = 3, .max_constant = 8, .max_atoms = 4};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Formula f = random_formula(params, seed);
    ASSERT_TRUE(is_sentence(f));
    EXPECT_LE(signature_of(f).size(), 3u);
    std::size_t atoms = 0;
    check_bounds(f, params, atoms);
    EXPECT_LE(atoms, params.max_atoms);
    EXPECT_GE(atoms, 1u);
  }
}

// Full mode against the oracle on small sentences.
TEST(Engine, AgreesWithOracle) {
  RandomFormulaParams params{.depth = 2, .signature_size = 2, .max_constant = 5, .max_atoms = 3};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Formula phi = random_formula(params, seed);
    const Verdict v = solve(phi);
    const auto o = oracle_sat_upto(phi, 16);
    if (o) ASSERT_TRUE(v.sat()) << render(phi);
    if (v.sat()) {
      ASSERT_TRUE(verify(phi, *v.model));
      if (v.model->total() <= 16) ASSERT_TRUE(o.has_value()) << render(phi);
    }
  }
}

TEST(Engine, SparseSoundness) {
  RandomFormulaParams params{.depth = 2, .signature_size = 3, .max_constant = 6, .max_atoms = 4};
  SolveConfig sparse;
  sparse.mode = SolveMode::kSparse;
  sparse.sparse_budget = 8;
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    const Formula phi = random_formula(params, seed);
    const Verdict full = solve(phi);
    const Verdict s = solve(phi, sparse);
    if (s.sat()) {
      ASSERT_TRUE(full.sat()) << render(phi);
      ASSERT_TRUE(verify(phi, *s.model));
      EXPECT_LE(s.model->support_size(), s.support_bound);
    }
    if (!s.sat()) EXPECT_TRUE(s.incomplete || !full.sat());
  }
}

TEST(Engine, SparseAboveCap) {
  const Formula phi = parse("#[A(x) & B(x) & !C(x)] >= 3 & #[D(x) | E(x)] <= 2 & #[F(x)] % 3 = 1");
  SolveConfig cfg;
  cfg.mode = SolveMode::kSparse;
  cfg.signature_cap = 3;
  const Verdict v = solve(phi, cfg);
  ASSERT_TRUE(v.sat());
  EXPECT_TRUE(verify(phi, *v.model));
  cfg.mode = SolveMode::kFull;
  EXPECT_THROW(solve(phi, cfg), Error);
}

TEST(Engine, SparseSeedsAreDeterministic) {
  const Formula phi = parse("#[P(x) & Q(x)] >= 2 & #[!P(x)] % 2 = 1 & #[R(x)] <= 1");
  SolveConfig cfg;
  cfg.mode = SolveMode::kSparse;
  cfg.seed = 42;
  const Verdict a = solve(phi, cfg);
  const Verdict b = solve(phi, cfg);
  ASSERT_EQ(a.sat(), b.sat());
  if (a.sat()) EXPECT_EQ(*a.model, *b.model);
}

}  // namespace
