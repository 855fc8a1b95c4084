#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "p1/engine.hpp"
#include "p1/formula.hpp"
#include "p1/oracle.hpp"
#include "support/harness.hpp"

using namespace p1;
using namespace p1::testing;

namespace {

Formula ge(CountingTerm t, long b) { return Formula::at_least(std::move(t), b); }
Formula le(CountingTerm t, long b) { return Formula::at_most(std::move(t), b); }

TEST(Signature, RejectsDuplicatesAndEmptyNames) {
  EXPECT_THROW(sig({"P", "P"}), Error);
  EXPECT_THROW(sig({""}), Error);
  EXPECT_NO_THROW(sig({"P", "Q"}));
}

TEST(SignatureOf, FirstOccurrenceOrder) {
  EXPECT_EQ(signature_of(Formula::conj(P(), ge(cnt(Q()), 1))).predicates(), (std::vector<std::string>{"P", "Q"}));
  EXPECT_TRUE(signature_of(ge(cnt(Formula::top()), 1)).empty());
  EXPECT_EQ(signature_of(ge(cnt(Formula::conj(P(), P())), 2)).predicates(), std::vector<std::string>{"P"});
}

TEST(EvalTerm, Examples) {
  const auto s = sig({"P"});
  const auto m = structure(s, {{"P"}, {"P"}, {}});
  EXPECT_EQ(eval_term(m, term({{2, P()}, {-1, Formula::top()}})), 1);
  EXPECT_EQ(eval_term(m, cnt(Formula::bottom())), 0);
  EXPECT_EQ(eval_term(structure(s, {{"P"}}), term({{-3, P()}})), -3);
}

TEST(EvalTerm, UnknownPredicateIsNamed) {
  const auto m = structure(sig({"P"}), {{"P"}});
  try {
    eval_term(m, cnt(Q()));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("Q"), std::string::npos);
  }
}

TEST(EvalFormula, Examples) {
  const auto s = sig({"P"});
  const auto m = structure(s, {{"P"}, {"P"}, {}});
  EXPECT_TRUE(eval_formula(m, 2, Formula::negate(P())));
  for (std::size_t e = 0; e < 3; ++e) EXPECT_FALSE(eval_formula(m, e, Formula::congruent(cnt(P()), 2, 1)));
  EXPECT_TRUE(eval_formula(structure(s, {{"P"}}), 0, Formula::conj(ge(cnt(P()), 1), P())));
}

TEST(CheckSentence, Examples) {
  const auto s = sig({"P"});
  const auto t = term({{1, P()}, {-1, Formula::negate(P())}});
  EXPECT_TRUE(check_sentence(structure(s, {{"P"}, {}}), Formula::conj(ge(t, 0), le(t, 0))));
  EXPECT_FALSE(check_sentence(structure(sig({}), {{}}), ge(cnt(Formula::top()), 2)));
  EXPECT_TRUE(check_sentence(structure(s, {{"P"}, {"P"}}), Formula::congruent(cnt(P()), 2, 0)));
  EXPECT_THROW(check_sentence(structure(s, {{"P"}}), P()), Error);
}

TEST(IsSentence, Examples) {
  EXPECT_TRUE(is_sentence(ge(cnt(P()), 1)));
  EXPECT_FALSE(is_sentence(P()));
  EXPECT_FALSE(is_sentence(Formula::disj(P(), ge(cnt(Q()), 1))));
}

TEST(CharacteristicVector, Tally) {
  const auto s = sig({"P"});
  const auto chi = characteristic_vector(structure(s, {{"P"}, {"P"}, {}}));
  EXPECT_EQ(chi.count({1, 1}), 2);
  EXPECT_EQ(chi.count({0, 1}), 1);
  EXPECT_EQ(chi.total(), 3);

  const auto empty = characteristic_vector(structure(sig({}), {{}}));
  EXPECT_EQ(empty.count({0, 0}), 1);

  const auto pq = characteristic_vector(structure(sig({"P", "Q"}), {{"P", "Q"}, {"P"}}));
  EXPECT_EQ(pq.count({3, 2}), 1);
  EXPECT_EQ(pq.count({1, 2}), 1);
  EXPECT_EQ(pq.count({2, 2}), 0);
  EXPECT_EQ(pq.count({0, 2}), 0);
}

TEST(FiniteStructure, RejectsEmptyDomain) { EXPECT_THROW(FiniteStructure(sig({"P"}), {}), Error); }

TEST(Simplify, Examples) {
  EXPECT_EQ(simplify(Formula::conj(P(), Formula::top())), P());
  EXPECT_EQ(simplify(Formula::conj(P(), Formula::bottom())), Formula::bottom());
  EXPECT_EQ(simplify(Formula::negate(Formula::bottom())), Formula::top());
}

TEST(Euclidean, ResidueRange) {
  for (long t = -50; t <= 50; ++t)
    for (long c = 1; c <= 7; ++c) {
      const Integer r = euclidean_residue(t, c);
      EXPECT_GE(r, 0);
      EXPECT_LT(r, c);
      EXPECT_EQ(Integer(t - r) % c, 0);
    }
  // Negative term values under a congruence.
  const auto m = structure(sig({"P"}), {{"P"}});
  EXPECT_TRUE(check_sentence(m, Formula::congruent(term({{-4, P()}}), 3, 2)));
}

// Random structures permuted and relabeled keep their truth values.
TEST(Invariants, CharacteristicVectorInvariance) {
  std::mt19937_64 rng(7);
  RandomFormulaParams params{.depth = 2, .signature_size = 2, .max_constant = 4, .max_atoms = 3};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Formula phi = random_formula(params, seed);
    const Signature s({predicate_name(0), predicate_name(1)});
    std::vector<OneType> el;
    const std::size_t n = 1 + rng() % 7;
    for (std::size_t i = 0; i < n; ++i) el.push_back({rng() % 4, 2});
    auto shuffled = el;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const FiniteStructure a(s, el), b(s, shuffled);
    ASSERT_EQ(characteristic_vector(a), characteristic_vector(b));
    EXPECT_EQ(check_sentence(a, phi), check_sentence(b, phi)) << seed;
    EXPECT_EQ(check_sentence(a, phi), check_sentence(characteristic_vector(a), phi)) << seed;
  }
}

TEST(Invariants, ElementIndependence) {
  RandomFormulaParams params{.depth = 2, .signature_size = 2, .max_constant = 3, .max_atoms = 3};
  const Signature s({predicate_name(0), predicate_name(1)});
  const auto structures = all_structures(s, 3);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Formula phi = random_formula(params, seed);
    for (const auto& m : structures) {
      const bool v0 = eval_formula(m, 0, phi);
      for (std::size_t e = 1; e < m.size(); ++e) ASSERT_EQ(eval_formula(m, e, phi), v0);
    }
  }
}

TEST(Invariants, BuildStructureRoundTrip) {
  const auto s = sig({"P", "Q"});
  for (const auto& m : all_structures(s, 4)) {
    const auto chi = characteristic_vector(m);
    EXPECT_EQ(characteristic_vector(build_structure(chi)), chi);
  }
}

// simplify preserves truth on every structure of size <= 4 over <= 2 predicates.
TEST(Invariants, SimplifyExhaustive) {
  const Signature s({predicate_name(0), predicate_name(1)});
  const auto structures = all_structures(s, 4);
  const Formula pt = Formula::atom(predicate_name(0));
  const std::vector<Formula> extra = {
      ge(cnt(Formula::conj(pt, Formula::top())), 1),
      Formula::disj(ge(cnt(Formula::bottom()), 0), le(cnt(pt), 1)),
      Formula::negate(Formula::negate(ge(cnt(Formula::disj(pt, Formula::bottom())), 2))),
      Formula::conj(Formula::top(), Formula::congruent(cnt(Formula::negate(Formula::top())), 2, 0)),
  };
  RandomFormulaParams params{.depth = 2, .signature_size = 2, .max_constant = 4, .max_atoms = 4};
  std::vector<Formula> formulas = extra;
  for (std::uint64_t seed = 0; seed < 150; ++seed) formulas.push_back(random_formula(params, seed));
  for (const auto& phi : formulas) {
    const Formula simple = simplify(phi);
    for (const auto& m : structures) ASSERT_EQ(check_sentence(m, phi), check_sentence(m, simple));
  }
}

}  // namespace
