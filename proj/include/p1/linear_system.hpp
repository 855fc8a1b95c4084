#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "p1/flattener.hpp"
#include "p1/formula.hpp"
#include "p1/type_space.hpp"

namespace p1 {

enum class UnknownKind {
  kTypeCount,      // x<k>: number of elements of type k
  kQuotientPos,    // yp<i>, yn<i>: signed quotient of congruence i
  kQuotientNeg,
  kRemainder,      // r<i>, qp<i>, qn<i>: remainder split of negated congruence i
  kRemQuotientPos,
  kRemQuotientNeg,
};

/// All unknowns range over the naturals.
struct Unknown {
  UnknownKind kind = UnknownKind::kTypeCount;
  std::size_t index = 0;

  std::string name() const;
  friend auto operator<=>(const Unknown&, const Unknown&) = default;
};

enum class RowRelation { kGe, kLe, kMod, kNotMod };

/// sum(coefficient * unknown) REL rhs. For kMod/kNotMod, rhs is the residue.
struct LinearConstraint {
  std::vector<std::pair<Unknown, Integer>> terms;  // nonzero coefficients
  RowRelation relation = RowRelation::kGe;
  Integer rhs = 0;
  Integer modulus = 0;
  std::optional<std::size_t> source;  // literal index in the flat formula

  bool is_constant() const { return terms.empty(); }
  /// Truth of a constant row (no unknowns).
  bool constant_holds() const;
};

using Assignment = std::map<Unknown, Integer>;

struct LinearSystem {
  std::vector<Unknown> unknowns;
  std::vector<LinearConstraint> constraints;

  bool has_congruences() const;
  bool has_negated_congruences() const;
};

/// E_phi: one row per literal plus the nonemptiness row sum_k x_k >= 1.
LinearSystem encode(const FlatFormula& f, const TypeSpace& ts);

/// Each t = d (mod c) becomes t - c*yp + c*yn <= d and >= d.
LinearSystem eliminate_congruences(const LinearSystem& s);

/// Each t != d (mod c) becomes t - r - c*qp + c*qn = 0, r <= c-1, and one of
/// r <= d-1 / r >= d+1. Returns every combination of branches.
std::vector<LinearSystem> expand_negated(const LinearSystem& s);

/// Fixes every type count outside `keep` to zero by deleting its column.
LinearSystem restrict_support(const LinearSystem& s, const std::set<std::size_t>& keep);

/// True iff every row holds under a (missing unknowns read as zero).
bool satisfies(const LinearSystem& s, const Assignment& a);

Integer row_value(const LinearConstraint& row, const Assignment& a);

/// Largest absolute value among coefficients, right-hand sides and moduli (at least 1).
Integer max_abs_entry(const LinearSystem& s);

std::string dump(const LinearConstraint& row);
std::string dump(const LinearSystem& s);

}  // namespace p1
