#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "p1/linear_system.hpp"

namespace p1 {

struct SolverStats {
  std::uint64_t nodes = 0;
  std::uint64_t pivots = 0;
  double wall_ms = 0.0;

  SolverStats& operator+=(const SolverStats& o) {
    nodes += o.nodes;
    pivots += o.pivots;
    wall_ms += o.wall_ms;
    return *this;
  }
};

struct LpResult {
  bool feasible = false;
  std::map<Unknown, Rational> point;  // set iff feasible
};

/// Exact phase-1 simplex on the relaxation over the nonnegative reals.
/// Congruence rows are rejected.
LpResult lp_feasible(const LinearSystem& s, SolverStats* stats = nullptr);

/// Small-solution bound: if s has a solution over the naturals, it has one
/// with every unknown at most (n + m) * (m * a)^(2m + 1), where n counts
/// unknowns, m non-constant rows and a the largest absolute entry.
Integer variable_bound(const LinearSystem& s);

enum class BranchOrder { kFloorFirst, kCeilFirst };

struct IlpOptions {
  BranchOrder order = BranchOrder::kFloorFirst;
  /// Solve over one variable per group of identical columns. Exact for
  /// feasibility; the witness puts each group's total on its first member.
  bool merge_identical_columns = true;
};

/// Branch-and-bound over the exact relaxation. The returned assignment maps
/// every unknown of s and has been re-checked against every row.
std::optional<Assignment> ilp_solve(const LinearSystem& s, SolverStats* stats = nullptr,
                                    const IlpOptions& options = {});

}  // namespace p1
