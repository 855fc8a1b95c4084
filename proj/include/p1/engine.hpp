#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "p1/formula.hpp"
#include "p1/ilp.hpp"
#include "p1/type_space.hpp"

namespace p1 {

enum class SolveMode { kFull, kSparse };

struct SolveConfig {
  SolveMode mode = SolveMode::kFull;
  std::size_t signature_cap = kDefaultSignatureCap;
  std::size_t sparse_budget = 64;  // supports sampled per branch in sparse mode
  std::uint64_t seed = 1;
  std::size_t parallelism = 1;
  bool assume_exists = false;  // wrap a non-sentence as #[phi] >= 1
  IlpOptions ilp;
};

enum class Status { kSat, kUnsat };

struct StageTimes {
  double flatten_ms = 0;
  double encode_ms = 0;
  double solve_ms = 0;
  double verify_ms = 0;
  double total_ms = 0;
};

// Explicit structures are only materialized up to this domain size; larger
// models are verified on their characteristic vector.
inline constexpr std::uint64_t kMaxExplicitDomain = std::uint64_t{1} << 20;

struct Verdict {
  Status status = Status::kUnsat;
  std::optional<CharacteristicVector> model;
  std::optional<FiniteStructure> structure;
  std::size_t leaf_index = 0;    // provenance of a SAT witness
  std::size_t branch_index = 0;
  std::size_t leaves = 0;        // leaves examined
  std::size_t branches = 0;      // systems handed to the ILP kernel
  std::size_t support_bound = 0; // sparse mode: largest support size used
  bool incomplete = false;       // sparse mode UNSAT after exhausting the budget
  SolverStats stats;
  StageTimes times;

  bool sat() const { return status == Status::kSat; }
};

/// Decides finite satisfiability of phi and returns a verified model on SAT.
Verdict solve(const Formula& phi, const SolveConfig& config = {});

/// Lists chi's types in ascending mask order, each repeated by its count.
FiniteStructure build_structure(const CharacteristicVector& chi);

bool verify(const Formula& phi, const FiniteStructure& m);
bool verify(const Formula& phi, const CharacteristicVector& chi);

/// ceil(2 * rows * log2(2 * max_coefficient * ceil(sqrt(rows)))).
std::uint64_t sparse_support_bound(std::uint64_t rows, const Integer& max_coefficient);

}  // namespace p1
