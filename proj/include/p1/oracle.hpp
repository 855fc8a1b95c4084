#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "p1/formula.hpp"

namespace p1 {

inline constexpr std::size_t kOracleSignatureCap = 4;

/// Brute force: tries every characteristic vector over the types of phi's
/// signature with total 1..max_total. Within a total, vectors are visited in
/// descending lexicographic order of their counts (type 0 first). Returns the
/// first vector that satisfies phi.
std::optional<CharacteristicVector> oracle_sat_upto(const Formula& phi, std::size_t max_total,
                                                    std::size_t signature_cap = kOracleSignatureCap);

struct RandomFormulaParams {
  std::size_t depth = 2;           // 1: a single flat literal; k: counting nesting up to k
  std::size_t signature_size = 2;
  std::int64_t max_constant = 4;   // bound on |coefficients|, thresholds and moduli
  std::size_t max_atoms = 4;       // counting constraints in total
  bool congruences = true;
};

/// Deterministic for a fixed seed. Always returns a sentence.
Formula random_formula(const RandomFormulaParams& params, std::uint64_t seed);

/// Predicate names used by random_formula: P, Q, R, S, T, U, V, W, then P8, P9, ...
std::string predicate_name(std::size_t i);

}  // namespace p1
