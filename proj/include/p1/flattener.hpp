#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "p1/formula.hpp"

namespace p1 {

/// A counting constraint whose bodies are counting-free. Stored as a CountCmp
/// formula so it can be rendered and evaluated directly.
class CountingLiteral {
 public:
  explicit CountingLiteral(Formula constraint);

  const Formula& formula() const { return constraint_; }
  const CountingTerm& term() const { return constraint_.term(); }
  Relation relation() const { return constraint_.relation(); }
  const Integer& bound() const { return constraint_.bound(); }
  const Integer& modulus() const { return constraint_.modulus(); }
  const Integer& residue() const { return constraint_.residue(); }

  /// The literal equivalent to the negation of this one.
  CountingLiteral negated() const;

  friend bool operator==(const CountingLiteral&, const CountingLiteral&) = default;

 private:
  Formula constraint_;
};

/// Conjunction of counting literals; empty means true.
struct FlatFormula {
  std::vector<CountingLiteral> literals;

  Formula as_formula() const;
  friend bool operator==(const FlatFormula&, const FlatFormula&) = default;
};

/// Distinct counting constraints of phi, innermost first, siblings left to
/// right. Occurrences equal after simplify share one entry.
std::vector<Formula> collect_atoms(const Formula& phi);

/// Replaces every occurrence of a counting constraint found in `truth`
/// (structural match) by top or bottom, recursing into counting bodies.
Formula substitute_atoms(const Formula& phi, const std::vector<std::pair<Formula, bool>>& truth);

/// True iff the literal set contains two syntactically conflicting entries
/// over the same term, e.g. t >= 3 and t <= 1.
bool literals_conflict(const std::vector<CountingLiteral>& literals);

/// Lazily enumerates the flat leaves of a sentence. Each counting constraint
/// is guessed true or false in turn (innermost first); a leaf is emitted when
/// the Boolean skeleton evaluates to true under the full guess.
class Flattener {
 public:
  explicit Flattener(const Formula& sentence);

  std::optional<FlatFormula> next();
  std::size_t atom_count() const { return atoms_.size(); }
  std::size_t branches_pruned() const { return pruned_; }

 private:
  struct Frame {
    std::size_t depth;                               // atoms decided so far
    std::vector<std::pair<Formula, bool>> decided;   // current atom version -> truth
    std::vector<CountingLiteral> literals;
  };

  Formula skeleton_;
  std::vector<Formula> atoms_;
  std::vector<Frame> stack_;
  std::size_t pruned_ = 0;
};

/// Eagerly collects every leaf.
std::vector<FlatFormula> flatten(const Formula& sentence);

}  // namespace p1
