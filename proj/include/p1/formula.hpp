#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace p1 {

using Integer = mpz_class;
using Rational = mpq_class;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One-types are stored as 64-bit masks, which caps the signature width.
inline constexpr std::size_t kMaxPredicates = 64;

class Signature {
 public:
  Signature() = default;
  explicit Signature(std::vector<std::string> predicates);

  std::size_t size() const { return predicates_.size(); }
  bool empty() const { return predicates_.empty(); }
  const std::vector<std::string>& predicates() const { return predicates_; }
  const std::string& operator[](std::size_t i) const { return predicates_[i]; }

  std::optional<std::size_t> position(std::string_view name) const;
  bool contains(std::string_view name) const { return position(name).has_value(); }
  bool includes(const Signature& other) const;

  friend bool operator==(const Signature&, const Signature&) = default;

 private:
  std::vector<std::string> predicates_;
};

/// A truth assignment to every predicate of a signature; bit i is predicate i.
struct OneType {
  std::uint64_t mask = 0;
  std::size_t width = 0;

  bool holds(std::size_t position) const { return (mask >> position) & 1U; }

  friend bool operator==(const OneType&, const OneType&) = default;
  friend auto operator<=>(const OneType&, const OneType&) = default;
};

/// Renders a type as e.g. "P !Q"; the empty signature has the type "*".
std::string type_name(const Signature& sig, const OneType& type);

enum class NodeKind { kAtom, kTop, kBottom, kNot, kAnd, kOr, kCount };

// kGe/kLe compare against bound(); kMod/kNotMod use modulus() and residue().
enum class Relation { kGe, kLe, kMod, kNotMod };

class Formula;
struct CountingTerm;

/// Immutable, structurally shared formula handle. Copies are cheap.
class Formula {
 public:
  struct Node;

  Formula();  // top

  static Formula atom(std::string predicate);
  static Formula top();
  static Formula bottom();
  static Formula negate(Formula operand);
  static Formula conj(Formula lhs, Formula rhs);
  static Formula disj(Formula lhs, Formula rhs);

  static Formula at_least(CountingTerm term, Integer bound);
  static Formula at_most(CountingTerm term, Integer bound);
  static Formula congruent(CountingTerm term, Integer modulus, Integer residue);
  static Formula incongruent(CountingTerm term, Integer modulus, Integer residue);
  static Formula count(CountingTerm term, Relation rel, Integer bound_or_modulus,
                       Integer residue = 0);

  NodeKind kind() const;
  bool is_count() const { return kind() == NodeKind::kCount; }

  const std::string& predicate() const;
  const Formula& operand() const;
  const Formula& lhs() const;
  const Formula& rhs() const;

  const CountingTerm& term() const;
  Relation relation() const;
  const Integer& bound() const;
  const Integer& modulus() const;
  const Integer& residue() const;

  const Node* id() const { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Summand {
  Integer coefficient;
  Formula body;

  friend bool operator==(const Summand&, const Summand&) = default;
};

struct CountingTerm {
  std::vector<Summand> summands;

  CountingTerm() = default;
  explicit CountingTerm(std::vector<Summand> s) : summands(std::move(s)) {}
  /// 1 * #[body]
  static CountingTerm of(Formula body, Integer coefficient = 1);

  friend bool operator==(const CountingTerm&, const CountingTerm&) = default;
};

std::strong_ordering compare_terms(const CountingTerm& a, const CountingTerm& b);

struct Formula::Node {
  NodeKind kind = NodeKind::kTop;
  std::string predicate;
  std::vector<Formula> children;
  CountingTerm term;
  Relation relation = Relation::kGe;
  Integer bound;     // kGe / kLe
  Integer modulus;   // kMod / kNotMod
  Integer residue;
};

/// Finite structure; element i realizes elements[i].
class FiniteStructure {
 public:
  FiniteStructure(Signature signature, std::vector<OneType> elements);

  const Signature& signature() const { return signature_; }
  const std::vector<OneType>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }

 private:
  Signature signature_;
  std::vector<OneType> elements_;
};

/// Map from one-type to multiplicity. Zero entries are never stored.
class CharacteristicVector {
 public:
  CharacteristicVector() = default;
  explicit CharacteristicVector(Signature signature) : signature_(std::move(signature)) {}

  const Signature& signature() const { return signature_; }
  const std::map<std::uint64_t, Integer>& counts() const { return counts_; }

  Integer count(const OneType& type) const;
  void set(const OneType& type, const Integer& value);
  void add(const OneType& type, const Integer& value);
  Integer total() const;
  std::size_t support_size() const { return counts_.size(); }

  friend bool operator==(const CharacteristicVector&, const CharacteristicVector&) = default;

 private:
  Signature signature_;
  std::map<std::uint64_t, Integer> counts_;
};

/// Predicates of phi in order of first occurrence.
Signature signature_of(const Formula& phi);

/// True iff every atom lies beneath some counting term.
bool is_sentence(const Formula& phi);

Integer eval_term(const FiniteStructure& m, const CountingTerm& t);
bool eval_formula(const FiniteStructure& m, std::size_t element, const Formula& phi);
bool check_sentence(const FiniteStructure& m, const Formula& phi);

// Same semantics evaluated on a multiset of types rather than listed elements.
Integer eval_term(const CharacteristicVector& chi, const CountingTerm& t);
bool check_sentence(const CharacteristicVector& chi, const Formula& phi);

CharacteristicVector characteristic_vector(const FiniteStructure& m);

/// Constant-folds top/bottom through the Boolean structure, including inside
/// counting bodies. A body may still be exactly top or bottom.
Formula simplify(const Formula& phi);

/// Residue of t modulo c in [0, c-1], also for negative t.
Integer euclidean_residue(const Integer& t, const Integer& c);

/// True iff no counting term occurs in phi.
bool is_counting_free(const Formula& phi);

}  // namespace p1
