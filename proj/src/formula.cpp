#include "p1/formula.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>
#include <utility>

namespace p1 {

Signature::Signature(std::vector<std::string> predicates) : predicates_(std::move(predicates)) {
  if (predicates_.size() > kMaxPredicates) {
    throw Error("signature has " + std::to_string(predicates_.size()) +
                " predicates; at most " + std::to_string(kMaxPredicates) + " are supported");
  }
  std::unordered_set<std::string> seen;
  for (const auto& p : predicates_) {
    if (p.empty()) throw Error("predicate names must be nonempty");
    if (!seen.insert(p).second) throw Error("duplicate predicate '" + p + "' in signature");
  }
}

std::optional<std::size_t> Signature::position(std::string_view name) const {
  auto it = std::find(predicates_.begin(), predicates_.end(), name);
  if (it == predicates_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - predicates_.begin());
}

bool Signature::includes(const Signature& other) const {
  return std::all_of(other.predicates_.begin(), other.predicates_.end(),
                     [&](const std::string& p) { return contains(p); });
}

std::string type_name(const Signature& sig, const OneType& type) {
  if (sig.empty()) return "*";
  std::string out;
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) out += ' ';
    if (!type.holds(i)) out += '!';
    out += sig[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Formula construction

namespace {

std::shared_ptr<const Formula::Node> shared_constant(NodeKind kind) {
  auto n = std::make_shared<Formula::Node>();
  n->kind = kind;
  return n;
}

const std::shared_ptr<const Formula::Node>& top_node() {
  static const auto node = shared_constant(NodeKind::kTop);
  return node;
}

const std::shared_ptr<const Formula::Node>& bottom_node() {
  static const auto node = shared_constant(NodeKind::kBottom);
  return node;
}

void validate_term(const CountingTerm& term) {
  if (term.summands.empty()) throw Error("counting term must have at least one summand");
  for (const auto& s : term.summands) {
    if (s.coefficient == 0) throw Error("counting-term coefficients must be nonzero");
  }
}

}  // namespace

Formula::Formula() : node_(top_node()) {}

Formula Formula::atom(std::string predicate) {
  if (predicate.empty()) throw Error("predicate names must be nonempty");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kAtom;
  n->predicate = std::move(predicate);
  return Formula(std::move(n));
}

Formula Formula::top() { return Formula(top_node()); }
Formula Formula::bottom() { return Formula(bottom_node()); }

Formula Formula::negate(Formula operand) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kNot;
  n->children = {std::move(operand)};
  return Formula(std::move(n));
}

Formula Formula::conj(Formula lhs, Formula rhs) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kAnd;
  n->children = {std::move(lhs), std::move(rhs)};
  return Formula(std::move(n));
}

Formula Formula::disj(Formula lhs, Formula rhs) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kOr;
  n->children = {std::move(lhs), std::move(rhs)};
  return Formula(std::move(n));
}

Formula Formula::count(CountingTerm term, Relation rel, Integer bound_or_modulus, Integer residue) {
  validate_term(term);
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kCount;
  n->term = std::move(term);
  n->relation = rel;
  if (rel == Relation::kGe || rel == Relation::kLe) {
    n->bound = std::move(bound_or_modulus);
  } else {
    if (bound_or_modulus < 1) throw Error("modulus must be at least 1");
    if (residue < 0 || residue >= bound_or_modulus) {
      throw Error("residue must lie in [0, modulus-1]");
    }
    n->modulus = std::move(bound_or_modulus);
    n->residue = std::move(residue);
  }
  return Formula(std::move(n));
}

Formula Formula::at_least(CountingTerm term, Integer bound) {
  return count(std::move(term), Relation::kGe, std::move(bound));
}
Formula Formula::at_most(CountingTerm term, Integer bound) {
  return count(std::move(term), Relation::kLe, std::move(bound));
}
Formula Formula::congruent(CountingTerm term, Integer modulus, Integer residue) {
  return count(std::move(term), Relation::kMod, std::move(modulus), std::move(residue));
}
Formula Formula::incongruent(CountingTerm term, Integer modulus, Integer residue) {
  return count(std::move(term), Relation::kNotMod, std::move(modulus), std::move(residue));
}

NodeKind Formula::kind() const { return node_->kind; }
const std::string& Formula::predicate() const { return node_->predicate; }
const Formula& Formula::operand() const { return node_->children.at(0); }
const Formula& Formula::lhs() const { return node_->children.at(0); }
const Formula& Formula::rhs() const { return node_->children.at(1); }
const CountingTerm& Formula::term() const { return node_->term; }
Relation Formula::relation() const { return node_->relation; }
const Integer& Formula::bound() const { return node_->bound; }
const Integer& Formula::modulus() const { return node_->modulus; }
const Integer& Formula::residue() const { return node_->residue; }

CountingTerm CountingTerm::of(Formula body, Integer coefficient) {
  return CountingTerm({Summand{std::move(coefficient), std::move(body)}});
}

// ---------------------------------------------------------------------------
// Structural order

namespace {

std::strong_ordering cmp_int(const Integer& a, const Integer& b) {
  const int c = cmp(a, b);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace

std::strong_ordering compare_terms(const CountingTerm& a, const CountingTerm& b) {
  if (auto c = a.summands.size() <=> b.summands.size(); c != 0) return c;
  for (std::size_t i = 0; i < a.summands.size(); ++i) {
    if (auto c = cmp_int(a.summands[i].coefficient, b.summands[i].coefficient); c != 0) return c;
    if (auto c = a.summands[i].body <=> b.summands[i].body; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (auto c = x.kind <=> y.kind; c != 0) return c;
  switch (x.kind) {
    case NodeKind::kTop:
    case NodeKind::kBottom:
      return std::strong_ordering::equal;
    case NodeKind::kAtom:
      return x.predicate <=> y.predicate;
    case NodeKind::kNot:
    case NodeKind::kAnd:
    case NodeKind::kOr:
      for (std::size_t i = 0; i < x.children.size(); ++i) {
        if (auto c = x.children[i] <=> y.children[i]; c != 0) return c;
      }
      return std::strong_ordering::equal;
    case NodeKind::kCount:
      if (auto c = x.relation <=> y.relation; c != 0) return c;
      if (auto c = cmp_int(x.bound, y.bound); c != 0) return c;
      if (auto c = cmp_int(x.modulus, y.modulus); c != 0) return c;
      if (auto c = cmp_int(x.residue, y.residue); c != 0) return c;
      return compare_terms(x.term, y.term);
  }
  return std::strong_ordering::equal;
}

bool operator==(const Formula& a, const Formula& b) { return (a <=> b) == 0; }

// ---------------------------------------------------------------------------
// Structures and vectors

FiniteStructure::FiniteStructure(Signature signature, std::vector<OneType> elements)
    : signature_(std::move(signature)), elements_(std::move(elements)) {
  if (elements_.empty()) throw Error("finite structures must have a nonempty domain");
  for (const auto& e : elements_) {
    if (e.width != signature_.size()) throw Error("element type width does not match signature");
  }
}

Integer CharacteristicVector::count(const OneType& type) const {
  auto it = counts_.find(type.mask);
  return it == counts_.end() ? Integer(0) : it->second;
}

void CharacteristicVector::set(const OneType& type, const Integer& value) {
  if (type.width != signature_.size()) throw Error("type width does not match signature");
  if (value < 0) throw Error("characteristic-vector counts must be nonnegative");
  if (value == 0) {
    counts_.erase(type.mask);
  } else {
    counts_[type.mask] = value;
  }
}

void CharacteristicVector::add(const OneType& type, const Integer& value) {
  set(type, count(type) + value);
}

Integer CharacteristicVector::total() const {
  Integer sum = 0;
  for (const auto& [mask, c] : counts_) sum += c;
  return sum;
}

CharacteristicVector characteristic_vector(const FiniteStructure& m) {
  CharacteristicVector chi(m.signature());
  for (const auto& e : m.elements()) chi.add(e, 1);
  return chi;
}

// ---------------------------------------------------------------------------
// Syntactic queries

namespace {

void collect_predicates(const Formula& phi, std::vector<std::string>& out,
                        std::unordered_set<std::string>& seen) {
  switch (phi.kind()) {
    case NodeKind::kAtom:
      if (seen.insert(phi.predicate()).second) out.push_back(phi.predicate());
      return;
    case NodeKind::kTop:
    case NodeKind::kBottom:
      return;
    case NodeKind::kNot:
      collect_predicates(phi.operand(), out, seen);
      return;
    case NodeKind::kAnd:
    case NodeKind::kOr:
      collect_predicates(phi.lhs(), out, seen);
      collect_predicates(phi.rhs(), out, seen);
      return;
    case NodeKind::kCount:
      for (const auto& s : phi.term().summands) collect_predicates(s.body, out, seen);
      return;
  }
}

}  // namespace

Signature signature_of(const Formula& phi) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  collect_predicates(phi, out, seen);
  return Signature(std::move(out));
}

bool is_sentence(const Formula& phi) {
  switch (phi.kind()) {
    case NodeKind::kAtom:
      return false;
    case NodeKind::kTop:
    case NodeKind::kBottom:
    case NodeKind::kCount:
      return true;
    case NodeKind::kNot:
      return is_sentence(phi.operand());
    case NodeKind::kAnd:
    case NodeKind::kOr:
      return is_sentence(phi.lhs()) && is_sentence(phi.rhs());
  }
  return true;
}

bool is_counting_free(const Formula& phi) {
  switch (phi.kind()) {
    case NodeKind::kCount:
      return false;
    case NodeKind::kNot:
      return is_counting_free(phi.operand());
    case NodeKind::kAnd:
    case NodeKind::kOr:
      return is_counting_free(phi.lhs()) && is_counting_free(phi.rhs());
    default:
      return true;
  }
}

Integer euclidean_residue(const Integer& t, const Integer& c) {
  if (c < 1) throw Error("modulus must be at least 1");
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), t.get_mpz_t(), c.get_mpz_t());
  return r;
}

// ---------------------------------------------------------------------------
// Evaluation
//
// A population is a list of (type, multiplicity). Structures contribute one
// entry per element; characteristic vectors one entry per realized type.
// Counting literals are global, so their truth is memoized per evaluation.

namespace {

struct Member {
  OneType type;
  Integer multiplicity;
};

class Evaluator {
 public:
  Evaluator(const Signature& sig, std::vector<Member> population)
      : sig_(sig), population_(std::move(population)) {}

  Integer term(const CountingTerm& t) {
    Integer total = 0;
    for (const auto& s : t.summands) {
      Integer extension = 0;
      for (const auto& m : population_) {
        if (holds(m.type, s.body)) extension += m.multiplicity;
      }
      total += s.coefficient * extension;
    }
    return total;
  }

  bool holds(const OneType& at, const Formula& phi) {
    switch (phi.kind()) {
      case NodeKind::kAtom: {
        auto pos = predicate_position(phi.predicate());
        return at.holds(pos);
      }
      case NodeKind::kTop:
        return true;
      case NodeKind::kBottom:
        return false;
      case NodeKind::kNot:
        return !holds(at, phi.operand());
      case NodeKind::kAnd:
        return holds(at, phi.lhs()) && holds(at, phi.rhs());
      case NodeKind::kOr:
        return holds(at, phi.lhs()) || holds(at, phi.rhs());
      case NodeKind::kCount:
        return literal(phi);
    }
    return false;
  }

 private:
  std::size_t predicate_position(const std::string& name) {
    auto pos = sig_.position(name);
    if (!pos) throw Error("unknown predicate '" + name + "'");
    return *pos;
  }

  bool literal(const Formula& phi) {
    if (auto it = memo_.find(phi.id()); it != memo_.end()) return it->second;
    const Integer value = term(phi.term());
    bool result = false;
    switch (phi.relation()) {
      case Relation::kGe:
        result = value >= phi.bound();
        break;
      case Relation::kLe:
        result = value <= phi.bound();
        break;
      case Relation::kMod:
        result = euclidean_residue(value, phi.modulus()) == phi.residue();
        break;
      case Relation::kNotMod:
        result = euclidean_residue(value, phi.modulus()) != phi.residue();
        break;
    }
    memo_.emplace(phi.id(), result);
    return result;
  }

  const Signature& sig_;
  std::vector<Member> population_;
  std::unordered_map<const Formula::Node*, bool> memo_;
};

std::vector<Member> population_of(const FiniteStructure& m) {
  std::vector<Member> out;
  out.reserve(m.size());
  for (const auto& e : m.elements()) out.push_back({e, 1});
  return out;
}

std::vector<Member> population_of(const CharacteristicVector& chi) {
  std::vector<Member> out;
  for (const auto& [mask, c] : chi.counts()) out.push_back({OneType{mask, chi.signature().size()}, c});
  return out;
}

}  // namespace

Integer eval_term(const FiniteStructure& m, const CountingTerm& t) {
  Evaluator ev(m.signature(), population_of(m));
  return ev.term(t);
}

bool eval_formula(const FiniteStructure& m, std::size_t element, const Formula& phi) {
  if (element >= m.size()) throw Error("element index out of range");
  Evaluator ev(m.signature(), population_of(m));
  return ev.holds(m.elements()[element], phi);
}

bool check_sentence(const FiniteStructure& m, const Formula& phi) {
  if (!is_sentence(phi)) throw Error("formula has a free occurrence of x outside counting terms");
  return eval_formula(m, 0, phi);
}

Integer eval_term(const CharacteristicVector& chi, const CountingTerm& t) {
  Evaluator ev(chi.signature(), population_of(chi));
  return ev.term(t);
}

bool check_sentence(const CharacteristicVector& chi, const Formula& phi) {
  if (!is_sentence(phi)) throw Error("formula has a free occurrence of x outside counting terms");
  if (chi.total() < 1) throw Error("characteristic vector describes an empty domain");
  Evaluator ev(chi.signature(), population_of(chi));
  // Sentences do not depend on the element, so any realized type will do.
  return ev.holds(OneType{chi.counts().begin()->first, chi.signature().size()}, phi);
}

// ---------------------------------------------------------------------------
// Simplification

Formula simplify(const Formula& phi) {
  switch (phi.kind()) {
    case NodeKind::kAtom:
    case NodeKind::kTop:
    case NodeKind::kBottom:
      return phi;
    case NodeKind::kNot: {
      Formula a = simplify(phi.operand());
      if (a.kind() == NodeKind::kTop) return Formula::bottom();
      if (a.kind() == NodeKind::kBottom) return Formula::top();
      if (a.kind() == NodeKind::kNot) return a.operand();
      if (a.id() == phi.operand().id()) return phi;
      return Formula::negate(std::move(a));
    }
    case NodeKind::kAnd:
    case NodeKind::kOr: {
      const bool is_and = phi.kind() == NodeKind::kAnd;
      const NodeKind absorbing = is_and ? NodeKind::kBottom : NodeKind::kTop;
      const NodeKind neutral = is_and ? NodeKind::kTop : NodeKind::kBottom;
      Formula a = simplify(phi.lhs());
      if (a.kind() == absorbing) return a;
      Formula b = simplify(phi.rhs());
      if (b.kind() == absorbing) return b;
      if (a.kind() == neutral) return b;
      if (b.kind() == neutral) return a;
      if (a.id() == phi.lhs().id() && b.id() == phi.rhs().id()) return phi;
      return is_and ? Formula::conj(std::move(a), std::move(b))
                    : Formula::disj(std::move(a), std::move(b));
    }
    case NodeKind::kCount: {
      bool changed = false;
      CountingTerm t;
      for (const auto& s : phi.term().summands) {
        Formula body = simplify(s.body);
        changed |= body.id() != s.body.id();
        t.summands.push_back({s.coefficient, std::move(body)});
      }
      if (!changed) return phi;
      const bool threshold = phi.relation() == Relation::kGe || phi.relation() == Relation::kLe;
      return Formula::count(std::move(t), phi.relation(), threshold ? phi.bound() : phi.modulus(),
                            phi.residue());
    }
  }
  return phi;
}

}  // namespace p1
