#include "p1/flattener.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

namespace p1 {

CountingLiteral::CountingLiteral(Formula constraint) : constraint_(std::move(constraint)) {
  if (!constraint_.is_count()) throw Error("counting literal must be a counting constraint");
  for (const auto& s : constraint_.term().summands) {
    if (!is_counting_free(s.body)) throw Error("counting literal bodies must be counting-free");
  }
}

CountingLiteral CountingLiteral::negated() const {
  const CountingTerm& t = term();
  switch (relation()) {
    case Relation::kGe: return CountingLiteral(Formula::at_most(t, bound() - 1));
    case Relation::kLe: return CountingLiteral(Formula::at_least(t, bound() + 1));
    case Relation::kMod: return CountingLiteral(Formula::incongruent(t, modulus(), residue()));
    case Relation::kNotMod: return CountingLiteral(Formula::congruent(t, modulus(), residue()));
  }
  return *this;
}

Formula FlatFormula::as_formula() const {
  if (literals.empty()) return Formula::top();
  Formula f = literals.front().formula();
  for (std::size_t i = 1; i < literals.size(); ++i) f = Formula::conj(f, literals[i].formula());
  return f;
}

namespace {

void collect(const Formula& phi, std::vector<Formula>& out, std::set<Formula>& seen) {
  switch (phi.kind()) {
    case NodeKind::kNot:
      collect(phi.operand(), out, seen);
      return;
    case NodeKind::kAnd:
    case NodeKind::kOr:
      collect(phi.lhs(), out, seen);
      collect(phi.rhs(), out, seen);
      return;
    case NodeKind::kCount:
      for (const auto& s : phi.term().summands) collect(s.body, out, seen);
      if (seen.insert(phi).second) out.push_back(phi);
      return;
    default:
      return;
  }
}

const bool* lookup(const std::vector<std::pair<Formula, bool>>& truth, const Formula& phi) {
  for (const auto& [atom, value] : truth) {
    if (atom == phi) return &value;
  }
  return nullptr;
}

}  // namespace

std::vector<Formula> collect_atoms(const Formula& phi) {
  if (!is_sentence(phi)) throw Error("flattening requires a sentence");
  std::vector<Formula> out;
  std::set<Formula> seen;
  collect(simplify(phi), out, seen);
  return out;
}

Formula substitute_atoms(const Formula& phi, const std::vector<std::pair<Formula, bool>>& truth) {
  switch (phi.kind()) {
    case NodeKind::kNot:
      return Formula::negate(substitute_atoms(phi.operand(), truth));
    case NodeKind::kAnd:
      return Formula::conj(substitute_atoms(phi.lhs(), truth), substitute_atoms(phi.rhs(), truth));
    case NodeKind::kOr:
      return Formula::disj(substitute_atoms(phi.lhs(), truth), substitute_atoms(phi.rhs(), truth));
    case NodeKind::kCount: {
      if (const bool* v = lookup(truth, phi)) return *v ? Formula::top() : Formula::bottom();
      CountingTerm t;
      for (const auto& s : phi.term().summands) {
        t.summands.push_back({s.coefficient, substitute_atoms(s.body, truth)});
      }
      const bool threshold = phi.relation() == Relation::kGe || phi.relation() == Relation::kLe;
      return Formula::count(std::move(t), phi.relation(), threshold ? phi.bound() : phi.modulus(),
                            phi.residue());
    }
    default:
      return phi;
  }
}

bool literals_conflict(const std::vector<CountingLiteral>& literals) {
  struct Range {
    std::optional<Integer> lower, upper;
    std::map<Integer, Integer> residue;                  // modulus -> required residue
    std::map<Integer, std::set<Integer>> forbidden;      // modulus -> excluded residues
  };
  auto less = [](const CountingTerm& a, const CountingTerm& b) { return compare_terms(a, b) < 0; };
  std::map<CountingTerm, Range, decltype(less)> by_term(less);

  for (const auto& lit : literals) {
    Range& r = by_term[lit.term()];
    switch (lit.relation()) {
      case Relation::kGe:
        if (!r.lower || *r.lower < lit.bound()) r.lower = lit.bound();
        break;
      case Relation::kLe:
        if (!r.upper || *r.upper > lit.bound()) r.upper = lit.bound();
        break;
      case Relation::kMod: {
        auto [it, inserted] = r.residue.emplace(lit.modulus(), lit.residue());
        if (!inserted && it->second != lit.residue()) return true;
        break;
      }
      case Relation::kNotMod:
        r.forbidden[lit.modulus()].insert(lit.residue());
        break;
    }
    if (r.lower && r.upper && *r.lower > *r.upper) return true;
  }
  for (const auto& [term, r] : by_term) {
    for (const auto& [modulus, residue] : r.residue) {
      auto it = r.forbidden.find(modulus);
      if (it != r.forbidden.end() && it->second.count(residue)) return true;
    }
  }
  return false;
}

Flattener::Flattener(const Formula& sentence)
    : skeleton_(simplify(sentence)), atoms_(collect_atoms(sentence)) {
  stack_.push_back(Frame{0, {}, {}});
}

std::optional<FlatFormula> Flattener::next() {
  while (!stack_.empty()) {
    Frame frame = std::move(stack_.back());
    stack_.pop_back();

    const Formula skeleton = simplify(substitute_atoms(skeleton_, frame.decided));
    if (skeleton.kind() == NodeKind::kBottom) {
      ++pruned_;
      continue;
    }
    if (frame.depth == atoms_.size()) {
      if (skeleton.kind() != NodeKind::kTop) throw Error("flattening left an undecided skeleton");
      return FlatFormula{std::move(frame.literals)};
    }

    const Formula& original = atoms_[frame.depth];
    const Formula version = simplify(substitute_atoms(original, frame.decided));
    const CountingLiteral positive(version);

    // An earlier atom may have collapsed to the same constraint.
    std::optional<bool> forced;
    for (const auto& lit : frame.literals) {
      if (lit == positive) forced = true;
      if (lit == positive.negated()) forced = false;
    }

    auto child = [&](bool value) {
      Frame c{frame.depth + 1, frame.decided, frame.literals};
      c.decided.emplace_back(original, value);
      CountingLiteral lit = value ? positive : positive.negated();
      if (std::find(c.literals.begin(), c.literals.end(), lit) == c.literals.end()) {
        c.literals.push_back(std::move(lit));
      }
      if (literals_conflict(c.literals)) {
        ++pruned_;
        return;
      }
      stack_.push_back(std::move(c));
    };

    if (forced) {
      child(*forced);
    } else {
      child(false);
      child(true);  // explored first
    }
  }
  return std::nullopt;
}

std::vector<FlatFormula> flatten(const Formula& sentence) {
  Flattener f(sentence);
  std::vector<FlatFormula> out;
  while (auto leaf = f.next()) out.push_back(std::move(*leaf));
  return out;
}

}  // namespace p1
