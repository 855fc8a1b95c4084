#include "p1/oracle.hpp"

#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace p1 {

namespace {

// Evaluates phi at an element of type `mask`, reading nested counting
// constraints from `truth`.
bool holds_at(const Signature& sig, std::uint64_t mask, const Formula& phi,
              const std::map<Formula, bool>& truth) {
  switch (phi.kind()) {
    case NodeKind::kAtom: return (mask >> *sig.position(phi.predicate())) & 1U;
    case NodeKind::kTop: return true;
    case NodeKind::kBottom: return false;
    case NodeKind::kNot: return !holds_at(sig, mask, phi.operand(), truth);
    case NodeKind::kAnd: return holds_at(sig, mask, phi.lhs(), truth) && holds_at(sig, mask, phi.rhs(), truth);
    case NodeKind::kOr: return holds_at(sig, mask, phi.lhs(), truth) || holds_at(sig, mask, phi.rhs(), truth);
    case NodeKind::kCount: return truth.at(phi);
  }
  return false;
}

// Counting constraints occurring in phi outside any counting term.
void direct_constraints(const Formula& phi, std::vector<Formula>& out) {
  switch (phi.kind()) {
    case NodeKind::kNot: direct_constraints(phi.operand(), out); return;
    case NodeKind::kAnd:
    case NodeKind::kOr:
      direct_constraints(phi.lhs(), out);
      direct_constraints(phi.rhs(), out);
      return;
    case NodeKind::kCount:
      if (std::find(out.begin(), out.end(), phi) == out.end()) out.push_back(phi);
      return;
    default: return;
  }
}

void all_constraints(const Formula& phi, std::vector<Formula>& out) {
  switch (phi.kind()) {
    case NodeKind::kNot: all_constraints(phi.operand(), out); return;
    case NodeKind::kAnd:
    case NodeKind::kOr:
      all_constraints(phi.lhs(), out);
      all_constraints(phi.rhs(), out);
      return;
    case NodeKind::kCount:
      for (const auto& s : phi.term().summands) all_constraints(s.body, out);
      if (std::find(out.begin(), out.end(), phi) == out.end()) out.push_back(phi);
      return;
    default: return;
  }
}

constexpr std::size_t kMaxTableInputs = 16;

bool fits(const Integer& v, std::int64_t limit) { return abs(v) <= Integer(static_cast<long>(limit)); }

// Tabulates every constraint as a per-type coefficient vector for each truth
// assignment of the constraints nested directly inside it.
class CompiledSentence {
 public:
  CompiledSentence(const Formula& phi, const Signature& sig, std::size_t max_total) {
    const std::size_t types = std::size_t{1} << sig.size();
    all_constraints(phi, atoms_);
    std::map<Formula, std::size_t> index;
    for (std::size_t i = 0; i < atoms_.size(); ++i) index.emplace(atoms_[i], i);
    if (atoms_.size() > 62) return;

    const std::int64_t limit = std::int64_t{1} << 40;
    for (const auto& atom : atoms_) {
      Entry e;
      std::vector<Formula> inner;
      for (const auto& s : atom.term().summands) direct_constraints(s.body, inner);
      if (inner.size() > kMaxTableInputs) return;
      for (const auto& f : inner) e.inputs.push_back(index.at(f));

      Integer weight = 0;
      for (const auto& s : atom.term().summands) weight += abs(s.coefficient);
      if (!fits(weight * static_cast<unsigned long>(max_total), limit)) return;

      e.coefficients.assign(std::size_t{1} << inner.size(), std::vector<std::int64_t>(types, 0));
      for (std::size_t assign = 0; assign < e.coefficients.size(); ++assign) {
        std::map<Formula, bool> truth;
        for (std::size_t b = 0; b < inner.size(); ++b) truth.emplace(inner[b], (assign >> b) & 1U);
        for (std::size_t k = 0; k < types; ++k) {
          Integer c = 0;
          for (const auto& s : atom.term().summands) {
            if (holds_at(sig, k, s.body, truth)) c += s.coefficient;
          }
          e.coefficients[assign][k] = c.get_si();
        }
      }
      e.relation = atom.relation();
      if (e.relation == Relation::kGe || e.relation == Relation::kLe) {
        // Term values stay within +-limit, so clamping keeps comparisons exact.
        const Integer clamped = std::max<Integer>(Integer(static_cast<long>(-limit)), std::min<Integer>(Integer(static_cast<long>(limit)), atom.bound()));
        e.bound = clamped.get_si();
      } else {
        if (!fits(atom.modulus(), limit)) return;
        e.modulus = atom.modulus().get_si();
        e.residue = atom.residue().get_si();
      }
      entries_.push_back(std::move(e));
    }

    std::vector<Formula> top;
    direct_constraints(phi, top);
    if (top.size() > 20) return;
    for (const auto& f : top) skeleton_inputs_.push_back(index.at(f));
    skeleton_.resize(std::size_t{1} << top.size());
    for (std::size_t assign = 0; assign < skeleton_.size(); ++assign) {
      std::map<Formula, bool> truth;
      for (std::size_t b = 0; b < top.size(); ++b) truth.emplace(top[b], (assign >> b) & 1U);
      skeleton_[assign] = holds_at(sig, 0, phi, truth);
    }
    usable_ = true;
  }

  bool usable() const { return usable_; }

  bool evaluate(const std::vector<std::int64_t>& counts) const {
    std::uint64_t truth = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const Entry& e = entries_[i];
      std::size_t assign = 0;
      for (std::size_t b = 0; b < e.inputs.size(); ++b) assign |= ((truth >> e.inputs[b]) & 1U) << b;
      const auto& coeff = e.coefficients[assign];
      std::int64_t value = 0;
      for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k]) value += coeff[k] * counts[k];
      }
      bool t = false;
      switch (e.relation) {
        case Relation::kGe: t = value >= e.bound; break;
        case Relation::kLe: t = value <= e.bound; break;
        case Relation::kMod:
        case Relation::kNotMod: {
          std::int64_t r = value % e.modulus;
          if (r < 0) r += e.modulus;
          t = (r == e.residue) == (e.relation == Relation::kMod);
          break;
        }
      }
      if (t) truth |= std::uint64_t{1} << i;
    }
    std::size_t assign = 0;
    for (std::size_t b = 0; b < skeleton_inputs_.size(); ++b) {
      assign |= ((truth >> skeleton_inputs_[b]) & 1U) << b;
    }
    return skeleton_[assign];
  }

 private:
  struct Entry {
    std::vector<std::size_t> inputs;
    std::vector<std::vector<std::int64_t>> coefficients;
    Relation relation = Relation::kGe;
    std::int64_t bound = 0, modulus = 1, residue = 0;
  };

  std::vector<Formula> atoms_;
  std::vector<Entry> entries_;
  std::vector<std::size_t> skeleton_inputs_;
  std::vector<bool> skeleton_;
  bool usable_ = false;
};

}  // namespace

std::optional<CharacteristicVector> oracle_sat_upto(const Formula& phi, std::size_t max_total,
                                                    std::size_t signature_cap) {
  if (!is_sentence(phi)) throw Error("the oracle requires a sentence");
  const Signature sig = signature_of(phi);
  if (sig.size() > signature_cap) {
    throw Error("oracle signature cap exceeded: " + std::to_string(sig.size()) + " predicates (cap " +
                std::to_string(signature_cap) + ")");
  }
  const std::size_t types = std::size_t{1} << sig.size();
  const CompiledSentence compiled(phi, sig, max_total);

  auto to_vector = [&](const std::vector<std::int64_t>& counts) {
    CharacteristicVector chi(sig);
    for (std::size_t k = 0; k < types; ++k) {
      if (counts[k]) chi.set(OneType{k, sig.size()}, static_cast<long>(counts[k]));
    }
    return chi;
  };

  std::vector<std::int64_t> counts(types, 0);
  std::function<bool(std::size_t, std::int64_t)> fill = [&](std::size_t pos, std::int64_t remaining) {
    if (pos + 1 == types) {
      counts[pos] = remaining;
      const bool ok = compiled.usable() ? compiled.evaluate(counts) : check_sentence(to_vector(counts), phi);
      counts[pos] = 0;
      return ok;
    }
    for (std::int64_t v = remaining; v >= 0; --v) {
      counts[pos] = v;
      if (fill(pos + 1, remaining - v)) return true;
    }
    counts[pos] = 0;
    return false;
  };

  for (std::size_t total = 1; total <= max_total; ++total) {
    if (fill(0, static_cast<std::int64_t>(total))) {
      // fill leaves the satisfying prefix in place; rebuild the last slot.
      std::int64_t used = 0;
      for (std::size_t k = 0; k + 1 < types; ++k) used += counts[k];
      counts[types - 1] = static_cast<std::int64_t>(total) - used;
      return to_vector(counts);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::string predicate_name(std::size_t i) {
  static const char* const kNames[] = {"P", "Q", "R", "S", "T", "U", "V", "W"};
  if (i < 8) return kNames[i];
  return "P" + std::to_string(i);
}

namespace {

class FormulaGenerator {
 public:
  FormulaGenerator(const RandomFormulaParams& p, std::uint64_t seed) : p_(p), rng_(seed) {}

  Formula sentence() {
    budget_ = p_.max_atoms;
    if (p_.depth <= 1) return constraint(p_.depth);
    return skeleton(2);
  }

 private:
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    // Plain modulo keeps the stream identical across standard libraries.
    return lo + static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool coin(int percent) { return uniform(0, 99) < percent; }

  Formula skeleton(int depth) {
    if (depth <= 0 || budget_ <= 1 || coin(35)) return constraint(1);
    const auto op = uniform(0, 2);
    Formula lhs = skeleton(depth - 1);
    if (op == 0) return Formula::negate(std::move(lhs));
    if (budget_ == 0) return lhs;
    Formula rhs = skeleton(depth - 1);
    return op == 1 ? Formula::conj(std::move(lhs), std::move(rhs))
                   : Formula::disj(std::move(lhs), std::move(rhs));
  }

  // `level` is the counting nesting level of the constraint being built.
  Formula constraint(std::size_t level) {
    if (budget_ > 0) --budget_;
    const std::int64_t c = p_.max_constant;
    CountingTerm term;
    const int summands = coin(60) ? 1 : 2;
    for (int i = 0; i < summands; ++i) {
      std::int64_t a = uniform(1, c);
      if (coin(30)) a = -a;
      term.summands.push_back({Integer(static_cast<long>(a)), body(level, 2)});
    }
    const int rel = static_cast<int>(uniform(0, p_.congruences ? 9 : 5));
    if (rel <= 3) return Formula::at_least(std::move(term), static_cast<long>(uniform(0, c)));
    if (rel <= 5) return Formula::at_most(std::move(term), static_cast<long>(uniform(0, c)));
    const std::int64_t modulus = uniform(std::min<std::int64_t>(2, c), c);
    const std::int64_t residue = uniform(0, modulus - 1);
    if (rel <= 7) return Formula::congruent(std::move(term), static_cast<long>(modulus), static_cast<long>(residue));
    return Formula::incongruent(std::move(term), static_cast<long>(modulus), static_cast<long>(residue));
  }

  Formula body(std::size_t level, int depth) {
    const bool may_nest = level < p_.depth && budget_ > 0;
    if (depth <= 0 || coin(40)) {
      if (may_nest && coin(25)) return constraint(level + 1);
      if (coin(8)) return coin(50) ? Formula::top() : Formula::bottom();
      return Formula::atom(predicate_name(static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(p_.signature_size) - 1))));
    }
    const auto op = uniform(0, 2);
    Formula lhs = body(level, depth - 1);
    if (op == 0) return Formula::negate(std::move(lhs));
    Formula rhs = body(level, depth - 1);
    return op == 1 ? Formula::conj(std::move(lhs), std::move(rhs))
                   : Formula::disj(std::move(lhs), std::move(rhs));
  }

  RandomFormulaParams p_;
  std::mt19937_64 rng_;
  std::size_t budget_ = 0;
};

}  // namespace

Formula random_formula(const RandomFormulaParams& params, std::uint64_t seed) {
  if (params.depth < 1 || params.signature_size < 1 || params.max_constant < 1 || params.max_atoms < 1) {
    throw Error("random_formula bounds must be at least 1");
  }
  return FormulaGenerator(params, seed).sentence();
}

}  // namespace p1
