#include "p1/type_space.hpp"

#include <algorithm>
#include <string>

namespace p1 {

TypeSpace::TypeSpace(Signature signature, std::vector<OneType> types)
    : signature_(std::move(signature)), types_(std::move(types)) {
  for (const auto& t : types_) {
    if (t.width != signature_.size()) throw Error("type width does not match signature");
  }
}

TypeSpace TypeSpace::restricted(const std::vector<std::size_t>& keep) const {
  std::vector<std::size_t> idx = keep;
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  std::vector<OneType> types;
  types.reserve(idx.size());
  for (auto k : idx) {
    if (k >= types_.size()) throw Error("type index out of range");
    types.push_back(types_[k]);
  }
  return TypeSpace(signature_, std::move(types));
}

TypeSpace enumerate_types(const Signature& sig, std::size_t cap) {
  if (sig.size() > cap) {
    throw Error("signature has " + std::to_string(sig.size()) + " predicates, above the cap of " +
                std::to_string(cap) + "; raise the cap or use sparse mode");
  }
  const std::uint64_t n = std::uint64_t{1} << sig.size();
  std::vector<OneType> types;
  types.reserve(n);
  for (std::uint64_t mask = 0; mask < n; ++mask) types.push_back(OneType{mask, sig.size()});
  return TypeSpace(sig, std::move(types));
}

namespace {

// Predicate positions are resolved once per body so the per-type loop is a
// plain bit test.
struct CompiledBody {
  enum Op { kAtom, kTop, kBottom, kNot, kAnd, kOr };
  struct Instr {
    Op op;
    std::size_t arg = 0;  // predicate position, or child indices via a/b
    std::size_t a = 0, b = 0;
  };
  std::vector<Instr> code;
  std::size_t root = 0;

  CompiledBody(const Signature& sig, const Formula& psi) { root = emit(sig, psi); }

  std::size_t emit(const Signature& sig, const Formula& psi) {
    Instr in{kTop};
    switch (psi.kind()) {
      case NodeKind::kAtom: {
        auto pos = sig.position(psi.predicate());
        if (!pos) throw Error("unknown predicate '" + psi.predicate() + "'");
        in = {kAtom, *pos};
        break;
      }
      case NodeKind::kTop: in = {kTop}; break;
      case NodeKind::kBottom: in = {kBottom}; break;
      case NodeKind::kNot: in = {kNot, 0, emit(sig, psi.operand())}; break;
      case NodeKind::kAnd: in = {kAnd, 0, emit(sig, psi.lhs()), emit(sig, psi.rhs())}; break;
      case NodeKind::kOr: in = {kOr, 0, emit(sig, psi.lhs()), emit(sig, psi.rhs())}; break;
      case NodeKind::kCount:
        throw Error("indicator requires a counting-free formula");
    }
    code.push_back(in);
    return code.size() - 1;
  }

  bool eval(std::uint64_t mask) const { return eval_at(root, mask); }

  bool eval_at(std::size_t i, std::uint64_t mask) const {
    const Instr& in = code[i];
    switch (in.op) {
      case kAtom: return (mask >> in.arg) & 1U;
      case kTop: return true;
      case kBottom: return false;
      case kNot: return !eval_at(in.a, mask);
      case kAnd: return eval_at(in.a, mask) && eval_at(in.b, mask);
      case kOr: return eval_at(in.a, mask) || eval_at(in.b, mask);
    }
    return false;
  }
};

}  // namespace

int indicator(const Signature& sig, const OneType& pi, const Formula& psi) {
  if (pi.width != sig.size()) throw Error("type width does not match signature");
  return CompiledBody(sig, psi).eval(pi.mask) ? 1 : 0;
}

std::vector<Integer> term_coefficients(const CountingTerm& t, const TypeSpace& ts) {
  std::vector<Integer> coeffs(ts.size(), 0);
  for (const auto& s : t.summands) {
    const CompiledBody body(ts.signature(), s.body);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      if (body.eval(ts[k].mask)) coeffs[k] += s.coefficient;
    }
  }
  return coeffs;
}

}  // namespace p1
