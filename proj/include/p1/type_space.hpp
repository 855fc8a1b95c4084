#pragma once

#include <cstddef>
#include <vector>

#include "p1/formula.hpp"

namespace p1 {

inline constexpr std::size_t kDefaultSignatureCap = 20;

/// Ordered list of one-types over a signature. Index k in this list is the
/// index used for the unknown x<k> in linear systems built over it.
class TypeSpace {
 public:
  TypeSpace(Signature signature, std::vector<OneType> types);

  const Signature& signature() const { return signature_; }
  const std::vector<OneType>& types() const { return types_; }
  std::size_t size() const { return types_.size(); }
  const OneType& operator[](std::size_t k) const { return types_[k]; }

  /// Sub-space keeping the listed indices (ascending, duplicates removed).
  TypeSpace restricted(const std::vector<std::size_t>& keep) const;

 private:
  Signature signature_;
  std::vector<OneType> types_;
};

/// All 2^|sig| types in ascending mask order. Throws if |sig| > cap.
TypeSpace enumerate_types(const Signature& sig, std::size_t cap = kDefaultSignatureCap);

/// 1 iff the counting-free formula psi holds at an element of type pi.
int indicator(const Signature& sig, const OneType& pi, const Formula& psi);

/// Coefficient of x_k in term t, for every type k of ts.
std::vector<Integer> term_coefficients(const CountingTerm& t, const TypeSpace& ts);

}  // namespace p1
