#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "p1/formula.hpp"

namespace p1 {

struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;
};

class ParseError : public Error {
 public:
  ParseError(std::string message, SourceSpan span, std::string expected = {});

  const SourceSpan& span() const { return span_; }
  const std::string& expected() const { return expected_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  SourceSpan span_;
  std::string expected_;
};

/// Parses the `.p1` surface syntax. Quantifier sugar and the comparison
/// operators =, <, > are expanded into core counting constraints.
Formula parse(std::string_view text);

/// Inverse of parse on core formulas: parse(render(f)) == f.
std::string render(const Formula& phi);
std::string render(const CountingTerm& term);

/// Formats "line:col: message" with a caret line under the offending span.
std::string format_parse_error(std::string_view text, const ParseError& err);

namespace sugar {

Formula exists(Formula body);
Formula forall(Formula body);
Formula at_least(const Integer& k, Formula body);
Formula modulo(const Integer& residue, const Integer& modulus, Formula body);
/// Härtig: equally many elements satisfy phi and psi.
Formula equicardinal(Formula phi, Formula psi);
/// Rescher: at least as many (strict: more) elements satisfy phi as psi.
Formula rescher(Formula phi, Formula psi, bool strict = false);
/// At least percent% of the domain satisfies body; percent in [0, 100].
Formula percentage_at_least(const Integer& percent, Formula body);

}  // namespace sugar

}  // namespace p1
