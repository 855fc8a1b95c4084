#include "p1/parser.hpp"

#include <cctype>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

namespace p1 {

ParseError::ParseError(std::string message, SourceSpan span, std::string expected)
    : Error(message), detail_(std::move(message)), span_(span), expected_(std::move(expected)) {}

namespace {

enum class Tok {
  kIdent, kInt, kLParen, kRParen, kHashBracket, kRBracket, kComma, kDot,
  kAmp, kPipe, kBang, kArrow, kIff, kGe, kLe, kEq, kNe, kLt, kGt,
  kPercent, kStar, kPlus, kMinus, kEnd,
};

const char* tok_text(Tok t) {
  switch (t) {
    case Tok::kIdent: return "identifier";
    case Tok::kInt: return "integer";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kHashBracket: return "'#['";
    case Tok::kRBracket: return "']'";
    case Tok::kComma: return "','";
    case Tok::kDot: return "'.'";
    case Tok::kAmp: return "'&'";
    case Tok::kPipe: return "'|'";
    case Tok::kBang: return "'!'";
    case Tok::kArrow: return "'->'";
    case Tok::kIff: return "'<->'";
    case Tok::kGe: return "'>='";
    case Tok::kLe: return "'<='";
    case Tok::kEq: return "'='";
    case Tok::kNe: return "'!='";
    case Tok::kLt: return "'<'";
    case Tok::kGt: return "'>'";
    case Tok::kPercent: return "'%'";
    case Tok::kStar: return "'*'";
    case Tok::kPlus: return "'+'";
    case Tok::kMinus: return "'-'";
    case Tok::kEnd: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  SourceSpan span;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t len) {
    out.push_back({k, std::string(s.substr(i, len)), {i, i + len}});
    i += len;
  };
  auto starts = [&](std::string_view p) { return s.substr(i, p.size()) == p; };
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (starts("//")) {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      push(Tok::kIdent, j - i);
    } else if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      push(Tok::kInt, j - i);
    } else if (starts("<->")) {
      push(Tok::kIff, 3);
    } else if (starts("->")) {
      push(Tok::kArrow, 2);
    } else if (starts(">=")) {
      push(Tok::kGe, 2);
    } else if (starts("<=")) {
      push(Tok::kLe, 2);
    } else if (starts("!=")) {
      push(Tok::kNe, 2);
    } else if (starts("#[")) {
      push(Tok::kHashBracket, 2);
    } else {
      switch (c) {
        case '(': push(Tok::kLParen, 1); break;
        case ')': push(Tok::kRParen, 1); break;
        case ']': push(Tok::kRBracket, 1); break;
        case ',': push(Tok::kComma, 1); break;
        case '.': push(Tok::kDot, 1); break;
        case '&': push(Tok::kAmp, 1); break;
        case '|': push(Tok::kPipe, 1); break;
        case '!': push(Tok::kBang, 1); break;
        case '=': push(Tok::kEq, 1); break;
        case '<': push(Tok::kLt, 1); break;
        case '>': push(Tok::kGt, 1); break;
        case '%': push(Tok::kPercent, 1); break;
        case '*': push(Tok::kStar, 1); break;
        case '+': push(Tok::kPlus, 1); break;
        case '-': push(Tok::kMinus, 1); break;
        default:
          throw ParseError(std::string("unexpected character '") + s[i] + "'", {i, i + 1});
      }
    }
  }
  out.push_back({Tok::kEnd, "", {s.size(), s.size()}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  Formula parse_all() {
    Formula f = formula();
    if (peek().kind != Tok::kEnd) fail("unexpected " + describe(peek()), "end of input");
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    advance();
    return true;
  }
  bool is_ident(std::string_view name, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kIdent && peek(ahead).text == name;
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::kEnd) return "end of input";
    return "'" + t.text + "'";
  }

  [[noreturn]] void fail(const std::string& message, const std::string& expected) const {
    throw ParseError(message, peek().span, expected);
  }

  const Token& expect(Tok k) {
    if (peek().kind != k) {
      fail(std::string("expected ") + tok_text(k) + ", found " + describe(peek()), tok_text(k));
    }
    return advance();
  }

  void expect_ident(std::string_view name) {
    if (!is_ident(name)) {
      fail("expected '" + std::string(name) + "', found " + describe(peek()),
           "'" + std::string(name) + "'");
    }
    advance();
  }

  Integer natural() {
    const Token& t = expect(Tok::kInt);
    return Integer(t.text);
  }

  Integer signed_integer() {
    const bool neg = accept(Tok::kMinus);
    Integer v = natural();
    return neg ? Integer(-v) : v;
  }

  // formula := imp ('<->' imp)*
  Formula formula() {
    Formula f = implication();
    while (accept(Tok::kIff)) {
      Formula g = implication();
      f = Formula::conj(Formula::disj(Formula::negate(f), g), Formula::disj(Formula::negate(g), f));
    }
    return f;
  }

  // imp := disj ('->' imp)?
  Formula implication() {
    Formula f = disjunction();
    if (accept(Tok::kArrow)) return Formula::disj(Formula::negate(f), implication());
    return f;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (accept(Tok::kPipe)) f = Formula::disj(f, conjunction());
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (accept(Tok::kAmp)) f = Formula::conj(f, unary());
    return f;
  }

  Formula unary() {
    if (accept(Tok::kBang)) return Formula::negate(unary());
    return primary();
  }

  Formula primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kLParen: {
        advance();
        Formula f = formula();
        expect(Tok::kRParen);
        return f;
      }
      case Tok::kInt:
      case Tok::kMinus:
      case Tok::kHashBracket:
        return constraint();
      case Tok::kIdent:
        return identifier_form();
      default:
        fail("expected a formula, found " + describe(t), "formula");
    }
  }

  bool atom_ahead() const {
    return peek(1).kind == Tok::kLParen && is_ident("x", 2) && peek(3).kind == Tok::kRParen;
  }

  Formula bound_body() {
    expect_ident("x");
    expect(Tok::kDot);
    return unary();
  }

  Formula identifier_form() {
    const Token t = peek();
    if (t.text == "true") {
      advance();
      return Formula::top();
    }
    if (t.text == "false") {
      advance();
      return Formula::bottom();
    }
    if (t.text == "exists") {
      advance();
      return sugar::exists(bound_body());
    }
    if (t.text == "forall") {
      advance();
      return sugar::forall(bound_body());
    }
    if (t.text == "E" && peek(1).kind == Tok::kGe) {
      advance();
      advance();
      Integer k = natural();
      return sugar::at_least(k, bound_body());
    }
    if (t.text == "E" && peek(1).kind == Tok::kPercent) {
      advance();
      advance();
      expect(Tok::kLParen);
      const SourceSpan at = peek().span;
      Integer residue = natural();
      expect(Tok::kComma);
      Integer modulus = natural();
      expect(Tok::kRParen);
      if (modulus < 1) throw ParseError("modulus must be at least 1", at);
      if (residue >= modulus) throw ParseError("residue must be smaller than the modulus", at);
      return sugar::modulo(residue, modulus, bound_body());
    }
    if ((t.text == "I" || t.text == "R") && peek(1).kind == Tok::kLParen && !atom_ahead()) {
      advance();
      advance();
      auto [phi, psi] = formula_pair();
      return t.text == "I" ? sugar::equicardinal(phi, psi) : sugar::rescher(phi, psi, false);
    }
    if (t.text == "R" && peek(1).kind == Tok::kGt && peek(2).kind == Tok::kLParen) {
      advance();
      advance();
      advance();
      auto [phi, psi] = formula_pair();
      return sugar::rescher(phi, psi, true);
    }
    if (t.text == "pct" && peek(1).kind == Tok::kGe && peek(2).kind == Tok::kLParen) {
      advance();
      advance();
      advance();
      const SourceSpan at = peek().span;
      Integer p = natural();
      if (p > 100) throw ParseError("percentage must lie in [0, 100]", at);
      expect(Tok::kComma);
      Formula body = formula();
      expect(Tok::kRParen);
      return sugar::percentage_at_least(p, body);
    }
    if (t.text == "mod") fail("unexpected 'mod'", "formula");
    // Plain atom P(x).
    advance();
    expect(Tok::kLParen);
    expect_ident("x");
    expect(Tok::kRParen);
    return Formula::atom(t.text);
  }

  std::pair<Formula, Formula> formula_pair() {
    Formula phi = formula();
    expect(Tok::kComma);
    Formula psi = formula();
    expect(Tok::kRParen);
    return {phi, psi};
  }

  Summand summand(bool negative) {
    Integer coefficient = 1;
    if (peek().kind == Tok::kInt) {
      const SourceSpan at = peek().span;
      coefficient = natural();
      if (coefficient == 0) throw ParseError("counting-term coefficients must be nonzero", at, "nonzero integer");
      expect(Tok::kStar);
    }
    expect(Tok::kHashBracket);
    Formula body = formula();
    expect(Tok::kRBracket);
    if (negative) coefficient = -coefficient;
    return {coefficient, body};
  }

  // constraint := linterm REL INT | linterm ('%' | 'mod') INT ('=' | '!=') INT
  Formula constraint() {
    CountingTerm term;
    term.summands.push_back(summand(accept(Tok::kMinus)));
    while (true) {
      if (accept(Tok::kPlus)) {
        term.summands.push_back(summand(false));
      } else if (accept(Tok::kMinus)) {
        term.summands.push_back(summand(true));
      } else {
        break;
      }
    }

    if (accept(Tok::kPercent) || (is_ident("mod") && (advance(), true))) {
      const SourceSpan at = peek().span;
      Integer modulus = natural();
      if (modulus == 0) throw ParseError("modulus must be at least 1", at, "positive integer");
      bool negated = false;
      if (accept(Tok::kNe)) {
        negated = true;
      } else if (!accept(Tok::kEq)) {
        fail("expected '=' or '!=', found " + describe(peek()), "'=' or '!='");
      }
      Integer residue = euclidean_residue(signed_integer(), modulus);
      return negated ? Formula::incongruent(std::move(term), modulus, residue)
                     : Formula::congruent(std::move(term), modulus, residue);
    }

    const Tok rel = peek().kind;
    switch (rel) {
      case Tok::kGe:
      case Tok::kLe:
      case Tok::kEq:
      case Tok::kLt:
      case Tok::kGt:
        advance();
        break;
      default:
        fail("expected a comparison, found " + describe(peek()), "'>=', '<=', '=', '<', '>' or '%'");
    }
    const Integer b = signed_integer();
    switch (rel) {
      case Tok::kGe: return Formula::at_least(std::move(term), b);
      case Tok::kLe: return Formula::at_most(std::move(term), b);
      case Tok::kGt: return Formula::at_least(std::move(term), b + 1);
      case Tok::kLt: return Formula::at_most(std::move(term), b - 1);
      default:
        return Formula::conj(Formula::at_least(term, b), Formula::at_most(term, b));
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// Binding strength used by render: 1 = '|', 2 = '&', 3 = unary/primary.
std::string render_at(const Formula& phi, int context);

std::string render_term(const CountingTerm& term) {
  std::string out;
  bool first = true;
  for (const auto& s : term.summands) {
    Integer a = s.coefficient;
    if (first) {
      if (a == -1) {
        out += "-";
      } else if (a != 1) {
        out += a.get_str() + "*";
      }
    } else {
      out += a < 0 ? " - " : " + ";
      a = abs(a);
      if (a != 1) out += a.get_str() + "*";
    }
    out += "#[" + render_at(s.body, 0) + "]";
    first = false;
  }
  return out;
}

std::string render_at(const Formula& phi, int context) {
  switch (phi.kind()) {
    case NodeKind::kAtom:
      return phi.predicate() + "(x)";
    case NodeKind::kTop:
      return "true";
    case NodeKind::kBottom:
      return "false";
    case NodeKind::kNot:
      return "!" + render_at(phi.operand(), 3);
    case NodeKind::kAnd: {
      std::string s = render_at(phi.lhs(), 2) + " & " + render_at(phi.rhs(), 3);
      return context > 2 ? "(" + s + ")" : s;
    }
    case NodeKind::kOr: {
      std::string s = render_at(phi.lhs(), 1) + " | " + render_at(phi.rhs(), 2);
      return context > 1 ? "(" + s + ")" : s;
    }
    case NodeKind::kCount: {
      std::string s = render_term(phi.term());
      switch (phi.relation()) {
        case Relation::kGe: return s + " >= " + phi.bound().get_str();
        case Relation::kLe: return s + " <= " + phi.bound().get_str();
        case Relation::kMod:
          return s + " % " + phi.modulus().get_str() + " = " + phi.residue().get_str();
        case Relation::kNotMod:
          return s + " % " + phi.modulus().get_str() + " != " + phi.residue().get_str();
      }
    }
  }
  return {};
}

}  // namespace

Formula parse(std::string_view text) { return Parser(text).parse_all(); }

std::string render(const Formula& phi) { return render_at(phi, 0); }
std::string render(const CountingTerm& term) { return render_term(term); }

std::string format_parse_error(std::string_view text, const ParseError& err) {
  std::size_t line = 1;
  std::size_t line_start = 0;
  const std::size_t at = std::min(err.span().start, text.size());
  for (std::size_t i = 0; i < at; ++i) {
    if (text[i] == '\n') {
      ++line;
      line_start = i + 1;
    }
  }
  std::size_t line_end = text.find('\n', line_start);
  if (line_end == std::string_view::npos) line_end = text.size();
  const std::size_t col = at - line_start;
  const std::size_t width =
      std::max<std::size_t>(1, std::min(err.span().end, line_end) - std::min(at, line_end));

  std::ostringstream os;
  os << line << ":" << col + 1 << ": error: " << err.detail();
  if (!err.expected().empty() && err.detail().find("expected") == std::string::npos) os << " (expected " << err.expected() << ")";
  os << "\n  " << text.substr(line_start, line_end - line_start) << "\n  "
     << std::string(col, ' ') << std::string(width, '^');
  return os.str();
}

namespace sugar {

Formula exists(Formula body) { return Formula::at_least(CountingTerm::of(std::move(body)), 1); }

Formula forall(Formula body) {
  return Formula::at_most(CountingTerm::of(Formula::negate(std::move(body))), 0);
}

Formula at_least(const Integer& k, Formula body) {
  if (k < 0) throw Error("counting threshold must be nonnegative");
  return Formula::at_least(CountingTerm::of(std::move(body)), k);
}

Formula modulo(const Integer& residue, const Integer& modulus, Formula body) {
  return Formula::congruent(CountingTerm::of(std::move(body)), modulus, residue);
}

Formula equicardinal(Formula phi, Formula psi) {
  CountingTerm diff({{1, std::move(phi)}, {-1, std::move(psi)}});
  return Formula::conj(Formula::at_least(diff, 0), Formula::at_most(diff, 0));
}

Formula rescher(Formula phi, Formula psi, bool strict) {
  CountingTerm diff({{1, std::move(phi)}, {-1, std::move(psi)}});
  return Formula::at_least(std::move(diff), strict ? 1 : 0);
}

Formula percentage_at_least(const Integer& percent, Formula body) {
  if (percent < 0 || percent > 100) throw Error("percentage must lie in [0, 100]");
  if (percent == 0) return Formula::at_least(CountingTerm::of(std::move(body), 100), 0);
  CountingTerm t({{100, std::move(body)}, {-percent, Formula::top()}});
  return Formula::at_least(std::move(t), 0);
}

}  // namespace sugar

}  // namespace p1
