#include "p1/linear_system.hpp"

#include <algorithm>
#include <functional>

namespace p1 {

std::string Unknown::name() const {
  const std::string i = std::to_string(index);
  switch (kind) {
    case UnknownKind::kTypeCount: return "x" + i;
    case UnknownKind::kQuotientPos: return "yp" + i;
    case UnknownKind::kQuotientNeg: return "yn" + i;
    case UnknownKind::kRemainder: return "r" + i;
    case UnknownKind::kRemQuotientPos: return "qp" + i;
    case UnknownKind::kRemQuotientNeg: return "qn" + i;
  }
  return "?" + i;
}

bool LinearConstraint::constant_holds() const {
  switch (relation) {
    case RowRelation::kGe: return 0 >= rhs;
    case RowRelation::kLe: return 0 <= rhs;
    case RowRelation::kMod: return euclidean_residue(0, modulus) == rhs;
    case RowRelation::kNotMod: return euclidean_residue(0, modulus) != rhs;
  }
  return false;
}

bool LinearSystem::has_congruences() const {
  return std::any_of(constraints.begin(), constraints.end(),
                     [](const auto& c) { return c.relation == RowRelation::kMod; });
}

bool LinearSystem::has_negated_congruences() const {
  return std::any_of(constraints.begin(), constraints.end(),
                     [](const auto& c) { return c.relation == RowRelation::kNotMod; });
}

LinearSystem encode(const FlatFormula& f, const TypeSpace& ts) {
  LinearSystem s;
  s.unknowns.reserve(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) s.unknowns.push_back({UnknownKind::kTypeCount, k});

  for (std::size_t i = 0; i < f.literals.size(); ++i) {
    const auto& lit = f.literals[i];
    const auto coeffs = term_coefficients(lit.term(), ts);
    LinearConstraint row;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      if (coeffs[k] != 0) row.terms.emplace_back(Unknown{UnknownKind::kTypeCount, k}, coeffs[k]);
    }
    switch (lit.relation()) {
      case Relation::kGe:
        row.relation = RowRelation::kGe;
        row.rhs = lit.bound();
        break;
      case Relation::kLe:
        row.relation = RowRelation::kLe;
        row.rhs = lit.bound();
        break;
      case Relation::kMod:
      case Relation::kNotMod:
        row.relation = lit.relation() == Relation::kMod ? RowRelation::kMod : RowRelation::kNotMod;
        row.rhs = lit.residue();
        row.modulus = lit.modulus();
        break;
    }
    row.source = i;
    s.constraints.push_back(std::move(row));
  }

  LinearConstraint nonempty;
  for (std::size_t k = 0; k < ts.size(); ++k) nonempty.terms.emplace_back(Unknown{UnknownKind::kTypeCount, k}, 1);
  nonempty.relation = RowRelation::kGe;
  nonempty.rhs = 1;
  s.constraints.push_back(std::move(nonempty));
  return s;
}

namespace {

std::size_t row_tag(const LinearConstraint& row, std::size_t position) {
  return row.source.value_or(position);
}

LinearConstraint with_relation(LinearConstraint row, RowRelation rel, Integer rhs) {
  row.relation = rel;
  row.rhs = std::move(rhs);
  row.modulus = 0;
  return row;
}

}  // namespace

LinearSystem eliminate_congruences(const LinearSystem& s) {
  if (s.has_negated_congruences()) {
    throw Error("eliminate_congruences: expand negated congruences first");
  }
  LinearSystem out;
  out.unknowns = s.unknowns;
  for (std::size_t i = 0; i < s.constraints.size(); ++i) {
    const auto& row = s.constraints[i];
    if (row.relation != RowRelation::kMod) {
      out.constraints.push_back(row);
      continue;
    }
    const std::size_t tag = row_tag(row, i);
    const Unknown yp{UnknownKind::kQuotientPos, tag};
    const Unknown yn{UnknownKind::kQuotientNeg, tag};
    out.unknowns.push_back(yp);
    out.unknowns.push_back(yn);
    LinearConstraint eq = row;
    eq.terms.emplace_back(yp, -row.modulus);
    eq.terms.emplace_back(yn, row.modulus);
    out.constraints.push_back(with_relation(eq, RowRelation::kLe, row.rhs));
    out.constraints.push_back(with_relation(eq, RowRelation::kGe, row.rhs));
  }
  return out;
}

std::vector<LinearSystem> expand_negated(const LinearSystem& s) {
  // Every branch shares the same rows apart from one bound on each remainder.
  LinearSystem base;
  base.unknowns = s.unknowns;
  std::vector<std::vector<LinearConstraint>> choices;

  for (std::size_t i = 0; i < s.constraints.size(); ++i) {
    const auto& row = s.constraints[i];
    if (row.relation != RowRelation::kNotMod) {
      base.constraints.push_back(row);
      continue;
    }
    const std::size_t tag = row_tag(row, i);
    const Unknown r{UnknownKind::kRemainder, tag};
    const Unknown qp{UnknownKind::kRemQuotientPos, tag};
    const Unknown qn{UnknownKind::kRemQuotientNeg, tag};
    base.unknowns.insert(base.unknowns.end(), {r, qp, qn});

    LinearConstraint eq = row;
    eq.terms.emplace_back(r, -1);
    eq.terms.emplace_back(qp, -row.modulus);
    eq.terms.emplace_back(qn, row.modulus);
    base.constraints.push_back(with_relation(eq, RowRelation::kLe, 0));
    base.constraints.push_back(with_relation(eq, RowRelation::kGe, 0));

    LinearConstraint rem;
    rem.terms.emplace_back(r, 1);
    rem.source = row.source;
    base.constraints.push_back(with_relation(rem, RowRelation::kLe, row.modulus - 1));

    std::vector<LinearConstraint> options;
    if (row.rhs > 0) options.push_back(with_relation(rem, RowRelation::kLe, row.rhs - 1));
    if (row.rhs < row.modulus - 1) options.push_back(with_relation(rem, RowRelation::kGe, row.rhs + 1));
    choices.push_back(std::move(options));
  }

  std::vector<LinearSystem> out;
  std::vector<LinearConstraint> picked;
  std::function<void(std::size_t)> walk = [&](std::size_t j) {
    if (j == choices.size()) {
      LinearSystem branch = base;
      branch.constraints.insert(branch.constraints.end(), picked.begin(), picked.end());
      out.push_back(std::move(branch));
      return;
    }
    for (const auto& option : choices[j]) {
      picked.push_back(option);
      walk(j + 1);
      picked.pop_back();
    }
  };
  walk(0);
  return out;
}

LinearSystem restrict_support(const LinearSystem& s, const std::set<std::size_t>& keep) {
  auto dropped = [&](const Unknown& u) {
    return u.kind == UnknownKind::kTypeCount && !keep.count(u.index);
  };
  LinearSystem out;
  for (const auto& u : s.unknowns) {
    if (!dropped(u)) out.unknowns.push_back(u);
  }
  for (const auto& row : s.constraints) {
    LinearConstraint r = row;
    r.terms.clear();
    for (const auto& [u, a] : row.terms) {
      if (!dropped(u)) r.terms.emplace_back(u, a);
    }
    out.constraints.push_back(std::move(r));
  }
  return out;
}

Integer row_value(const LinearConstraint& row, const Assignment& a) {
  Integer v = 0;
  for (const auto& [u, coeff] : row.terms) {
    auto it = a.find(u);
    if (it != a.end()) v += coeff * it->second;
  }
  return v;
}

bool satisfies(const LinearSystem& s, const Assignment& a) {
  for (const auto& [u, v] : a) {
    if (v < 0) return false;
  }
  for (const auto& row : s.constraints) {
    const Integer v = row_value(row, a);
    bool ok = false;
    switch (row.relation) {
      case RowRelation::kGe: ok = v >= row.rhs; break;
      case RowRelation::kLe: ok = v <= row.rhs; break;
      case RowRelation::kMod: ok = euclidean_residue(v, row.modulus) == row.rhs; break;
      case RowRelation::kNotMod: ok = euclidean_residue(v, row.modulus) != row.rhs; break;
    }
    if (!ok) return false;
  }
  return true;
}

Integer max_abs_entry(const LinearSystem& s) {
  Integer m = 1;
  for (const auto& row : s.constraints) {
    for (const auto& [u, a] : row.terms) {
      if (abs(a) > m) m = abs(a);
    }
    if (abs(row.rhs) > m) m = abs(row.rhs);
    if (abs(row.modulus) > m) m = abs(row.modulus);
  }
  return m;
}

std::string dump(const LinearConstraint& row) {
  std::string out;
  bool first = true;
  for (const auto& [u, a] : row.terms) {
    if (first) {
      out += a.get_str();
    } else {
      out += a < 0 ? " -" : " +";
      out += Integer(abs(a)).get_str();
    }
    out += "*" + u.name();
    first = false;
  }
  if (first) out = "0";
  switch (row.relation) {
    case RowRelation::kGe: return out + " >= " + row.rhs.get_str();
    case RowRelation::kLe: return out + " <= " + row.rhs.get_str();
    case RowRelation::kMod: return out + " % " + row.modulus.get_str() + " = " + row.rhs.get_str();
    case RowRelation::kNotMod:
      return out + " % " + row.modulus.get_str() + " != " + row.rhs.get_str();
  }
  return out;
}

std::string dump(const LinearSystem& s) {
  std::string out;
  for (const auto& row : s.constraints) out += dump(row) + "\n";
  return out;
}

}  // namespace p1
