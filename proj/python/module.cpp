#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "p1/engine.hpp"
#include "p1/flattener.hpp"
#include "p1/oracle.hpp"
#include "p1/parser.hpp"

namespace py = pybind11;

namespace {

py::int_ to_py(const p1::Integer& v) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(v.get_str().c_str(), nullptr, 10));
}

// {type name: count} in ascending mask order (dicts keep insertion order).
py::dict model_dict(const p1::CharacteristicVector& chi) {
  py::dict d;
  for (const auto& [mask, count] : chi.counts())
    d[py::str(p1::type_name(chi.signature(), {mask, chi.signature().size()}))] = to_py(count);
  return d;
}

p1::Formula parse_text(const std::string& text) {
  try {
    return p1::parse(text);
  } catch (const p1::ParseError& e) {
    throw py::value_error(p1::format_parse_error(text, e));
  }
}

py::dict check(const std::string& text, const std::string& mode, std::size_t cap, std::uint64_t seed,
               std::size_t budget, std::size_t parallel, bool assume_exists) {
  p1::SolveConfig cfg;
  if (mode == "sparse") cfg.mode = p1::SolveMode::kSparse;
  else if (mode != "full") throw py::value_error("mode must be 'full' or 'sparse'");
  cfg.signature_cap = cap;
  cfg.seed = seed;
  cfg.sparse_budget = budget;
  cfg.parallelism = parallel;
  cfg.assume_exists = assume_exists;
  const p1::Formula phi = parse_text(text);
  p1::Verdict v;
  {
    py::gil_scoped_release release;
    v = p1::solve(phi, cfg);
  }
  py::dict r;
  r["status"] = v.sat() ? "sat" : "unsat";
  r["incomplete"] = v.incomplete;
  r["leaves"] = v.leaves;
  r["branches"] = v.branches;
  if (v.sat()) {
    r["model"] = model_dict(*v.model);
    r["domain_size"] = to_py(v.model->total());
    r["leaf"] = v.leaf_index;
    r["branch"] = v.branch_index;
  }
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite satisfiability for one-variable logic with counting";

  py::register_exception<p1::Error>(m, "SolverError", PyExc_RuntimeError);

  m.def("check", &check, py::arg("text"), py::arg("mode") = "full", py::arg("cap") = 20, py::arg("seed") = 1,
        py::arg("budget") = 64, py::arg("parallel") = 1, py::arg("assume_exists") = false,
        "Decide satisfiability of a sentence; returns a dict with status and, when sat, the model.");

  m.def("render", [](const std::string& text) { return p1::render(parse_text(text)); }, py::arg("text"),
        "Parse and print back in canonical syntax.");

  m.def(
      "flatten",
      [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& leaf : p1::flatten(parse_text(text))) out.push_back(p1::render(leaf.as_formula()));
        return out;
      },
      py::arg("text"), "Flat leaves of a sentence, rendered.");

  m.def(
      "oracle",
      [](const std::string& text, std::size_t bound) -> py::object {
        const auto found = p1::oracle_sat_upto(parse_text(text), bound);
        if (!found) return py::none();
        return model_dict(*found);
      },
      py::arg("text"), py::arg("bound"), "Brute-force model of total size <= bound, or None.");

  m.def(
      "verify",
      [](const std::string& text, const std::map<std::string, py::int_>& model) {
        const p1::Formula phi = parse_text(text);
        const p1::Signature sig = p1::signature_of(phi);
        p1::CharacteristicVector chi(sig);
        for (const auto& [name, count] : model) {
          std::uint64_t mask = 0;
          std::string word;
          std::istringstream in(name);
          while (in >> word) {
            const bool neg = word.front() == '!';
            const auto pos = sig.position(neg ? word.substr(1) : word);
            if (!pos) throw py::value_error("unknown predicate in type: " + word);
            if (!neg) mask |= std::uint64_t{1} << *pos;
          }
          chi.set({mask, sig.size()}, p1::Integer(py::str(count).cast<std::string>()));
        }
        return p1::verify(phi, chi);
      },
      py::arg("text"), py::arg("model"), "Check a {type: count} model against a sentence.");
}
