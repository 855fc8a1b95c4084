#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "CLI11.hpp"
#include "p1/engine.hpp"
#include "p1/flattener.hpp"
#include "p1/linear_system.hpp"
#include "p1/oracle.hpp"
#include "p1/parser.hpp"
#include "p1/type_space.hpp"

namespace p1::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Loaded {
  std::string text;
  Formula phi;
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reads and parses; on failure writes a diagnostic and returns nullopt.
std::optional<Loaded> load(const std::string& path, std::ostream& err) {
  auto text = read_file(path);
  if (!text) {
    err << "error: cannot read " << path << "\n";
    return std::nullopt;
  }
  try {
    return Loaded{*text, parse(*text)};
  } catch (const ParseError& e) {
    err << path << ":" << format_parse_error(*text, e) << "\n";
    return std::nullopt;
  }
}

json integer_json(const Integer& v) {
  if (v.fits_slong_p()) return json(static_cast<std::int64_t>(v.get_si()));
  return json(v.get_str());
}

// Types of chi's signature in ascending mask order; width from the signature.
std::vector<std::pair<OneType, Integer>> model_rows(const CharacteristicVector& chi) {
  std::vector<std::pair<OneType, Integer>> rows;
  for (const auto& [mask, count] : chi.counts()) rows.push_back({OneType{mask, chi.signature().size()}, count});
  return rows;
}

std::string mode_name(SolveMode m) { return m == SolveMode::kFull ? "full" : "sparse"; }

void print_model(std::ostream& out, const CharacteristicVector& chi) {
  out << "domain size: " << chi.total().get_str() << "\n";
  for (const auto& [type, count] : model_rows(chi))
    out << "  " << type_name(chi.signature(), type) << ": " << count.get_str() << "\n";
}

}  // namespace

json run_report(const std::string& command, const std::string& input, const Verdict& v,
                const SolveConfig& cfg) {
  json r;
  r["command"] = command;
  r["input"] = input;
  r["status"] = v.sat() ? "sat" : "unsat";
  r["incomplete"] = v.incomplete;
  if (v.sat()) {
    const auto& chi = *v.model;
    json model = json::array();
    for (const auto& [type, count] : model_rows(chi))
      model.push_back({{"type", type_name(chi.signature(), type)},
                       {"mask", type.mask},
                       {"count", integer_json(count)}});
    r["model"] = model;
    r["domain_size"] = integer_json(chi.total());
    r["signature"] = chi.signature().predicates();
    r["provenance"] = {{"leaf", v.leaf_index}, {"branch", v.branch_index}};
  }
  r["timing_ms"] = {{"flatten", v.times.flatten_ms},
                    {"encode", v.times.encode_ms},
                    {"solve", v.times.solve_ms},
                    {"verify", v.times.verify_ms},
                    {"total", v.times.total_ms}};
  r["counts"] = {{"leaves", v.leaves},
                 {"branches", v.branches},
                 {"nodes", v.stats.nodes},
                 {"pivots", v.stats.pivots},
                 {"support_bound", v.support_bound}};
  r["config"] = {{"mode", mode_name(cfg.mode)},
                 {"cap", cfg.signature_cap},
                 {"seed", cfg.seed},
                 {"budget", cfg.sparse_budget},
                 {"parallel", cfg.parallelism},
                 {"assume_exists", cfg.assume_exists}};
  return r;
}

int cmd_check(const std::string& path, const CheckOptions& opts, std::ostream& out, std::ostream& err) {
  auto in = load(path, err);
  if (!in) return kExitError;
  try {
    const Verdict v = solve(in->phi, opts.solve);
    if (opts.json) {
      out << run_report("check", path, v, opts.solve).dump(2) << "\n";
    } else {
      out << (v.sat() ? "sat" : "unsat");
      if (v.incomplete) out << " (incomplete: sparse budget exhausted)";
      out << "\n";
      if (v.sat()) print_model(out, *v.model);
    }
    return v.sat() ? kExitSat : kExitUnsat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_flatten(const std::string& path, std::ostream& out, std::ostream& err) {
  auto in = load(path, err);
  if (!in) return kExitError;
  try {
    Flattener fl(in->phi);
    std::size_t i = 0;
    while (auto leaf = fl.next()) out << i++ << ": " << render(leaf->as_formula()) << "\n";
    return kExitSat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_encode(const std::string& path, std::size_t leaf, std::size_t cap, std::ostream& out,
               std::ostream& err) {
  auto in = load(path, err);
  if (!in) return kExitError;
  try {
    Flattener fl(in->phi);
    std::optional<FlatFormula> chosen;
    for (std::size_t i = 0; i <= leaf; ++i) {
      chosen = fl.next();
      if (!chosen) break;
    }
    if (!chosen) {
      err << "error: leaf " << leaf << " does not exist\n";
      return kExitError;
    }
    const TypeSpace ts = enumerate_types(signature_of(in->phi), cap);
    out << "# leaf " << leaf << ": " << render(chosen->as_formula()) << "\n";
    for (std::size_t k = 0; k < ts.size(); ++k)
      out << "# x" << k << " = " << type_name(ts.signature(), ts[k]) << "\n";
    const LinearSystem s = encode(*chosen, ts);
    out << "# system\n" << dump(s);
    const auto branches = expand_negated(s);
    for (std::size_t b = 0; b < branches.size(); ++b)
      out << "# branch " << b << "\n" << dump(eliminate_congruences(branches[b]));
    return kExitSat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_oracle(const std::string& path, std::size_t bound, bool compare, std::size_t cap,
               std::ostream& out, std::ostream& err) {
  auto in = load(path, err);
  if (!in) return kExitError;
  try {
    const auto found = oracle_sat_upto(in->phi, bound);
    out << "oracle: " << (found ? "sat" : "unsat") << " (bound " << bound << ")\n";
    if (found) print_model(out, *found);
    if (compare) {
      SolveConfig cfg;
      cfg.signature_cap = cap;
      const Verdict v = solve(in->phi, cfg);
      out << "solver: " << (v.sat() ? "sat" : "unsat") << "\n";
      if (v.sat() == found.has_value()) {
        out << "agree\n";
      } else if (v.sat() && v.model->total() > bound) {
        out << "bound too small: solver model has domain size " << v.model->total().get_str()
            << " > " << bound << "\n";
      } else {
        out << "DISAGREE\n";
      }
    }
    return found ? kExitSat : kExitUnsat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

int cmd_bench(const std::string& dir, const SolveConfig& cfg, bool json_out, std::ostream& out,
              std::ostream& err) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    err << "error: " << dir << " is not a directory\n";
    return kExitError;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".p1") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  json rows = json::array();
  if (!json_out)
    out << "file,status,leaves,branches,nodes,pivots,flatten_ms,encode_ms,solve_ms,verify_ms,total_ms\n";
  for (const auto& f : files) {
    std::ostringstream diag;
    auto in = load(f.string(), diag);
    if (!in) {
      err << "warning: skipping " << f.filename().string() << ": " << diag.str();
      continue;
    }
    Verdict v;
    try {
      v = solve(in->phi, cfg);
    } catch (const std::exception& e) {
      err << "warning: skipping " << f.filename().string() << ": " << e.what() << "\n";
      continue;
    }
    const std::string status = v.sat() ? "sat" : (v.incomplete ? "unknown" : "unsat");
    if (json_out) {
      rows.push_back({{"file", f.filename().string()},
                      {"status", status},
                      {"leaves", v.leaves},
                      {"branches", v.branches},
                      {"nodes", v.stats.nodes},
                      {"pivots", v.stats.pivots},
                      {"flatten_ms", v.times.flatten_ms},
                      {"encode_ms", v.times.encode_ms},
                      {"solve_ms", v.times.solve_ms},
                      {"verify_ms", v.times.verify_ms},
                      {"total_ms", v.times.total_ms}});
    } else {
      out << f.filename().string() << "," << status << "," << v.leaves << "," << v.branches << ","
          << v.stats.nodes << "," << v.stats.pivots << std::fixed << std::setprecision(3) << ","
          << v.times.flatten_ms << "," << v.times.encode_ms << "," << v.times.solve_ms << ","
          << v.times.verify_ms << "," << v.times.total_ms << "\n";
    }
  }
  if (json_out) out << rows.dump(2) << "\n";
  return kExitSat;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"p1sat: finite satisfiability for one-variable logic with counting"};
  app.require_subcommand(1);

  std::string file;
  std::string format = "text";
  std::string mode = "full";
  SolveConfig cfg;
  std::size_t leaf = 0;
  std::size_t bound = 8;
  bool compare = false;

  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("--mode", mode, "full or sparse")->check(CLI::IsMember({"full", "sparse"}));
    sub->add_option("--cap", cfg.signature_cap, "largest signature enumerated in full mode");
    sub->add_option("--seed", cfg.seed, "seed for sparse support sampling");
    sub->add_option("--budget", cfg.sparse_budget, "supports tried per branch in sparse mode");
    sub->add_option("--parallel", cfg.parallelism, "leaves solved concurrently")
        ->check(CLI::PositiveNumber);
  };

  auto* check = app.add_subcommand("check", "decide satisfiability");
  check->add_option("file", file)->required();
  check->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  check->add_flag("--assume-exists", cfg.assume_exists, "read a free-x formula as exists x");
  add_solver_flags(check);

  auto* flat = app.add_subcommand("flatten", "list flat leaves");
  flat->add_option("file", file)->required();

  auto* enc = app.add_subcommand("encode", "dump the linear system of one leaf");
  enc->add_option("file", file)->required();
  enc->add_option("--leaf", leaf);
  enc->add_option("--cap", cfg.signature_cap);

  auto* orc = app.add_subcommand("oracle", "brute-force check up to a domain bound");
  orc->add_option("file", file)->required();
  orc->add_option("--bound", bound);
  orc->add_flag("--compare", compare, "also run the solver and compare");
  orc->add_option("--cap", cfg.signature_cap);

  auto* bench = app.add_subcommand("bench", "time every .p1 file in a directory");
  bench->add_option("dir", file)->required();
  bench->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  add_solver_flags(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }
  cfg.mode = mode == "sparse" ? SolveMode::kSparse : SolveMode::kFull;

  if (*check) return cmd_check(file, {cfg, format == "json"}, out, err);
  if (*flat) return cmd_flatten(file, out, err);
  if (*enc) return cmd_encode(file, leaf, cfg.signature_cap, out, err);
  if (*orc) return cmd_oracle(file, bound, compare, cfg.signature_cap, out, err);
  if (*bench) return cmd_bench(file, cfg, format == "json", out, err);
  return kExitError;
}

}  // namespace p1::cli
