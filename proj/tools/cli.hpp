#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "p1/engine.hpp"

namespace p1::cli {

// Exit codes shared by every command.
inline constexpr int kExitSat = 0;
inline constexpr int kExitUnsat = 1;
inline constexpr int kExitError = 2;

struct CheckOptions {
  SolveConfig solve;
  bool json = false;
};

int cmd_check(const std::string& path, const CheckOptions& opts, std::ostream& out, std::ostream& err);
int cmd_flatten(const std::string& path, std::ostream& out, std::ostream& err);
int cmd_encode(const std::string& path, std::size_t leaf, std::size_t cap, std::ostream& out,
               std::ostream& err);
int cmd_oracle(const std::string& path, std::size_t bound, bool compare, std::size_t cap,
               std::ostream& out, std::ostream& err);
int cmd_bench(const std::string& dir, const SolveConfig& cfg, bool json, std::ostream& out,
              std::ostream& err);

/// JSON run report for `check`; field names are frozen by schemas/run_report.schema.json.
nlohmann::json run_report(const std::string& command, const std::string& input, const Verdict& v,
                          const SolveConfig& cfg);

/// Entry point used by the p1sat binary.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace p1::cli
