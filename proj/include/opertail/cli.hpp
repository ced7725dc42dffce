#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "opertail/config.hpp"

namespace opertail::cli {

// Stable exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Writes <out>/eval.csv and <out>/eval.json.
int cmd_eval(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
/// Writes <out>/sample.csv.
int cmd_sample(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
/// Writes <out>/verify_<suite>.json; exit 0 iff every check passed.
int cmd_verify(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::string suite;
  std::vector<Check> checks;
  bool passed() const;
  nlohmann::json to_json() const;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"quasihom",    "transform-roundtrip", "empirical-vs-closed",
                                              "exponent-consistency", "orthant-mc", "marginal-hill",
                                              "karamata"};
  return names;
}

VerifyReport run_suite(const std::string& suite, const RunConfig& cfg);

/// Full command line: opertail eval|sample|verify --config FILE --out DIR [--seed N] [--jobs K].
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Evaluates `fn(i)` for i in [0, n) on `jobs` threads; results are indexed,
/// so the output does not depend on scheduling.
std::vector<double> parallel_map(std::size_t n, unsigned jobs, const std::function<double(std::size_t)>& fn);

/// Full-precision (17 significant digits) decimal rendering for CSV output.
std::string format_double(double v);

}  // namespace opertail::cli
