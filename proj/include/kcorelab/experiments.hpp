#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kcl {

// Parsed CLI/experiment configuration. One struct for all subcommands;
// each command validates the fields it uses before any work starts.
struct ExperimentConfig {
  std::string command;        // verify|threshold|continuity|cutnorm|paley|plot
  std::string kernel;         // preset name or step-kernel file path
  std::string kernel_b;       // cutnorm second operand
  long n = 0;
  double c = 1.0;
  double c_min = 0.0;
  double c_max = 10.0;
  int k = 3;
  long trials = 0;
  int depth = 0;              // 0 = limit mode
  std::uint64_t seed = 1;
  int workers = 0;            // 0 = available parallelism / env fallback
  std::string out;            // CSV path ("" = stdout)
  std::string plot;           // optional SVG path
  std::string strategy = "fast";
  double tol = 1e-12;
  double eps_pa = 1e-8;
  double tol_c = 1e-4;
  std::vector<long> q_list;   // continuity: Paley primes
  std::vector<int> m_list;    // continuity: dyadic refinement levels
  bool timing = false;        // record measured wallclock (breaks
                              // byte-determinism; off by default)
  std::string x_column;       // plot command
  std::string y_column;

  static ExperimentConfig from_json(const std::string& text);
};

// Runs the configured experiment, writes CSV (and SVG when requested).
// Returns the process exit code: 0 ok, 2 config, 3 io, 4 capability.
int run_experiment(const ExperimentConfig& config);

// Fixed float formatting rule for every CSV cell: 12 significant digits,
// "." separator, platform-independent.
std::string format_csv_double(double v);

inline constexpr const char* kCsvSchemaVersion = "kcore-lab-csv v1";

}  // namespace kcl
