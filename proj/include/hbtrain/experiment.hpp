#pragma once

#include <string>
#include <vector>

#include "hbtrain/config.hpp"
#include "hbtrain/evaluation.hpp"

namespace hbtrain {

enum class Command { run, sweep, qnz, selfcheck };

/// A fully-validated experiment description, parsed from the INI-style
/// configuration file plus command-line overrides.
struct ExperimentSpec {
  SystemConfig base;
  Command command = Command::run;
  SweepAxis sweep_axis = SweepAxis::energy;
  std::vector<double> sweep_values;
  std::vector<double> rho_values = {0.1, 0.5, 0.8};  // qnz grid
  std::vector<Scheme> schemes = {Scheme::waterfill_fd, Scheme::equal_fd};
  int trials = 200;
  std::string output_path = "out.csv";
  int threads = 0;  // 0 = auto
};

/// Parses the configuration document. Sections [system], [sweep], [output];
/// keys named after SystemConfig fields. Unknown keys, malformed values, and
/// violated invariants raise ParseError with key and line.
ExperimentSpec parse_spec(const std::string& text);

/// parse_spec on the contents of a file.
ExperimentSpec parse_spec_file(const std::string& path);

/// Writes evaluation records as CSV: fixed header, one row per record,
/// floats at 9 significant digits, LF line endings.
void emit_csv(const std::vector<EvaluationRecord>& records,
              const std::string& path);

/// CSV for the slot-utilization profile (m, rho, q, q_nz, ratio).
void emit_qnz_csv(const std::vector<QnzEntry>& entries,
                  const std::string& path);

/// Serializes records to the CSV text without touching the filesystem.
std::string format_csv(const std::vector<EvaluationRecord>& records);

/// Executes the spec's command end to end (parsing already done).
/// Returns the process exit code.
int run_experiment(const ExperimentSpec& spec);

}  // namespace hbtrain
