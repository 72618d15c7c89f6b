#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thermobeam/config.hpp"

namespace thermobeam {

enum ExitCode : int { exit_pass = 0, exit_failure = 1, exit_usage = 2 };

/// One line per certified invariant.
struct CheckLine {
  std::string name;
  double measured = 0.0;
  std::string relation;  // "<=", ">=", "<", ">"
  double threshold = 0.0;
  bool pass = false;
};

struct Report {
  std::vector<std::pair<std::string, std::string>> info;
  std::vector<CheckLine> checks;

  void add_info(const std::string& key, const std::string& value) { info.emplace_back(key, value); }
  void add_info(const std::string& key, double value);
  CheckLine& check(const std::string& name, double measured, const std::string& relation, double threshold);
  bool passed() const;
  void write(std::ostream& out) const;
};

/// Trajectory invariants: E >= 0, D <= 0, monotone E, the multiplier
/// inequalities and the sandwich (when multipliers are given), the decay fit
/// and the final bound on the fit window.
struct TrajectoryCertificate {
  Report report;
  std::optional<DecayFit> fit;
};

TrajectoryCertificate certify_trajectory(const Setup& setup, const SimulationResult& result,
                                         const MultiplierConfig* multipliers);

/// 2 |s| of the undamped-thermal (u, v) block, the mechanical decay rate of E.
double mechanical_rate(const System& system);

struct CommandOptions {
  std::optional<std::string> csv_path;
  std::optional<std::string> report_path;
};

int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err);
int cmd_simulate(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_spectrum(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_oracle_check(const std::string& config_path, const CommandOptions& opts, std::ostream& out,
                     std::ostream& err);
/// param is "section.key" or a bare [params]/[time]/[domain] key.
int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<std::string>& values,
              const CommandOptions& opts, std::ostream& out, std::ostream& err);

/// Reads THERMOBEAM_LOG_LEVEL (trace, debug, info, warn, error, off; default warn).
void init_logging();

}  // namespace thermobeam
