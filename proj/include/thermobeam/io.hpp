#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "thermobeam/stepper.hpp"

namespace thermobeam {

inline constexpr const char* kCsvHeader = "t,E,D,dE_numeric,identity_residual,F1,F2,I,L";

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records);
/// Final line of a partial CSV: "# truncated at step <k>: <reason>".
void write_truncation_marker(std::ostream& out, long step, const std::string& reason);

/// Rows of whitespace-separated numbers; '#' starts a comment. Every row must
/// have between min_cols and max_cols columns.
std::vector<std::vector<double>> read_numeric_table(const std::string& path, int min_cols, int max_cols);

/// s, mu[, mu'] columns.
MemoryKernel read_kernel_table(const std::string& path);
/// x, value columns.
Profile read_profile_table(const std::string& path);

std::uint64_t fnv1a(std::string_view text);

// Checkpoint, text format version 1:
//   thermobeam-checkpoint 1
//   nx <Nx> ns <Ns> t <t> config <16 hex digits>
//   u <Nx values>
//   v <Nx values>
//   theta <Nx values>
//   eta <k> <Nx values>        one line per s-node, k = 0..Ns-1 ascending
inline constexpr int kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const State& state, std::uint64_t config_hash);
void write_checkpoint(const std::string& path, const State& state, std::uint64_t config_hash);

struct Checkpoint {
  State state;
  std::uint64_t config_hash = 0;
};

Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace thermobeam
