#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thermobeam/analysis.hpp"
#include "thermobeam/stepper.hpp"

namespace thermobeam {

// Run file grammar:
//
//   # comment                  ('#' to end of line anywhere)
//   [section]
//   key = value
//
// Sections and keys (every key optional; defaults are the shipped default run):
//   [domain]        L, Nx
//   [params]        kappa, beta, lambda1, lambda2
//   [coefficients]  p, g                                     profile specs
//   [kernel]        type = prony | table, amplitudes, rates, path
//   [memory]        trunc_tol, ns, ds                        ns fixes the s-grid; ds defaults to dt
//   [time]          dt, T, sample_every, scheme = split_semilagrangian | full_implicit_midpoint
//   [initial]       u0, v0, theta0, history = zero | constant_past | explicit, eta0_x, eta0_s
//   [output]        csv, report, checkpoint
//   [analysis]      window_start, window_end, fit_method = peak_envelope | plain_lsq,
//                   samples, seed, Ckappa, sigma1, sigma2, sigma3, N1, backend = openmp | serial
//   [oracle]        dts, T
//
// Profile specs: "constant c", "polynomial a0 a1 ..." (a_i x^i), "sine n amp"
// (amp sin(n pi x / L)), "table <path>" (x, value columns). Lists are
// whitespace or comma separated. Relative paths resolve against the run file.
// Explicit histories are separable: eta0(x, s) = eta0_x(x) * eta0_s(s).

/// Flat "section.key" -> value map; rejects unknown sections and keys.
class RawConfig {
 public:
  static RawConfig parse(const std::string& text, const std::string& base_dir = ".");
  static RawConfig load(const std::string& path);

  std::optional<std::string> get(const std::string& dotted) const;
  /// Overrides or adds a value; the key must be known.
  void set(const std::string& dotted, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return entries_; }
  const std::string& base_dir() const { return base_dir_; }
  /// FNV-1a of the canonical "section.key=value" listing.
  std::uint64_t hash() const;

  static bool known_key(const std::string& dotted);

 private:
  std::map<std::string, std::string> entries_;
  std::string base_dir_ = ".";
};

struct RunConfig {
  double L = 1.0;
  int Nx = 64;
  double kappa = 0.5, beta = 1.0, lambda1 = 0.5, lambda2 = 1.0;
  std::string p_spec = "constant 1", g_spec = "constant 1";
  std::string kernel_type = "prony";
  std::vector<double> amplitudes{1.0}, rates{1.0};
  std::string kernel_path;
  double trunc_tol = 1e-8;
  std::optional<int> ns;
  std::optional<double> ds;
  double dt = 1e-3, T = 10.0;
  int sample_every = 10;
  Scheme scheme = Scheme::split_semilagrangian;
  std::string u0 = "polynomial 0 0 1 -2 1", v0 = "constant 0", theta0 = "sine 1 1";
  HistoryMode history = HistoryMode::constant_past;
  std::string eta0_x = "constant 0", eta0_s = "constant 0";
  std::string csv_path, report_path, checkpoint_path;
  std::optional<double> window_start, window_end;
  FitMethod fit_method = FitMethod::peak_envelope;
  int dissipativity_samples = 1000;
  std::uint64_t seed = 20240917;
  MultiplierOptions multipliers;
  Backend backend = Backend::openmp;
  std::vector<double> oracle_dts;
  std::optional<double> oracle_T;
  std::string base_dir = ".";
  std::uint64_t hash = 0;

  double window_lo() const { return window_start.value_or(0.2 * T); }
  double window_hi() const { return window_end.value_or(T); }
};

RunConfig to_run_config(const RawConfig& raw);

/// Parses a profile spec relative to base_dir, for a beam of length L.
Profile parse_profile(const std::string& spec, double length, const std::string& base_dir);

/// The validated objects a run needs, built from a RunConfig.
struct Setup {
  RunConfig config;
  MemoryKernel kernel;
  KernelReport kernel_report;
  System system;
  InitialData initial;
  SchemeConfig scheme;
};

/// Throws the first validation failure. Multipliers are not chosen here.
Setup build_setup(const RunConfig& config, Strictness strictness = Strictness::strict);

}  // namespace thermobeam
