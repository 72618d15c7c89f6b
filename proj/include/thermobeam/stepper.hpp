#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "thermobeam/analysis.hpp"

namespace thermobeam {

enum class Scheme { full_implicit_midpoint, split_semilagrangian };

std::string_view to_string(Scheme s);

struct SchemeConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::split_semilagrangian;
  double linear_solver_tol = 1e-12;
  int max_linear_iters = 3;  // refinement sweeps after the direct solve
  Backend backend = Backend::openmp;
};

/// Advances a State of one System. The system matrix is factorized once at
/// construction; the System must outlive the Stepper.
class Stepper {
 public:
  Stepper(const System& system, SchemeConfig config);
  ~Stepper();
  Stepper(Stepper&&) noexcept;
  Stepper& operator=(Stepper&&) noexcept;

  const SchemeConfig& config() const { return config_; }
  /// In place; t advances by dt.
  void advance(State& state) const;
  State step(State state) const {
    advance(state);
    return state;
  }

 private:
  struct Impl;
  const System* system_;
  SchemeConfig config_;
  std::unique_ptr<Impl> impl_;
};

struct DiagnosticsRecord {
  double t = 0.0;
  double E = 0.0;
  double D = 0.0;
  double dE_numeric = 0.0;
  double identity_residual = 0.0;
  double F1 = 0.0, F2 = 0.0, I = 0.0, L = 0.0;
};

struct SimulationResult {
  std::vector<Snapshot> samples;
  std::vector<DiagnosticsRecord> records;
  State final_state;
  std::optional<Error> failure;
  long failed_step = -1;
  long steps = 0;
};

struct SimulationOptions {
  double T = 0.0;
  int sample_every = 1;
  const MultiplierConfig* multipliers = nullptr;
  /// Called after every sample; may inspect the current state.
  std::function<void(const State&, const Snapshot&)> observer;
};

/// Samples at t = 0, every sample_every steps and at T. T must be a whole
/// number of steps. Step errors are captured in `failure` with the step index.
SimulationResult simulate(const System& system, const State& init, const SchemeConfig& config,
                          const SimulationOptions& options);

/// Fills dE_numeric and identity_residual from the sampled E and D.
std::vector<DiagnosticsRecord> make_records(const std::vector<Snapshot>& samples);

/// exp(t A_h) phi0 by dense eigendecomposition, with a Pade
/// scaling-and-squaring fallback when the eigenvectors are ill-conditioned.
class Oracle {
 public:
  explicit Oracle(const GeneratorAssembly& assembly, double cond_limit = 1e8);
  ~Oracle();
  Oracle(Oracle&&) noexcept;

  Eigen::VectorXd evolve(const Eigen::VectorXd& phi0, double t) const;
  bool uses_fallback() const;
  double eigenvector_condition() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd oracle_evolve(const GeneratorAssembly& assembly, const Eigen::VectorXd& phi0, double t);

}  // namespace thermobeam
