#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermobeam/generator.hpp"
#include "thermobeam/kernels.hpp"
#include "thermobeam/state.hpp"

namespace thermobeam {

// ------------------------------------------------------------ functionals
//
// All norms carry the x-weight h; gradients use the forward difference.

double energy(const System& sys, const State& st, Backend backend = Backend::openmp);

struct DissipationBreakdown {
  double damping = 0.0;          // -2 h sum g v^2
  double conduction = 0.0;       // -l |theta_x|^2
  double memory_upwind = 0.0;    // exact form of the upwind s-transport
  double memory_analytic = 0.0;  // 1/2 sum_k w_k mu'_k |eta_k,x|^2

  /// Phi^T H A_h Phi, the rate of change of E under the discrete generator.
  double total() const { return damping + conduction + memory_upwind; }
};

DissipationBreakdown dissipation_breakdown(const System& sys, const State& st, Backend backend = Backend::openmp);
double dissipation(const System& sys, const State& st, Backend backend = Backend::openmp);

/// Time derivative of (u, v, theta) from the generator rows.
struct MechanicalRates {
  Eigen::VectorXd u, v, theta;
};
MechanicalRates generator_rates(const System& sys, const State& st, Backend backend = Backend::openmp);

double lyap_F1(const System& sys, const State& st);
double lyap_F2(const System& sys, const State& st, Backend backend = Backend::openmp);
double lyap_I(const System& sys, const State& st, Backend backend = Backend::openmp);

// ------------------------------------------------------------ multipliers

struct MultiplierOptions {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  std::optional<double> sigma3;  // default mu0
  double N1 = 1.0;
  double Ckappa = 5.0;
  double slack = 0.1;
  double sigma = 1.0;  // Young parameter of the equivalence bound
};

struct MultiplierConfig {
  double N = 0.0, N1 = 0.0, N2 = 0.0;
  double sigma1 = 0.0, sigma2 = 0.0, sigma3 = 0.0, sigma = 1.0;
  double Ckappa = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0;
  double Cp = 0.0;
  double zeta1 = 0.0, zeta2 = 0.0, gamma0 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0;
  double mu0 = 0.0, delta1 = 0.0;
  double lambda = 0.0;         // decay constant of dL/dt <= -lambda E
  double gamma_theory = 0.0;   // lambda / gamma2
  double K_theory = 0.0;       // gamma2 / gamma1
};

MultiplierConfig choose_multipliers(const PhysicalParams& params, const KernelReport& kernel,
                                    const CoefficientField& coefficients, double Cp,
                                    const MultiplierOptions& options = {});

/// Throws InfeasibleMultipliers naming the first violated constraint.
void validate_multipliers(const MultiplierConfig& m, const PhysicalParams& params,
                          const CoefficientField& coefficients);

double lyapunov_total(const System& sys, const State& st, const MultiplierConfig& m,
                      Backend backend = Backend::openmp);

// ---------------------------------------------------------- diagnostics

/// Every scalar needed per sample, computed in one pass over the history.
struct Snapshot {
  double t = 0.0;
  double E = 0.0;
  DissipationBreakdown D;
  double F1 = 0.0, F2 = 0.0, I = 0.0, L = 0.0;
  double dF1 = 0.0, dF2 = 0.0;
  // h-weighted building blocks for the multiplier inequalities
  double bending = 0.0;        // u^T bih u
  double slope = 0.0;          // |u_x|^2
  double velocity = 0.0;       // |v|^2
  double temperature = 0.0;    // |theta|^2
  double temperature_x = 0.0;  // |theta_x|^2
  double memory_prime = 0.0;   // sum_k w_k mu'_k |eta_k,x|^2 (<= 0)
};

Snapshot snapshot(const System& sys, const State& st, const MultiplierConfig* m = nullptr,
                  Backend backend = Backend::openmp);

/// Right-hand minus left-hand side of each multiplier inequality; a value
/// >= -slack means the inequality holds.
struct LemmaMargins {
  double f1 = 0.0;        // bound on dF1/dt
  double i = 0.0;         // bound on I
  double f2 = 0.0;        // bound on dF2/dt
  double lower = 0.0;     // L - gamma1 E
  double upper = 0.0;     // gamma2 E - L
};

LemmaMargins lemma_margins(const Snapshot& s, const MultiplierConfig& m, const PhysicalParams& params);

// ----------------------------------------------------------- certifiers

struct DissipativityReport {
  double worst_ratio = 0.0;  // max Phi^T H A Phi / Phi^T H Phi
  int samples = 0;
  std::uint64_t seed = 0;
};

DissipativityReport check_dissipativity(const GeneratorAssembly& a, int n_samples, std::uint64_t seed);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;  // ascending real part
  double abscissa = 0.0;
  bool estimated = false;  // Krylov estimate instead of the full spectrum
};

/// Dense eigensolve up to dimension 2000, shift-invert Arnoldi beyond.
SpectrumReport spectral_abscissa(const GeneratorAssembly& a, int krylov_dim = 120);

struct ResolventReport {
  double condition_estimate = 0.0;  // 1-norm condition of I - A_h
  bool dense = true;
};

ResolventReport resolvent_check(const GeneratorAssembly& a);

// ------------------------------------------------------------ decay fit

enum class FitMethod { plain_lsq, peak_envelope };

struct DecayFit {
  double gamma_fit = 0.0;
  double K_fit = 0.0;
  double r2 = 0.0;
  double t1 = 0.0, t2 = 0.0;
  FitMethod method = FitMethod::plain_lsq;  // the method actually used
  int points = 0;
};

/// t and E are the full trajectory; E(0) is t[0]'s value.
DecayFit fit_decay(std::span<const double> t, std::span<const double> E, double t1, double t2, FitMethod method);

std::string_view to_string(FitMethod m);

}  // namespace thermobeam
