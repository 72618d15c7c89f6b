#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thermobeam/errors.hpp"

namespace thermobeam {

/// How strictly derive_params enforces positivity of kappa and beta.
/// `limit_cases` admits kappa = 0 and beta = 0 for decoupling studies.
enum class Strictness { strict, limit_cases };

struct PhysicalParams {
  double kappa = 0.0;    // axial speed
  double beta = 0.0;     // thermo-mechanical coupling
  double lambda1 = 0.0;  // memory fraction, in (0, 1)
  double lambda2 = 0.0;  // relaxation scale
  double l = 0.0;        // instantaneous conductivity (1 - lambda1) / lambda2
};

PhysicalParams derive_params(double lambda1, double lambda2, double kappa, double beta,
                             Strictness strictness = Strictness::strict);

/// A scalar profile on [0, L]: constant, polynomial in x, a single sine mode
/// amp * sin(n pi x / L), or a piecewise-linear table.
class Profile {
 public:
  enum class Kind { constant, polynomial, sine, table };

  static Profile constant(double c);
  /// coeffs[i] multiplies x^i.
  static Profile polynomial(std::vector<double> coeffs);
  static Profile sine(int mode, double amplitude, double length);
  static Profile table(std::vector<double> xs, std::vector<double> ys);

  Kind kind() const { return kind_; }
  double value(double x) const;
  double derivative(double x) const;
  std::vector<double> sample(std::span<const double> xs) const;

 private:
  Kind kind_ = Kind::constant;
  std::vector<double> a_;  // coefficients, or table abscissae
  std::vector<double> b_;  // table ordinates
  double amplitude_ = 0.0;
  double wavenumber_ = 0.0;
};

/// Stiffness p(x) and damping g(x) sampled on the closed grid x_0..x_{Nx+1},
/// with the certified bounds alpha1 <= p <= alpha2, alpha3 <= g <= alpha4.
struct CoefficientField {
  std::vector<double> p_values;
  std::vector<double> g_values;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double alpha4 = 0.0;
};

CoefficientField certify_coefficients(std::span<const double> p_values, std::span<const double> g_values);

class MemoryKernel {
 public:
  enum class Form { prony, tabulated };

  /// mu(s) = sum_j a_j exp(-delta_j s).
  static MemoryKernel prony(std::vector<double> amplitudes, std::vector<double> rates);
  /// Table rows (s_k, mu_k[, mu'_k]); s strictly increasing from 0. Without
  /// derivatives mu' is estimated by differences and mu is linear between rows.
  static MemoryKernel tabulated(std::vector<double> s, std::vector<double> mu, std::vector<double> dmu = {});

  Form form() const { return form_; }
  bool has_derivative_table() const { return !dmu_.empty(); }
  double value(double s) const;
  double derivative(double s) const;
  /// Largest s at which the kernel is known (infinity for prony).
  double support_end() const;

  const std::vector<double>& amplitudes() const { return a_; }
  const std::vector<double>& rates() const { return rates_; }
  const std::vector<double>& table_s() const { return s_; }
  const std::vector<double>& table_mu() const { return mu_; }
  const std::vector<double>& table_dmu() const { return dmu_; }

 private:
  Form form_ = Form::prony;
  std::vector<double> a_, rates_;
  std::vector<double> s_, mu_, dmu_;
  std::vector<double> dmu_estimate_;

  std::size_t segment(double s) const;
};

/// Outcome of checking the kernel hypotheses H1 (mu >= 0), H2 (mu' <= 0),
/// H3 (0 < mu0 < inf) and H4 (mu' + delta1 mu <= 0, delta1 > 0).
struct KernelReport {
  double mu0 = 0.0;
  double delta1 = 0.0;
  bool h1 = false, h2 = false, h3 = false, h4 = false;
  std::optional<ErrorKind> failure;
  std::string message;

  bool passed() const { return !failure.has_value(); }
  /// Throws the first failed hypothesis as an Error.
  void require() const;
};

KernelReport validate_kernel(const MemoryKernel& kernel, int s_probe_count);

enum class HistoryMode { zero, constant_past, explicit_history };

struct InitialData {
  Profile u0 = Profile::constant(0.0);
  Profile v0 = Profile::constant(0.0);
  Profile theta0 = Profile::constant(0.0);
  HistoryMode history = HistoryMode::constant_past;
  /// eta0(x, s); consulted only for HistoryMode::explicit_history.
  std::function<double(double, double)> eta0;
};

}  // namespace thermobeam
