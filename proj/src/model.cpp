#include "thermobeam/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace thermobeam {

namespace {

[[noreturn]] void out_of_range(const std::string& field, double value, const std::string& bound) {
  std::ostringstream os;
  os << field << " = " << value << " must satisfy " << bound;
  throw Error(ErrorKind::ParamOutOfRange, field, os.str());
}

bool finite(double x) { return std::isfinite(x); }

}  // namespace

PhysicalParams derive_params(double lambda1, double lambda2, double kappa, double beta, Strictness strictness) {
  if (!finite(lambda1) || !(lambda1 > 0.0 && lambda1 < 1.0)) out_of_range("lambda1", lambda1, "0 < lambda1 < 1");
  if (!finite(lambda2) || !(lambda2 > 0.0)) out_of_range("lambda2", lambda2, "lambda2 > 0");
  const bool strict = strictness == Strictness::strict;
  if (!finite(kappa) || (strict ? !(kappa > 0.0) : !(kappa >= 0.0)))
    out_of_range("kappa", kappa, strict ? "kappa > 0" : "kappa >= 0");
  if (!finite(beta) || (strict ? !(beta > 0.0) : !(beta >= 0.0)))
    out_of_range("beta", beta, strict ? "beta > 0" : "beta >= 0");

  PhysicalParams p;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.kappa = kappa;
  p.beta = beta;
  p.l = (1.0 - lambda1) / lambda2;
  if (!(p.l > 0.0)) out_of_range("l", p.l, "l > 0");
  return p;
}

// ---------------------------------------------------------------- Profile

Profile Profile::constant(double c) {
  Profile p;
  p.kind_ = Kind::constant;
  p.a_ = {c};
  return p;
}

Profile Profile::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw Error(ErrorKind::InvalidArgument, "polynomial", "empty coefficient list");
  Profile p;
  p.kind_ = Kind::polynomial;
  p.a_ = std::move(coeffs);
  return p;
}

Profile Profile::sine(int mode, double amplitude, double length) {
  if (mode < 1) throw Error(ErrorKind::InvalidArgument, "sine", "mode must be >= 1");
  if (!(length > 0.0)) throw Error(ErrorKind::InvalidArgument, "sine", "length must be > 0");
  Profile p;
  p.kind_ = Kind::sine;
  p.amplitude_ = amplitude;
  p.wavenumber_ = mode * std::numbers::pi / length;
  return p;
}

Profile Profile::table(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "table", "profile table needs >= 2 rows of (x, value)");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw Error(ErrorKind::InvalidArgument, "table", "x must be strictly increasing");
  Profile p;
  p.kind_ = Kind::table;
  p.a_ = std::move(xs);
  p.b_ = std::move(ys);
  return p;
}

double Profile::value(double x) const {
  switch (kind_) {
    case Kind::constant: return a_[0];
    case Kind::polynomial: {
      double acc = 0.0;
      for (auto it = a_.rbegin(); it != a_.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
    case Kind::sine: return amplitude_ * std::sin(wavenumber_ * x);
    case Kind::table: {
      if (x <= a_.front()) return b_.front();
      if (x >= a_.back()) return b_.back();
      const auto it = std::upper_bound(a_.begin(), a_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - a_.begin()) - 1;
      const double t = (x - a_[i]) / (a_[i + 1] - a_[i]);
      return (1.0 - t) * b_[i] + t * b_[i + 1];
    }
  }
  return 0.0;
}

double Profile::derivative(double x) const {
  switch (kind_) {
    case Kind::constant: return 0.0;
    case Kind::polynomial: {
      double acc = 0.0;
      for (std::size_t i = a_.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * a_[i];
      return acc;
    }
    case Kind::sine: return amplitude_ * wavenumber_ * std::cos(wavenumber_ * x);
    case Kind::table: {
      // one-sided second-order estimate at the ends, segment slope inside
      const std::size_t n = a_.size();
      if (x <= a_.front() || x >= a_.back()) {
        if (n < 3) return (b_[1] - b_[0]) / (a_[1] - a_[0]);
        const bool left = x <= a_.front();
        const std::size_t i0 = left ? 0 : n - 1;
        const std::size_t i1 = left ? 1 : n - 2;
        const std::size_t i2 = left ? 2 : n - 3;
        const double h1 = a_[i1] - a_[i0], h2 = a_[i2] - a_[i0];
        // derivative at a_[i0] of the quadratic through the three points
        const double d1 = (b_[i1] - b_[i0]) / h1, d2 = (b_[i2] - b_[i0]) / h2;
        return (d1 * h2 - d2 * h1) / (h2 - h1);
      }
      const auto it = std::upper_bound(a_.begin(), a_.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - a_.begin()) - 1;
      return (b_[i + 1] - b_[i]) / (a_[i + 1] - a_[i]);
    }
  }
  return 0.0;
}

std::vector<double> Profile::sample(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  std::transform(xs.begin(), xs.end(), out.begin(), [this](double x) { return value(x); });
  return out;
}

// ------------------------------------------------------- CoefficientField

CoefficientField certify_coefficients(std::span<const double> p_values, std::span<const double> g_values) {
  if (p_values.empty() || g_values.empty())
    throw Error(ErrorKind::DimensionMismatch, "coefficients", "coefficient samples must be nonempty");
  if (p_values.size() != g_values.size())
    throw Error(ErrorKind::DimensionMismatch, "coefficients", "p and g must have the same number of samples");

  auto check = [](std::span<const double> values, const char* name) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        std::ostringstream os;
        os << name << "[" << i << "] = " << values[i] << " is not strictly positive";
        throw Error(ErrorKind::NonPositiveCoefficient, std::string(name) + "[" + std::to_string(i) + "]", os.str());
      }
    }
  };
  check(p_values, "p");
  check(g_values, "g");

  CoefficientField field;
  field.p_values.assign(p_values.begin(), p_values.end());
  field.g_values.assign(g_values.begin(), g_values.end());
  const auto [pmin, pmax] = std::minmax_element(field.p_values.begin(), field.p_values.end());
  const auto [gmin, gmax] = std::minmax_element(field.g_values.begin(), field.g_values.end());
  field.alpha1 = *pmin;
  field.alpha2 = *pmax;
  field.alpha3 = *gmin;
  field.alpha4 = *gmax;
  return field;
}

// ---------------------------------------------------------- MemoryKernel

MemoryKernel MemoryKernel::prony(std::vector<double> amplitudes, std::vector<double> rates) {
  if (amplitudes.empty() || amplitudes.size() != rates.size())
    throw Error(ErrorKind::InvalidArgument, "kernel", "prony kernel needs matching, nonempty amplitude and rate lists");
  MemoryKernel k;
  k.form_ = Form::prony;
  k.a_ = std::move(amplitudes);
  k.rates_ = std::move(rates);
  return k;
}

MemoryKernel MemoryKernel::tabulated(std::vector<double> s, std::vector<double> mu, std::vector<double> dmu) {
  if (s.size() < 2 || s.size() != mu.size() || (!dmu.empty() && dmu.size() != s.size()))
    throw Error(ErrorKind::InvalidArgument, "kernel", "kernel table needs >= 2 rows with consistent columns");
  if (s.front() != 0.0) throw Error(ErrorKind::InvalidArgument, "kernel", "kernel table must start at s = 0");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw Error(ErrorKind::InvalidArgument, "kernel", "kernel table s must be strictly increasing");

  MemoryKernel k;
  k.form_ = Form::tabulated;
  k.s_ = std::move(s);
  k.mu_ = std::move(mu);
  k.dmu_ = std::move(dmu);
  if (k.dmu_.empty()) {
    const std::size_t n = k.s_.size();
    k.dmu_estimate_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i == 0 ? 0 : i - 1;
      const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
      k.dmu_estimate_[i] = (k.mu_[hi] - k.mu_[lo]) / (k.s_[hi] - k.s_[lo]);
    }
  }
  return k;
}

std::size_t MemoryKernel::segment(double s) const {
  if (s < 0.0 || s > s_.back() * (1.0 + 1e-14))
    throw Error(ErrorKind::InvalidArgument, "kernel", "s = " + std::to_string(s) + " outside the kernel table");
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - s_.begin());
  return std::min(i == 0 ? 0 : i - 1, s_.size() - 2);
}

double MemoryKernel::value(double s) const {
  if (form_ == Form::prony) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a_.size(); ++j) acc += a_[j] * std::exp(-rates_[j] * s);
    return acc;
  }
  const std::size_t i = segment(s);
  const double h = s_[i + 1] - s_[i];
  const double t = std::clamp((s - s_[i]) / h, 0.0, 1.0);
  if (dmu_.empty()) return (1.0 - t) * mu_[i] + t * mu_[i + 1];
  // cubic Hermite
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * mu_[i] + (t3 - 2 * t2 + t) * h * dmu_[i] + (-2 * t3 + 3 * t2) * mu_[i + 1] +
         (t3 - t2) * h * dmu_[i + 1];
}

double MemoryKernel::derivative(double s) const {
  if (form_ == Form::prony) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a_.size(); ++j) acc -= a_[j] * rates_[j] * std::exp(-rates_[j] * s);
    return acc;
  }
  const std::size_t i = segment(s);
  const double h = s_[i + 1] - s_[i];
  const double t = std::clamp((s - s_[i]) / h, 0.0, 1.0);
  if (dmu_.empty()) return (1.0 - t) * dmu_estimate_[i] + t * dmu_estimate_[i + 1];
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * mu_[i] + (-6 * t2 + 6 * t) * mu_[i + 1]) / h + (3 * t2 - 4 * t + 1) * dmu_[i] +
         (3 * t2 - 2 * t) * dmu_[i + 1];
}

double MemoryKernel::support_end() const {
  return form_ == Form::prony ? std::numeric_limits<double>::infinity() : s_.back();
}

// --------------------------------------------------------- validate_kernel

void KernelReport::require() const {
  if (!failure) return;
  const char* hyp = "";
  switch (*failure) {
    case ErrorKind::NonPositiveKernel: hyp = "H1"; break;
    case ErrorKind::IncreasingKernel: hyp = "H2"; break;
    case ErrorKind::InfiniteMass: hyp = "H3"; break;
    case ErrorKind::NoExponentialDomination: hyp = "H4"; break;
    default: break;
  }
  throw Error(*failure, hyp, message);
}

namespace {

// Threshold below which mu_k is excluded from the -mu'/mu infimum.
constexpr double kRatioGuard = 1e-14;
// A tabulated ratio that is still falling by more than this fraction over
// the second half of the table is treated as tending to zero.
constexpr double kSettledRatio = 0.9;

void fail(KernelReport& r, ErrorKind kind, const std::string& msg) {
  if (!r.failure) {
    r.failure = kind;
    r.message = msg;
  }
}

KernelReport validate_prony(const MemoryKernel& k, int probes) {
  KernelReport r;
  const auto& a = k.amplitudes();
  const auto& d = k.rates();
  const bool all_positive = std::all_of(a.begin(), a.end(), [](double x) { return x > 0.0; }) &&
                            std::all_of(d.begin(), d.end(), [](double x) { return x > 0.0; });

  if (std::any_of(d.begin(), d.end(), [](double x) { return !(x > 0.0); })) {
    r.h1 = std::all_of(a.begin(), a.end(), [](double x) { return x >= 0.0; });
    r.h3 = false;
    fail(r, ErrorKind::InfiniteMass, "prony rates must be > 0 for a finite kernel mass");
    r.mu0 = std::numeric_limits<double>::infinity();
    return r;
  }

  r.mu0 = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) r.mu0 += a[j] / d[j];

  if (all_positive) {
    r.h1 = r.h2 = true;
    r.h3 = std::isfinite(r.mu0) && r.mu0 > 0.0;
    r.delta1 = *std::min_element(d.begin(), d.end());
    r.h4 = r.delta1 > 0.0;
    if (!r.h3) fail(r, ErrorKind::InfiniteMass, "kernel mass is not finite and positive");
    return r;
  }

  // mixed-sign amplitudes: fall back to probing
  const double rmin = *std::min_element(d.begin(), d.end());
  const double s_end = 40.0 / rmin;
  const int n = std::max(probes, 2);
  r.h1 = r.h2 = true;
  double inf_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = s_end * i / (n - 1);
    const double mu = k.value(s), dmu = k.derivative(s);
    if (mu < 0.0) r.h1 = false;
    if (dmu > 0.0) r.h2 = false;
    if (mu > kRatioGuard) inf_ratio = std::min(inf_ratio, -dmu / mu);
  }
  r.h3 = std::isfinite(r.mu0) && r.mu0 > 0.0;
  r.delta1 = std::isfinite(inf_ratio) ? inf_ratio : 0.0;
  r.h4 = r.delta1 > 0.0;
  if (!r.h1) fail(r, ErrorKind::NonPositiveKernel, "mu(s) < 0 at a probe point");
  if (!r.h2) fail(r, ErrorKind::IncreasingKernel, "mu'(s) > 0 at a probe point");
  if (!r.h3) fail(r, ErrorKind::InfiniteMass, "kernel mass is not finite and positive");
  if (!r.h4) fail(r, ErrorKind::NoExponentialDomination, "inf -mu'/mu is not positive");
  return r;
}

KernelReport validate_tabulated(const MemoryKernel& k, int probes) {
  KernelReport r;
  const auto& s = k.table_s();
  const auto& mu = k.table_mu();
  const std::size_t n = s.size();
  const double s_end = s.back();

  std::vector<double> points(s.begin(), s.end());
  for (int i = 0; i < probes; ++i) points.push_back(s_end * i / (probes - 1));
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  r.h1 = std::all_of(mu.begin(), mu.end(), [](double x) { return x >= 0.0; });
  r.h2 = true;
  for (std::size_t i = 1; i < n; ++i)
    if (mu[i] > mu[i - 1]) r.h2 = false;
  for (double x : points) {
    if (k.value(x) < 0.0) r.h1 = false;
    if (k.derivative(x) > 0.0) r.h2 = false;
  }

  // -mu'/mu over probe points with mu above the guard
  double inf_ratio = std::numeric_limits<double>::infinity();
  double last_valid = -1.0;
  for (double x : points) {
    const double m = k.value(x);
    if (m > kRatioGuard) {
      inf_ratio = std::min(inf_ratio, -k.derivative(x) / m);
      last_valid = x;
    }
  }
  double ratio_end = 0.0, ratio_mid = 0.0;
  if (last_valid > 0.0) {
    ratio_end = -k.derivative(last_valid) / k.value(last_valid);
    const double mid = 0.5 * last_valid;
    ratio_mid = -k.derivative(mid) / k.value(mid);
  }

  // mass: trapezoid (Hermite-corrected when mu' is tabulated) plus an
  // exponential tail continuing the last row
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = s[i + 1] - s[i];
    mass += 0.5 * h * (mu[i] + mu[i + 1]);
    if (k.has_derivative_table()) mass += h * h * (k.table_dmu()[i] - k.table_dmu()[i + 1]) / 12.0;
  }
  const double mu_end = mu.back();
  if (mu_end > kRatioGuard * std::max(mu.front(), 1.0)) {
    const double tail_rate = -k.derivative(s_end) / mu_end;
    mass = tail_rate > 0.0 ? mass + mu_end / tail_rate : std::numeric_limits<double>::infinity();
  }
  r.mu0 = mass;
  r.h3 = std::isfinite(mass) && mass > 0.0;

  const bool settled = last_valid > 0.0 && ratio_end >= kSettledRatio * ratio_mid;
  r.delta1 = std::isfinite(inf_ratio) && settled ? std::max(inf_ratio, 0.0) : 0.0;
  r.h4 = r.delta1 > 0.0;

  if (!r.h1) fail(r, ErrorKind::NonPositiveKernel, "tabulated mu(s) is negative somewhere");
  if (!r.h2) fail(r, ErrorKind::IncreasingKernel, "tabulated mu(s) increases somewhere");
  if (!r.h3) fail(r, ErrorKind::InfiniteMass, "kernel mass is not finite and positive");
  if (!r.h4) {
    std::ostringstream os;
    os << "-mu'/mu falls from " << ratio_mid << " to " << ratio_end << " over the table tail; no delta1 > 0 "
       << "is certified";
    fail(r, ErrorKind::NoExponentialDomination, os.str());
  }
  return r;
}

}  // namespace

KernelReport validate_kernel(const MemoryKernel& kernel, int s_probe_count) {
  if (s_probe_count < 2) throw Error(ErrorKind::InvalidArgument, "s_probe_count", "need at least 2 probe points");
  return kernel.form() == MemoryKernel::Form::prony ? validate_prony(kernel, s_probe_count)
                                                    : validate_tabulated(kernel, s_probe_count);
}

}  // namespace thermobeam
