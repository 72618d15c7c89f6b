#include "thermobeam/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace thermobeam {

namespace {

constexpr Eigen::Index kDenseLimit = 2000;

double grad_sq(const DiscreteOperators& ops, const Eigen::VectorXd& x) { return (ops.grad * x).squaredNorm(); }

/// Per-node weight vectors derived from the memory grid.
struct HistoryWeights {
  std::vector<double> c;          // w_k mu_k
  std::vector<double> c_drop;     // c_k - c_{k+1}, c_{Ns+1} = 0
  std::vector<double> w_dmu;      // w_k mu'_k
};

HistoryWeights history_weights(const MemoryGrid& m) {
  HistoryWeights hw;
  hw.c = m.c;
  hw.c_drop.resize(m.c.size());
  hw.w_dmu.resize(m.c.size());
  for (std::size_t k = 0; k < m.c.size(); ++k) {
    hw.c_drop[k] = m.c[k] - (k + 1 < m.c.size() ? m.c[k + 1] : 0.0);
    hw.w_dmu[k] = m.weights[k] * m.dmu[k];
  }
  return hw;
}

Eigen::VectorXd combination(const System& sys, const State& st, int lag, Backend backend) {
  Eigen::VectorXd out(sys.nx());
  column_combination(backend, st.eta, sys.memory.c, lag, out.data());
  return out;
}

Eigen::VectorXd velocity_rate(const System& sys, const State& st) {
  const auto& ops = sys.ops;
  const auto& p = sys.params;
  return -(ops.bih * st.u) - 2.0 * (ops.damping * st.v) - 2.0 * p.kappa * (ops.d1 * st.v) +
         p.kappa * p.kappa * (ops.lap * st.u) - p.beta * (ops.d1 * st.theta);
}

Eigen::VectorXd temperature_rate(const System& sys, const State& st, const Eigen::VectorXd& flux) {
  const auto& ops = sys.ops;
  return sys.params.l * (ops.lap * st.theta) + ops.lap * flux - sys.params.beta * (ops.d1 * st.v);
}

void require_shape(const System& sys, const State& st) {
  if (st.nx() != sys.nx() || st.ns() != sys.ns())
    throw Error(ErrorKind::DimensionMismatch, "state", "state does not match the system grids");
}

}  // namespace

double energy(const System& sys, const State& st, Backend backend) {
  require_shape(sys, st);
  const auto& ops = sys.ops;
  const double k2 = sys.params.kappa * sys.params.kappa;
  const double mech = st.u.dot(ops.bih * st.u) + k2 * grad_sq(ops, st.u) + st.v.squaredNorm();
  const double hist = gradient_energy(backend, st.eta, sys.memory.c, sys.h());
  return 0.5 * sys.h() * (mech + st.theta.squaredNorm() + hist);
}

DissipationBreakdown dissipation_breakdown(const System& sys, const State& st, Backend backend) {
  require_shape(sys, st);
  const double h = sys.h();
  const auto hw = history_weights(sys.memory);
  DissipationBreakdown d;
  const auto& g = sys.coefficients.g_values;
  double damp = 0.0;
  for (int i = 0; i < sys.nx(); ++i) damp += g[static_cast<std::size_t>(i) + 1] * st.v[i] * st.v[i];
  d.damping = -2.0 * h * damp;
  d.conduction = -sys.params.l * h * grad_sq(sys.ops, st.theta);
  const double drop = gradient_energy(backend, st.eta, hw.c_drop, h);
  const double jumps = gradient_energy_of_differences(backend, st.eta, hw.c, h);
  d.memory_upwind = -0.5 * h / sys.memory.ds * (drop + jumps);
  d.memory_analytic = 0.5 * h * gradient_energy(backend, st.eta, hw.w_dmu, h);
  return d;
}

double dissipation(const System& sys, const State& st, Backend backend) {
  return dissipation_breakdown(sys, st, backend).total();
}

MechanicalRates generator_rates(const System& sys, const State& st, Backend backend) {
  require_shape(sys, st);
  MechanicalRates r;
  r.u = st.v;
  r.v = velocity_rate(sys, st);
  r.theta = temperature_rate(sys, st, combination(sys, st, 0, backend));
  return r;
}

double lyap_F1(const System& sys, const State& st) {
  require_shape(sys, st);
  const auto& g = sys.coefficients.g_values;
  double acc = st.u.dot(st.v);
  for (int i = 0; i < sys.nx(); ++i) acc += g[static_cast<std::size_t>(i) + 1] * st.u[i] * st.u[i];
  return sys.h() * acc;
}

double lyap_F2(const System& sys, const State& st, Backend backend) {
  require_shape(sys, st);
  return -sys.h() * st.theta.dot(combination(sys, st, 0, backend));
}

double lyap_I(const System& sys, const State& st, Backend backend) {
  require_shape(sys, st);
  const Eigen::VectorXd flux = combination(sys, st, 0, backend);
  return -sys.h() * temperature_rate(sys, st, flux).dot(flux);
}

// ------------------------------------------------------------ multipliers

MultiplierConfig choose_multipliers(const PhysicalParams& params, const KernelReport& kernel,
                                    const CoefficientField& coefficients, double Cp, const MultiplierOptions& o) {
  auto infeasible = [](const std::string& what, const std::string& msg) {
    throw Error(ErrorKind::InfeasibleMultipliers, what, msg);
  };
  if (!kernel.passed()) infeasible("kernel", "kernel hypotheses not certified");
  if (!(kernel.mu0 > 1e-14)) infeasible("mu0", "kernel mass is degenerate");
  if (!(kernel.delta1 > 0.0)) infeasible("delta1", "delta1 must be > 0");
  if (!(Cp > 0.0)) infeasible("Cp", "Poincare constant must be > 0");
  if (!(o.N1 > 0.0)) infeasible("N1", "N1 must be > 0");
  if (!(params.kappa > 0.0)) infeasible("kappa", "the multiplier bounds need kappa > 0");

  MultiplierConfig m;
  m.mu0 = kernel.mu0;
  m.delta1 = kernel.delta1;
  m.sigma1 = o.sigma1;
  m.sigma2 = o.sigma2;
  m.sigma3 = o.sigma3.value_or(kernel.mu0);
  m.sigma = o.sigma;
  m.N1 = o.N1;
  m.Ckappa = o.Ckappa;
  m.Cp = Cp;
  if (!(m.mu0 > 0.5 * m.sigma3)) infeasible("sigma3", "mu0 > sigma3 / 2 is required");

  const double beta = params.beta, kappa = params.kappa, l = params.l;
  const double mu0 = m.mu0, d1 = m.delta1;
  const double margin = 1.0 + o.slack;
  m.C1 = beta * mu0 * m.sigma2 / 2.0;
  m.C2 = l * mu0 * m.sigma1 / 2.0;
  m.C3 = l / (2.0 * m.sigma1 * d1) + mu0 * beta / (2.0 * m.sigma2 * d1) + l * mu0 / d1;

  const double n2_bound = m.N1 * beta * beta / (2.0 * kappa * kappa * (mu0 - 0.5 * m.sigma3));
  m.N2 = n2_bound > 0.0 ? margin * n2_bound : 1.0;

  m.zeta1 = std::max(m.sigma * Cp / (kappa * kappa) + 2.0 * coefficients.alpha4 * Cp, 1.0 / (2.0 * m.sigma));
  m.zeta2 = std::max(mu0 / 2.0, 0.5);
  m.gamma0 = m.N1 * m.zeta1 + m.N2 * m.zeta2;

  const double n_bound = std::max({(m.Ckappa * m.N1 + m.C1 * m.N2) / (2.0 * coefficients.alpha3), m.N2 * m.C2 / l,
                                   2.0 * m.N2 * (m.C3 + Cp / (2.0 * m.sigma3)), m.gamma0});
  m.N = margin * n_bound;
  m.gamma1 = m.N - m.gamma0;
  m.gamma2 = m.N + m.gamma0;

  const double c1 = 2.0 * coefficients.alpha3 * m.N - m.Ckappa * m.N1 - m.C1 * m.N2;
  const double c3 = m.N / 2.0 - m.N2 * (m.C3 + Cp / (2.0 * m.sigma3));
  const double c4 = m.N2 * (mu0 - m.sigma3 / 2.0) - m.N1 * beta * beta / (2.0 * kappa * kappa);
  m.lambda = 2.0 * std::min({m.N1 / 4.0, c1, c4, c3 * d1});
  m.gamma_theory = m.lambda / m.gamma2;
  m.K_theory = m.gamma2 / m.gamma1;

  validate_multipliers(m, params, coefficients);
  return m;
}

void validate_multipliers(const MultiplierConfig& m, const PhysicalParams& params, const CoefficientField& coefficients) {
  auto need = [](bool ok, const char* what, const char* msg) {
    if (!ok) throw Error(ErrorKind::InfeasibleMultipliers, what, msg);
  };
  const double beta = params.beta, kappa = params.kappa, l = params.l;
  need(m.Ckappa >= 5.0, "Ckappa", "Ckappa >= 5 is required");
  need(m.mu0 > 0.5 * m.sigma3, "sigma3", "mu0 > sigma3 / 2 is required");
  need(m.N1 > 0.0, "N1", "N1 > 0 is required");
  need(kappa > 0.0, "kappa", "kappa > 0 is required");
  need(m.N2 > m.N1 * beta * beta / (2.0 * kappa * kappa * (m.mu0 - 0.5 * m.sigma3)), "N2", "N2 below its lower bound");
  need(m.N > (m.Ckappa * m.N1 + m.C1 * m.N2) / (2.0 * coefficients.alpha3), "N", "N below the damping bound");
  need(m.N > m.N2 * m.C2 / l, "N", "N below the conduction bound");
  need(m.N > 2.0 * m.N2 * (m.C3 + m.Cp / (2.0 * m.sigma3)), "N", "N below the memory bound");
  need(m.gamma1 > 0.0, "gamma1", "N - gamma0 must be > 0");
  need(m.lambda > 0.0, "lambda", "derived decay constant is not positive");
}

double lyapunov_total(const System& sys, const State& st, const MultiplierConfig& m, Backend backend) {
  return m.N * energy(sys, st, backend) + m.N1 * lyap_F1(sys, st) + m.N2 * lyap_F2(sys, st, backend);
}

// ---------------------------------------------------------- diagnostics

Snapshot snapshot(const System& sys, const State& st, const MultiplierConfig* m, Backend backend) {
  require_shape(sys, st);
  const auto& ops = sys.ops;
  const auto& mem = sys.memory;
  const double h = sys.h();
  const auto hw = history_weights(mem);

  Snapshot s;
  s.t = st.t;
  s.bending = h * st.u.dot(ops.bih * st.u);
  s.slope = h * grad_sq(ops, st.u);
  s.velocity = h * st.v.squaredNorm();
  s.temperature = h * st.theta.squaredNorm();
  s.temperature_x = h * grad_sq(ops, st.theta);

  const double hist = h * gradient_energy(backend, st.eta, hw.c, h);
  const double k2 = sys.params.kappa * sys.params.kappa;
  s.E = 0.5 * (s.bending + k2 * s.slope + s.velocity + s.temperature + hist);

  s.D = dissipation_breakdown(sys, st, backend);
  s.memory_prime = 2.0 * s.D.memory_analytic;

  const Eigen::VectorXd flux = combination(sys, st, 0, backend);
  const Eigen::VectorXd flux_lag = combination(sys, st, 1, backend);
  const Eigen::VectorXd vdot = velocity_rate(sys, st);
  const Eigen::VectorXd thdot = temperature_rate(sys, st, flux);

  s.F1 = lyap_F1(sys, st);
  s.F2 = -h * st.theta.dot(flux);
  s.I = -h * thdot.dot(flux);

  const auto& g = sys.coefficients.g_values;
  double guv = 0.0;
  for (int i = 0; i < sys.nx(); ++i) guv += g[static_cast<std::size_t>(i) + 1] * st.u[i] * st.v[i];
  s.dF1 = h * (st.v.squaredNorm() + st.u.dot(vdot) + 2.0 * guv);
  // sum_k c_k d/dt eta_k = (sum c) theta - (flux - flux_lag) / ds
  s.dF2 = s.I - h * (mem.c_sum() * st.theta.squaredNorm() - st.theta.dot(flux - flux_lag) / mem.ds);

  if (m) s.L = m->N * s.E + m->N1 * s.F1 + m->N2 * s.F2;
  return s;
}

LemmaMargins lemma_margins(const Snapshot& s, const MultiplierConfig& m, const PhysicalParams& p) {
  LemmaMargins r;
  const double k2 = p.kappa * p.kappa;
  const double f1_bound = -s.bending - 0.25 * k2 * s.slope + m.Ckappa * s.velocity +
                          (k2 > 0.0 ? p.beta * p.beta / (2.0 * k2) * s.temperature
                                    : std::numeric_limits<double>::infinity());
  r.f1 = f1_bound - s.dF1;
  r.i = m.C1 * s.velocity + m.C2 * s.temperature_x - m.C3 * s.memory_prime - s.I;
  r.f2 = m.C1 * s.velocity + m.C2 * s.temperature_x + (m.sigma3 / 2.0 - m.mu0) * s.temperature -
         (m.C3 + m.Cp / (2.0 * m.sigma3)) * s.memory_prime - s.dF2;
  r.lower = s.L - m.gamma1 * s.E;
  r.upper = m.gamma2 * s.E - s.L;
  return r;
}

// ----------------------------------------------------------- certifiers

DissipativityReport check_dissipativity(const GeneratorAssembly& a, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "n_samples", "need at least one sample");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Eigen::Index n = a.layout.dim();
  Eigen::VectorXd phi(n), aphi(n);
  DissipativityReport r;
  r.samples = n_samples;
  r.seed = seed;
  r.worst_ratio = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) phi[i] = normal(rng);
    aphi.noalias() = a.generator * phi;
    const Eigen::VectorXd hphi = a.metric * phi;
    r.worst_ratio = std::max(r.worst_ratio, hphi.dot(aphi) / hphi.dot(phi));
  }
  return r;
}

namespace {

SpectrumReport dense_spectrum(const SparseMatrix& A) {
  const Eigen::MatrixXd dense(A);
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolveFailed, "A_h", "dense eigensolve did not converge");
  SpectrumReport r;
  const auto& ev = es.eigenvalues();
  r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  return r;
}

SpectrumReport krylov_spectrum(const SparseMatrix& A, int m) {
  // shift-invert Arnoldi at the origin: Ritz values of A^{-1} nearest infinity
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::EigensolveFailed, "A_h", "factorization for shift-invert failed");
  const Eigen::Index n = A.rows();
  m = static_cast<int>(std::min<Eigen::Index>(m, n - 1));
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < n; ++i) V(i, 0) = normal(rng);
  V.col(0).normalize();
  int steps = m;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd w = lu.solve(V.col(j));
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        const double hij = V.col(i).dot(w);
        H(i, j) += hij;
        w -= hij * V.col(i);
      }
    H(j + 1, j) = w.norm();
    if (H(j + 1, j) < 1e-12) {
      steps = j + 1;
      break;
    }
    V.col(j + 1) = w / H(j + 1, j);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(steps, steps), true);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolveFailed, "A_h", "Ritz eigensolve failed");
  SpectrumReport r;
  r.estimated = true;
  const double beta = H(steps, steps - 1);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const std::complex<double> theta = es.eigenvalues()[k];
    if (std::abs(theta) < 1e-300) continue;
    const double residual = std::abs(beta * es.eigenvectors()(steps - 1, k));
    if (residual > 1e-6 * std::abs(theta)) continue;
    r.eigenvalues.push_back(1.0 / theta);
  }
  if (r.eigenvalues.empty()) throw Error(ErrorKind::EigensolveFailed, "A_h", "no Ritz value converged");
  return r;
}

}  // namespace

SpectrumReport spectral_abscissa(const GeneratorAssembly& a, int krylov_dim) {
  SpectrumReport r = a.layout.dim() <= kDenseLimit ? dense_spectrum(a.generator) : krylov_spectrum(a.generator, krylov_dim);
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](auto x, auto y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  r.abscissa = r.eigenvalues.back().real();
  return r;
}

ResolventReport resolvent_check(const GeneratorAssembly& a) {
  const Eigen::Index n = a.layout.dim();
  SparseMatrix id(n, n);
  id.setIdentity();
  const SparseMatrix M = id - a.generator;
  ResolventReport r;
  if (n <= kDenseLimit) {
    const Eigen::MatrixXd dense(M);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
    const double rc = lu.rcond();
    if (!(rc > 0.0) || !std::isfinite(rc))
      throw Error(ErrorKind::SingularResolvent, "I - A_h", "LU factorization is singular");
    r.condition_estimate = 1.0 / rc;
    r.dense = true;
    return r;
  }
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(M);
  lu.factorize(M);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::SingularResolvent, "I - A_h", "sparse LU failed");
  double norm1 = 0.0;
  for (int k = 0; k < M.outerSize(); ++k) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) col += std::abs(it.value());
    norm1 = std::max(norm1, col);
  }
  // Hager's estimator of |M^{-1}|_1
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double est = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd y = lu.solve(x);
    est = y.lpNorm<1>();
    const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Eigen::VectorXd z = lu.transpose().solve(xi);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x)) break;
    x.setZero();
    x[j] = 1.0;
  }
  if (!std::isfinite(est)) throw Error(ErrorKind::SingularResolvent, "I - A_h", "inverse norm estimate is not finite");
  r.condition_estimate = norm1 * est;
  r.dense = false;
  return r;
}

// ------------------------------------------------------------ decay fit

namespace {

struct Line {
  double slope = 0.0, intercept = 0.0, r2 = 1.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  Line l;
  l.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  l.intercept = my - l.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (l.intercept + l.slope * x[i]);
    ss_res += e * e;
  }
  l.r2 = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return l;
}

}  // namespace

DecayFit fit_decay(std::span<const double> t, std::span<const double> E, double t1, double t2, FitMethod method) {
  if (t.size() != E.size() || t.empty()) throw Error(ErrorKind::DimensionMismatch, "trajectory", "t and E differ in length");
  std::vector<double> xs, ys;
  std::size_t in_window = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t1 - 1e-12 || t[i] > t2 + 1e-12) continue;
    ++in_window;
    if (E[i] > 1e-300) {
      xs.push_back(t[i]);
      ys.push_back(std::log(E[i]));
    }
  }
  constexpr std::size_t kMinPoints = 10;
  if (xs.size() < kMinPoints) {
    if (in_window >= kMinPoints)
      throw Error(ErrorKind::EnergyUnderflow, "E", "fewer than 10 window samples have E > 1e-300");
    throw Error(ErrorKind::WindowTooSmall, "window", "fewer than 10 samples inside the fit window");
  }
  const double e0 = E[0];
  if (!(e0 > 0.0)) throw Error(ErrorKind::EnergyUnderflow, "E(0)", "initial energy is zero");

  Line line = least_squares(xs, ys);
  DecayFit fit;
  fit.t1 = t1;
  fit.t2 = t2;
  fit.method = FitMethod::plain_lsq;
  fit.points = static_cast<int>(xs.size());

  if (method == FitMethod::peak_envelope) {
    std::vector<double> px, py;
    auto resid = [&](std::size_t i) { return ys[i] - (line.intercept + line.slope * xs[i]); };
    for (std::size_t i = 1; i + 1 < xs.size(); ++i)
      if (resid(i) > resid(i - 1) && resid(i) >= resid(i + 1)) {
        px.push_back(xs[i]);
        py.push_back(ys[i]);
      }
    if (px.size() >= 3) {
      line = least_squares(px, py);
      fit.method = FitMethod::peak_envelope;
      fit.points = static_cast<int>(px.size());
    }
  }
  fit.gamma_fit = -line.slope;
  fit.K_fit = std::exp(line.intercept) / e0;
  fit.r2 = line.r2;
  return fit;
}

std::string_view to_string(FitMethod m) { return m == FitMethod::plain_lsq ? "plain_lsq" : "peak_envelope"; }

}  // namespace thermobeam
