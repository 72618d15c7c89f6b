#include "thermobeam/stepper.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

namespace thermobeam {

std::string_view to_string(Scheme s) {
  return s == Scheme::full_implicit_midpoint ? "full_implicit_midpoint" : "split_semilagrangian";
}

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

void add_block(std::vector<Triplet>& t, const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0, double scale) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

/// (u, v, theta) block with the instantaneous part of the memory flux.
SparseMatrix mechanical_block(const System& sys, double dt) {
  const auto& ops = sys.ops;
  const auto& p = sys.params;
  const int n = sys.nx();
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) t.emplace_back(i, n + i, 1.0);
  add_block(t, ops.bih, n, 0, -1.0);
  add_block(t, ops.lap, n, 0, p.kappa * p.kappa);
  add_block(t, ops.damping, n, n, -2.0);
  add_block(t, ops.d1, n, n, -2.0 * p.kappa);
  add_block(t, ops.d1, n, 2 * n, -p.beta);
  add_block(t, ops.d1, 2 * n, n, -p.beta);
  add_block(t, ops.lap, 2 * n, 2 * n, p.l + 0.5 * dt * sys.memory.c_sum());
  SparseMatrix m(3 * n, 3 * n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

double inf_norm(const SparseMatrix& m) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

struct Stepper::Impl {
  SparseMatrix lhs, rhs;
  double lhs_norm = 0.0;
  Eigen::SparseLU<SparseMatrix> lu;
  SparseMatrix lap;
  // scratch for the split step
  mutable Eigen::VectorXd x, b, flux, theta_bar;
};

Stepper::Stepper(const System& system, SchemeConfig config)
    : system_(&system), config_(config), impl_(std::make_unique<Impl>()) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw Error(ErrorKind::InvalidArgument, "dt", "dt must be > 0");
  const double dt = config.dt;
  if (config.scheme == Scheme::split_semilagrangian) {
    const double ds = system.memory.ds;
    if (std::abs(ds - dt) > 1e-12 * dt)
      throw Error(ErrorKind::InconsistentGrid, "ds", "split scheme needs ds == dt (ds = " + std::to_string(ds) +
                                                         ", dt = " + std::to_string(dt) + ")");
    const SparseMatrix m = mechanical_block(system, dt);
    impl_->lhs = identity(m.rows()) - 0.5 * dt * m;
    impl_->rhs = identity(m.rows()) + 0.5 * dt * m;
    impl_->lap = system.ops.lap;
  } else {
    const GeneratorAssembly a = assemble_generator(system);
    impl_->lhs = identity(a.layout.dim()) - 0.5 * dt * a.generator;
    impl_->rhs = identity(a.layout.dim()) + 0.5 * dt * a.generator;
  }
  impl_->lhs.makeCompressed();
  impl_->lhs_norm = inf_norm(impl_->lhs);
  impl_->lu.analyzePattern(impl_->lhs);
  impl_->lu.factorize(impl_->lhs);
  if (impl_->lu.info() != Eigen::Success)
    throw Error(ErrorKind::LinearSolveFailure, "factorization", "LU factorization of the step matrix failed");
}

Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;
Stepper& Stepper::operator=(Stepper&&) noexcept = default;

namespace {


/// Direct solve plus refinement; the residual is measured as the normwise
/// backward error |b - Mx| / (|M| |x| + |b|) in the max norm.
Eigen::VectorXd solve_refined(const Eigen::SparseLU<SparseMatrix>& lu, const SparseMatrix& lhs, double lhs_norm,
                              const Eigen::VectorXd& b, const SchemeConfig& cfg) {
  const double bnorm = b.lpNorm<Eigen::Infinity>();
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd x = lu.solve(b);
  auto backward_error = [&] {
    return (b - lhs * x).lpNorm<Eigen::Infinity>() / (lhs_norm * x.lpNorm<Eigen::Infinity>() + bnorm);
  };
  double err = backward_error();
  for (int it = 0; it < cfg.max_linear_iters && err > cfg.linear_solver_tol; ++it) {
    x += lu.solve(Eigen::VectorXd(b - lhs * x));
    err = backward_error();
  }
  if (!(err <= cfg.linear_solver_tol)) {
    std::ostringstream os;
    os << "backward error " << err << " above tolerance " << cfg.linear_solver_tol;
    throw Error(ErrorKind::LinearSolveFailure, "step", os.str());
  }
  return x;
}

}  // namespace

void Stepper::advance(State& st) const {
  const System& sys = *system_;
  const int n = sys.nx();
  if (st.nx() != n || st.ns() != sys.ns())
    throw Error(ErrorKind::DimensionMismatch, "state", "state does not match the stepper's system");
  const double dt = config_.dt;
  auto& w = *impl_;

  if (config_.scheme == Scheme::full_implicit_midpoint) {
    const Eigen::VectorXd phi = st.flatten();
    const Eigen::VectorXd next = solve_refined(w.lu, w.lhs, w.lhs_norm, w.rhs * phi, config_);
    const double t = st.t + dt;
    st = State::unflatten(next, n, sys.ns(), t);
    return;
  }

  w.x.resize(3 * n);
  w.x << st.u, st.v, st.theta;
  w.flux.resize(n);
  column_combination(config_.backend, st.eta, sys.memory.c, 1, w.flux.data());
  w.b = w.rhs * w.x;
  w.b.segment(2 * n, n) += dt * (w.lap * w.flux);
  const Eigen::VectorXd next = solve_refined(w.lu, w.lhs, w.lhs_norm, w.b, config_);

  w.theta_bar = 0.5 * (st.theta + next.segment(2 * n, n));
  st.u = next.segment(0, n);
  st.v = next.segment(n, n);
  st.theta = next.segment(2 * n, n);
  st.eta.shift_in();
  add_to_all_columns(config_.backend, st.eta, w.theta_bar.data(), dt);
  st.t += dt;
}

std::vector<DiagnosticsRecord> make_records(const std::vector<Snapshot>& samples) {
  std::vector<DiagnosticsRecord> out(samples.size());
  const std::size_t n = samples.size();
  auto t = [&](std::size_t i) { return samples[i].t; };
  auto e = [&](std::size_t i) { return samples[i].E; };
  // derivative at x0 of the quadratic through (x0,y0), (x1,y1), (x2,y2)
  auto quad = [](double x0, double y0, double x1, double y1, double x2, double y2) {
    const double h1 = x1 - x0, h2 = x2 - x0;
    return ((y1 - y0) * h2 * h2 - (y2 - y0) * h1 * h1) / (h1 * h2 * (h2 - h1));
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Snapshot& s = samples[i];
    DiagnosticsRecord& r = out[i];
    r.t = s.t;
    r.E = s.E;
    r.D = s.D.total();
    r.F1 = s.F1;
    r.F2 = s.F2;
    r.I = s.I;
    r.L = s.L;
    if (n == 1) {
      r.dE_numeric = std::numeric_limits<double>::quiet_NaN();
    } else if (n == 2) {
      r.dE_numeric = (e(1) - e(0)) / (t(1) - t(0));
    } else if (i == 0) {
      r.dE_numeric = quad(t(0), e(0), t(1), e(1), t(2), e(2));
    } else if (i + 1 == n) {
      r.dE_numeric = quad(t(i), e(i), t(i - 1), e(i - 1), t(i - 2), e(i - 2));
    } else {
      r.dE_numeric = quad(t(i), e(i), t(i - 1), e(i - 1), t(i + 1), e(i + 1));
    }
    r.identity_residual = std::abs(r.dE_numeric - r.D);
  }
  return out;
}

SimulationResult simulate(const System& system, const State& init, const SchemeConfig& config,
                          const SimulationOptions& options) {
  if (!(options.T >= 0.0)) throw Error(ErrorKind::InvalidArgument, "T", "T must be >= 0");
  if (options.sample_every < 1) throw Error(ErrorKind::InvalidArgument, "sample_every", "sample_every must be >= 1");
  const double ratio = options.T / config.dt;
  const long steps = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-8 * std::max(1.0, ratio))
    throw Error(ErrorKind::InvalidArgument, "T", "T must be a whole number of time steps");

  SimulationResult res;
  res.steps = steps;
  State st = init;
  auto record = [&](long step) {
    Snapshot s = snapshot(system, st, options.multipliers, config.backend);
    s.t = static_cast<double>(step) * config.dt + init.t;
    res.samples.push_back(s);
    if (options.observer) options.observer(st, s);
  };
  record(0);
  if (steps > 0) {
    const Stepper stepper(system, config);
    for (long k = 1; k <= steps; ++k) {
      try {
        stepper.advance(st);
      } catch (const Error& e) {
        res.failure = Error(e.kind(), e.subject(), e.message() + " at step " + std::to_string(k));
        res.failed_step = k;
        break;
      }
      if (k % options.sample_every == 0 || k == steps) record(k);
    }
  }
  st.t = res.samples.back().t;
  res.records = make_records(res.samples);
  res.final_state = std::move(st);
  return res;
}

// ---------------------------------------------------------------- oracle

struct Oracle::Impl {
  Eigen::Index dim = 0;
  bool fallback = false;
  double cond = 0.0;
  Eigen::MatrixXcd V;
  Eigen::VectorXcd lambda;
  Eigen::PartialPivLU<Eigen::MatrixXcd> Vlu;
  Eigen::MatrixXd A;
};

namespace {
constexpr Eigen::Index kOracleLimit = 2000;
}

Oracle::Oracle(const GeneratorAssembly& assembly, double cond_limit) : impl_(std::make_unique<Impl>()) {
  const Eigen::Index n = assembly.layout.dim();
  if (n > kOracleLimit)
    throw Error(ErrorKind::DimensionTooLarge, "oracle", "dimension " + std::to_string(n) + " exceeds 2000");
  auto& w = *impl_;
  w.dim = n;
  w.A = Eigen::MatrixXd(assembly.generator);
  Eigen::EigenSolver<Eigen::MatrixXd> es(w.A, true);
  if (es.info() != Eigen::Success) {
    w.fallback = true;
    w.cond = std::numeric_limits<double>::infinity();
    return;
  }
  w.V = es.eigenvectors();
  w.lambda = es.eigenvalues();
  w.Vlu.compute(w.V);
  const double rc = w.Vlu.rcond();
  w.cond = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  const double residual = (w.A.cast<std::complex<double>>() * w.V - w.V * w.lambda.asDiagonal()).norm();
  const double scale = std::max(1.0, w.A.norm());
  if (w.cond > cond_limit || residual > 1e-8 * scale) w.fallback = true;
}

Oracle::~Oracle() = default;
Oracle::Oracle(Oracle&&) noexcept = default;

bool Oracle::uses_fallback() const { return impl_->fallback; }
double Oracle::eigenvector_condition() const { return impl_->cond; }

Eigen::VectorXd Oracle::evolve(const Eigen::VectorXd& phi0, double t) const {
  const auto& w = *impl_;
  if (phi0.size() != w.dim) throw Error(ErrorKind::DimensionMismatch, "phi0", "initial vector has the wrong length");
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "t", "t must be >= 0");
  if (t == 0.0) return phi0;
  if (w.fallback) {
    const Eigen::MatrixXd E = (t * w.A).exp();
    return E * phi0;
  }
  const Eigen::VectorXcd coeffs = w.Vlu.solve(phi0.cast<std::complex<double>>());
  const Eigen::VectorXcd scaled = (t * w.lambda).array().exp() * coeffs.array();
  return (w.V * scaled).real();
}

Eigen::VectorXd oracle_evolve(const GeneratorAssembly& assembly, const Eigen::VectorXd& phi0, double t) {
  if (assembly.layout.dim() > kOracleLimit)
    throw Error(ErrorKind::DimensionTooLarge, "oracle", "dimension exceeds 2000");
  if (t == 0.0) return phi0;
  return Oracle(assembly).evolve(phi0, t);
}

}  // namespace thermobeam
