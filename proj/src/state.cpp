#include "thermobeam/state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace thermobeam {

HistoryField::HistoryField(int nx, int ns)
    : nx_(nx), ns_(ns), data_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ns), 0.0) {
  if (nx < 1 || ns < 1) throw Error(ErrorKind::DimensionMismatch, "eta", "history field needs nx, ns >= 1");
}

void HistoryField::shift_in() {
  head_ = (head_ + ns_ - 1) % ns_;
  std::fill_n(column(0), nx_, 0.0);
}

void HistoryField::set_zero() {
  std::fill(data_.begin(), data_.end(), 0.0);
  head_ = 0;
}

Eigen::VectorXd State::flatten() const {
  const int n = nx();
  Eigen::VectorXd phi(static_cast<Eigen::Index>(n) * (3 + ns()));
  phi.segment(0, n) = u;
  phi.segment(n, n) = v;
  phi.segment(2 * n, n) = theta;
  for (int k = 0; k < ns(); ++k) phi.segment(static_cast<Eigen::Index>(3 + k) * n, n) = eta.col(k);
  return phi;
}

State State::unflatten(const Eigen::VectorXd& phi, int nx, int ns, double t) {
  if (phi.size() != static_cast<Eigen::Index>(nx) * (3 + ns))
    throw Error(ErrorKind::DimensionMismatch, "phi", "state vector has the wrong length");
  State s;
  s.t = t;
  s.u = phi.segment(0, nx);
  s.v = phi.segment(nx, nx);
  s.theta = phi.segment(2 * nx, nx);
  s.eta = HistoryField(nx, ns);
  for (int k = 0; k < ns; ++k) s.eta.col(k) = phi.segment(static_cast<Eigen::Index>(3 + k) * nx, nx);
  return s;
}

State State::zero(int nx, int ns, double t) {
  State s;
  s.t = t;
  s.u = Eigen::VectorXd::Zero(nx);
  s.v = Eigen::VectorXd::Zero(nx);
  s.theta = Eigen::VectorXd::Zero(nx);
  s.eta = HistoryField(nx, ns);
  return s;
}

namespace {

constexpr double kBoundaryTol = 1e-10;

void require_zero(double value, const std::string& what) {
  if (std::abs(value) > kBoundaryTol) {
    std::ostringstream os;
    os << what << " = " << value << ", expected 0";
    throw Error(ErrorKind::IncompatibleBoundary, what, os.str());
  }
}

void check_clamped(const Profile& p, double length, const std::string& name) {
  require_zero(p.value(0.0), name + "(0)");
  require_zero(p.value(length), name + "(L)");
  require_zero(p.derivative(0.0), name + "'(0)");
  require_zero(p.derivative(length), name + "'(L)");
}

Eigen::VectorXd sample(const Profile& p, const SpatialGrid& grid) {
  const auto values = p.sample(grid.nodes);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

State build_initial_state(const InitialData& init, const SpatialGrid& grid, const MemoryGrid& memory) {
  check_clamped(init.u0, grid.length, "u0");
  check_clamped(init.v0, grid.length, "v0");
  require_zero(init.theta0.value(0.0), "theta0(0)");
  require_zero(init.theta0.value(grid.length), "theta0(L)");

  State s = State::zero(grid.nx, memory.ns);
  s.u = sample(init.u0, grid);
  s.v = sample(init.v0, grid);
  s.theta = sample(init.theta0, grid);

  switch (init.history) {
    case HistoryMode::zero: break;
    case HistoryMode::constant_past:
      for (int k = 0; k < memory.ns; ++k) s.eta.col(k) = memory.s[static_cast<std::size_t>(k)] * s.theta;
      break;
    case HistoryMode::explicit_history: {
      if (!init.eta0) throw Error(ErrorKind::InvalidArgument, "eta0", "explicit history requires eta0");
      for (int i = 0; i < grid.nx; ++i) require_zero(init.eta0(grid.nodes[static_cast<std::size_t>(i)], 0.0), "eta0(x, 0)");
      for (double x : {0.0, grid.length})
        for (int k = 0; k < memory.ns; k += std::max(1, memory.ns / 16))
          require_zero(init.eta0(x, memory.s[static_cast<std::size_t>(k)]), "eta0 at the beam ends");
      for (int k = 0; k < memory.ns; ++k) {
        auto col = s.eta.col(k);
        for (int i = 0; i < grid.nx; ++i)
          col[i] = init.eta0(grid.nodes[static_cast<std::size_t>(i)], memory.s[static_cast<std::size_t>(k)]);
      }
      break;
    }
  }
  return s;
}

}  // namespace thermobeam
