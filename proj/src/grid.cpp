#include "thermobeam/grid.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace thermobeam {

std::vector<double> SpatialGrid::closed_nodes() const {
  std::vector<double> xs(static_cast<std::size_t>(nx) + 2);
  for (int i = 0; i < nx + 2; ++i) xs[static_cast<std::size_t>(i)] = i * h;
  xs.back() = length;
  return xs;
}

SpatialGrid build_spatial_grid(double length, int nx) {
  if (!(length > 0.0) || !std::isfinite(length))
    throw Error(ErrorKind::InvalidArgument, "L", "beam length must be > 0");
  if (nx < 4) throw Error(ErrorKind::GridTooCoarse, "Nx", "Nx = " + std::to_string(nx) + " is below the minimum of 4");
  SpatialGrid g;
  g.length = length;
  g.nx = nx;
  g.h = length / (nx + 1);
  g.nodes.resize(static_cast<std::size_t>(nx));
  for (int i = 0; i < nx; ++i) g.nodes[static_cast<std::size_t>(i)] = (i + 1) * g.h;
  return g;
}

double MemoryGrid::c_sum() const { return std::accumulate(c.begin(), c.end(), 0.0); }

namespace {

constexpr int kMaxHistoryNodes = 50'000'000;

double kernel_mass(const MemoryKernel& kernel) {
  return validate_kernel(kernel, 64).mu0;
}

MemoryGrid fill(const MemoryKernel& kernel, double ds, int ns) {
  MemoryGrid m;
  m.ns = ns;
  m.ds = ds;
  m.s_max = ns * ds;
  const auto n = static_cast<std::size_t>(ns);
  m.s.resize(n);
  m.weights.assign(n, ds);
  m.weights.back() = 0.5 * ds;
  m.mu.resize(n);
  m.dmu.resize(n);
  m.c.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    m.s[k] = static_cast<double>(k + 1) * ds;
    m.mu[k] = kernel.value(m.s[k]);
    m.dmu[k] = kernel.derivative(m.s[k]);
    m.c[k] = m.weights[k] * m.mu[k];
  }
  m.mass_quadrature = 0.5 * ds * kernel.value(0.0) + m.c_sum();
  m.mass_error = std::abs(m.mass_quadrature - kernel_mass(kernel));
  return m;
}

}  // namespace

MemoryGrid build_memory_grid(const MemoryKernel& kernel, double dt, double trunc_tol) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt", "dt must be > 0");
  if (!(trunc_tol > 0.0 && trunc_tol < 1.0))
    throw Error(ErrorKind::InvalidArgument, "trunc_tol", "trunc_tol must lie in (0, 1)");

  const double target = trunc_tol * kernel.value(0.5 * dt);
  const double s_end = kernel.support_end();

  int ns = 1;
  if (kernel.form() == MemoryKernel::Form::prony) {
    // start from the slowest-rate estimate, then correct by stepping
    const auto& rates = kernel.rates();
    double rmin = rates.front();
    for (double r : rates) rmin = std::min(rmin, r);
    if (rmin > 0.0) {
      const double guess = std::log(kernel.value(0.0) / target) / rmin;
      ns = std::max(1, static_cast<int>(std::floor(guess / dt)) - 2);
    }
    while (ns > 1 && kernel.value((ns - 1) * dt) <= target) --ns;
  }
  while (kernel.value(ns * dt) > target) {
    ++ns;
    if (ns > kMaxHistoryNodes || ns * dt > s_end * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "mu(s) stays above " << target << " up to s = " << std::min(ns * dt, s_end);
      throw Error(ErrorKind::TruncationUnreachable, "trunc_tol", os.str());
    }
  }
  return fill(kernel, dt, ns);
}

MemoryGrid build_memory_grid_fixed(const MemoryKernel& kernel, double ds, int ns) {
  if (!(ds > 0.0)) throw Error(ErrorKind::InvalidArgument, "ds", "ds must be > 0");
  if (ns < 1) throw Error(ErrorKind::InvalidArgument, "Ns", "Ns must be >= 1");
  if (ns * ds > kernel.support_end() * (1.0 + 1e-12))
    throw Error(ErrorKind::TruncationUnreachable, "Ns", "s-grid extends past the kernel table");
  return fill(kernel, ds, ns);
}

}  // namespace thermobeam
