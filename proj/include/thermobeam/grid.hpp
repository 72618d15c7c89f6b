#pragma once

#include <vector>

#include "thermobeam/model.hpp"

namespace thermobeam {

/// Uniform grid on [0, L]; only the Nx interior nodes x_i = i h carry unknowns.
struct SpatialGrid {
  double length = 0.0;
  int nx = 0;
  double h = 0.0;
  std::vector<double> nodes;  // interior x_1..x_Nx

  /// x_0..x_{Nx+1}, where coefficient fields are sampled.
  std::vector<double> closed_nodes() const;
};

SpatialGrid build_spatial_grid(double length, int nx);

/// History nodes s_k = k ds, k = 1..Ns. The inflow node s = 0 carries eta = 0
/// and is not stored. Trapezoid weights: ds, with ds/2 on the last node.
struct MemoryGrid {
  int ns = 0;
  double ds = 0.0;
  double s_max = 0.0;
  std::vector<double> s;
  std::vector<double> weights;
  std::vector<double> mu;
  std::vector<double> dmu;
  std::vector<double> c;  // weights[k] * mu[k]
  double mass_quadrature = 0.0;
  double mass_error = 0.0;  // |mass_quadrature - mu0|

  double c_sum() const;
};

/// Ns is the smallest count with mu(Ns ds) <= trunc_tol * mu(ds / 2), ds = dt.
MemoryGrid build_memory_grid(const MemoryKernel& kernel, double dt, double trunc_tol);

/// Fixed s-grid, no truncation rule.
MemoryGrid build_memory_grid_fixed(const MemoryKernel& kernel, double ds, int ns);

}  // namespace thermobeam
