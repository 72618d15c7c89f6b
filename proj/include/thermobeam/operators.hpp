#pragma once

#include <Eigen/SparseCore>

#include "thermobeam/grid.hpp"

namespace thermobeam {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Difference operators on the interior nodes. Boundary values are zero and
/// eliminated; the clamped second difference reflects the ghost node.
struct DiscreteOperators {
  double h = 0.0;
  SparseMatrix d1;       // centered first difference, skew
  SparseMatrix grad;     // forward difference to the Nx+1 midpoints
  SparseMatrix d2;       // clamped second difference on x_0..x_{Nx+1}
  SparseMatrix lap;      // -grad^T grad, three-point Dirichlet stencil
  SparseMatrix bih;      // d2^T diag(w p) d2
  SparseMatrix damping;  // diag(g) on interior nodes
};

/// Verifies skewness of d1, symmetry of lap and bih, and lap == -grad^T grad
/// to 1e-12 (StructureViolation otherwise).
DiscreteOperators build_operators(const SpatialGrid& grid, const CoefficientField& coefficients);

/// 1 / lambda_min(-lap), the sharp discrete Poincare constant.
double poincare_constant(const SpatialGrid& grid);

}  // namespace thermobeam
