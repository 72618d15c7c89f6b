#include "thermobeam/operators.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <numbers>
#include <vector>

namespace thermobeam {

namespace {

using Triplet = Eigen::Triplet<double>;

double max_abs(const SparseMatrix& m) {
  double r = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

void require_small(const SparseMatrix& m, double scale, const char* what) {
  const double err = max_abs(m);
  if (err > 1e-12 * std::max(scale, 1.0))
    throw Error(ErrorKind::StructureViolation, what, std::string(what) + " violated by " + std::to_string(err));
}

}  // namespace

DiscreteOperators build_operators(const SpatialGrid& grid, const CoefficientField& coefficients) {
  const int n = grid.nx;
  const double h = grid.h;
  const auto closed = static_cast<std::size_t>(n) + 2;
  if (coefficients.p_values.size() != closed || coefficients.g_values.size() != closed)
    throw Error(ErrorKind::DimensionMismatch, "coefficients",
                "expected " + std::to_string(closed) + " closed-grid samples, got " +
                    std::to_string(coefficients.p_values.size()));

  DiscreteOperators ops;
  ops.h = h;
  std::vector<Triplet> t;

  t.clear();
  for (int i = 0; i < n; ++i) {
    if (i + 1 < n) t.emplace_back(i, i + 1, 0.5 / h);
    if (i > 0) t.emplace_back(i, i - 1, -0.5 / h);
  }
  ops.d1.resize(n, n);
  ops.d1.setFromTriplets(t.begin(), t.end());

  t.clear();
  for (int j = 0; j <= n; ++j) {
    if (j < n) t.emplace_back(j, j, 1.0 / h);
    if (j > 0) t.emplace_back(j, j - 1, -1.0 / h);
  }
  ops.grad.resize(n + 1, n);
  ops.grad.setFromTriplets(t.begin(), t.end());

  t.clear();
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, -2.0 / (h * h));
    if (i + 1 < n) t.emplace_back(i, i + 1, 1.0 / (h * h));
    if (i > 0) t.emplace_back(i, i - 1, 1.0 / (h * h));
  }
  ops.lap.resize(n, n);
  ops.lap.setFromTriplets(t.begin(), t.end());

  // rows 0 and n+1: u_xx at the clamped ends with ghost u_{-1} = u_1
  t.clear();
  const double h2 = h * h;
  t.emplace_back(0, 0, 2.0 / h2);
  t.emplace_back(n + 1, n - 1, 2.0 / h2);
  for (int r = 1; r <= n; ++r) {
    const int i = r - 1;
    t.emplace_back(r, i, -2.0 / h2);
    if (i > 0) t.emplace_back(r, i - 1, 1.0 / h2);
    if (i + 1 < n) t.emplace_back(r, i + 1, 1.0 / h2);
  }
  ops.d2.resize(n + 2, n);
  ops.d2.setFromTriplets(t.begin(), t.end());

  t.clear();
  for (int r = 0; r < n + 2; ++r) {
    const double w = (r == 0 || r == n + 1) ? 0.5 : 1.0;
    t.emplace_back(r, r, w * coefficients.p_values[static_cast<std::size_t>(r)]);
  }
  SparseMatrix weighted(n + 2, n + 2);
  weighted.setFromTriplets(t.begin(), t.end());
  ops.bih = SparseMatrix(ops.d2.transpose()) * weighted * ops.d2;
  ops.bih.prune(0.0);

  t.clear();
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, coefficients.g_values[static_cast<std::size_t>(i) + 1]);
  ops.damping.resize(n, n);
  ops.damping.setFromTriplets(t.begin(), t.end());

  const double scale2 = 1.0 / h2;
  require_small(SparseMatrix(ops.d1 + SparseMatrix(ops.d1.transpose())), 1.0 / h, "d1 skew-adjoint");
  require_small(SparseMatrix(ops.lap - SparseMatrix(ops.lap.transpose())), scale2, "lap self-adjoint");
  require_small(SparseMatrix(ops.lap + SparseMatrix(ops.grad.transpose()) * ops.grad), scale2, "lap = -grad^T grad");
  require_small(SparseMatrix(ops.bih - SparseMatrix(ops.bih.transpose())),
                scale2 * scale2 * coefficients.alpha2, "bih self-adjoint");
  Eigen::SimplicialLLT<SparseMatrix> chol(ops.bih);
  if (chol.info() != Eigen::Success)
    throw Error(ErrorKind::StructureViolation, "bih positive definite", "Cholesky factorization of bih failed");
  return ops;
}

double poincare_constant(const SpatialGrid& grid) {
  const double s = std::sin(std::numbers::pi * grid.h / (2.0 * grid.length));
  return 1.0 / (4.0 / (grid.h * grid.h) * s * s);
}

}  // namespace thermobeam
