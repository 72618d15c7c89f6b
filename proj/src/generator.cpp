#include "thermobeam/generator.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <vector>

namespace thermobeam {

namespace {

using Triplet = Eigen::Triplet<double>;

void add_block(std::vector<Triplet>& t, const SparseMatrix& m, Eigen::Index r0, Eigen::Index c0, double scale) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (it.value() != 0.0) t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

void add_identity(std::vector<Triplet>& t, int n, Eigen::Index r0, Eigen::Index c0, double scale) {
  for (int i = 0; i < n; ++i) t.emplace_back(r0 + i, c0 + i, scale);
}

}  // namespace

GeneratorAssembly assemble_generator(const System& system) {
  const auto& ops = system.ops;
  const auto& mem = system.memory;
  const auto& prm = system.params;
  const int n = system.nx();
  if (ops.lap.rows() != n || ops.bih.rows() != n || mem.ns < 1)
    throw Error(ErrorKind::DimensionMismatch, "assembly", "operators and grids disagree on Nx or Ns");

  GeneratorAssembly a;
  a.layout = {n, mem.ns};
  const BlockLayout& L = a.layout;

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n) * (12 + 6 * static_cast<std::size_t>(mem.ns)));

  add_identity(t, n, L.u(), L.v(), 1.0);

  add_block(t, ops.bih, L.v(), L.u(), -1.0);
  add_block(t, ops.lap, L.v(), L.u(), prm.kappa * prm.kappa);
  add_block(t, ops.damping, L.v(), L.v(), -2.0);
  add_block(t, ops.d1, L.v(), L.v(), -2.0 * prm.kappa);
  add_block(t, ops.d1, L.v(), L.theta(), -prm.beta);

  add_block(t, ops.d1, L.theta(), L.v(), -prm.beta);
  add_block(t, ops.lap, L.theta(), L.theta(), prm.l);
  for (int k = 0; k < mem.ns; ++k) add_block(t, ops.lap, L.theta(), L.eta(k), mem.c[static_cast<std::size_t>(k)]);

  const double inv_ds = 1.0 / mem.ds;
  for (int k = 0; k < mem.ns; ++k) {
    add_identity(t, n, L.eta(k), L.theta(), 1.0);
    add_identity(t, n, L.eta(k), L.eta(k), -inv_ds);
    if (k > 0) add_identity(t, n, L.eta(k), L.eta(k - 1), inv_ds);
  }
  a.generator.resize(L.dim(), L.dim());
  a.generator.setFromTriplets(t.begin(), t.end());

  t.clear();
  const double h = system.h();
  add_block(t, ops.bih, L.u(), L.u(), h);
  add_block(t, ops.lap, L.u(), L.u(), -h * prm.kappa * prm.kappa);
  add_identity(t, n, L.v(), L.v(), h);
  add_identity(t, n, L.theta(), L.theta(), h);
  for (int k = 0; k < mem.ns; ++k) add_block(t, ops.lap, L.eta(k), L.eta(k), -h * mem.c[static_cast<std::size_t>(k)]);
  a.metric.resize(L.dim(), L.dim());
  a.metric.setFromTriplets(t.begin(), t.end());
  return a;
}

void write_coo(const SparseMatrix& m, std::ostream& out) {
  Eigen::SparseMatrix<double, Eigen::RowMajor> r(m);
  out << std::setprecision(17);
  for (int i = 0; i < r.outerSize(); ++i)
    for (decltype(r)::InnerIterator it(r, i); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

void write_coo(const SparseMatrix& m, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::InvalidArgument, path, "cannot open for writing");
  write_coo(m, f);
}

}  // namespace thermobeam
