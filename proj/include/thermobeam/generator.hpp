#pragma once

#include <iosfwd>
#include <string>

#include "thermobeam/system.hpp"

namespace thermobeam {

/// Offsets of the blocks in the flattened state (u, v, theta, eta_1..eta_Ns).
struct BlockLayout {
  int nx = 0;
  int ns = 0;

  Eigen::Index u() const { return 0; }
  Eigen::Index v() const { return nx; }
  Eigen::Index theta() const { return 2 * static_cast<Eigen::Index>(nx); }
  Eigen::Index eta(int k) const { return static_cast<Eigen::Index>(3 + k) * nx; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(3 + ns) * nx; }
};

struct GeneratorAssembly {
  BlockLayout layout;
  SparseMatrix generator;  // A_h
  SparseMatrix metric;     // H, with |Phi|^2 = Phi^T H Phi
};

GeneratorAssembly assemble_generator(const System& system);

/// One "row col value" line per stored entry, 0-based, rows ascending.
void write_coo(const SparseMatrix& m, std::ostream& out);
void write_coo(const SparseMatrix& m, const std::string& path);

}  // namespace thermobeam
