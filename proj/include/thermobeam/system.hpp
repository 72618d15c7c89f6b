#pragma once

#include "thermobeam/grid.hpp"
#include "thermobeam/model.hpp"
#include "thermobeam/operators.hpp"

namespace thermobeam {

/// Everything the discrete evolution depends on, validated and immutable.
struct System {
  SpatialGrid grid;
  CoefficientField coefficients;
  PhysicalParams params;
  MemoryGrid memory;
  DiscreteOperators ops;

  int nx() const { return grid.nx; }
  int ns() const { return memory.ns; }
  double h() const { return grid.h; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(grid.nx) * (3 + memory.ns); }
};

System make_system(SpatialGrid grid, CoefficientField coefficients, PhysicalParams params, MemoryGrid memory);

/// Coefficients sampled from profiles on the closed grid, then certified.
CoefficientField sample_coefficients(const SpatialGrid& grid, const Profile& p, const Profile& g);

}  // namespace thermobeam
