#include "thermobeam/system.hpp"

namespace thermobeam {

System make_system(SpatialGrid grid, CoefficientField coefficients, PhysicalParams params, MemoryGrid memory) {
  if (memory.ns < 1 || memory.c.size() != static_cast<std::size_t>(memory.ns))
    throw Error(ErrorKind::DimensionMismatch, "memory", "memory grid is empty or inconsistent");
  System s;
  s.ops = build_operators(grid, coefficients);
  s.grid = std::move(grid);
  s.coefficients = std::move(coefficients);
  s.params = params;
  s.memory = std::move(memory);
  return s;
}

CoefficientField sample_coefficients(const SpatialGrid& grid, const Profile& p, const Profile& g) {
  const auto xs = grid.closed_nodes();
  const auto ps = p.sample(xs);
  const auto gs = g.sample(xs);
  return certify_coefficients(ps, gs);
}

}  // namespace thermobeam
