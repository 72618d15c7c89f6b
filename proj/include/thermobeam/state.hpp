#pragma once

#include <Eigen/Core>
#include <vector>

#include "thermobeam/grid.hpp"

namespace thermobeam {

/// Nx x Ns history values stored column-major in a ring, so the s-shift of
/// the semi-Lagrangian step is an index rotation. column(k) holds eta at s_{k+1}.
class HistoryField {
 public:
  HistoryField() = default;
  HistoryField(int nx, int ns);

  int nx() const { return nx_; }
  int ns() const { return ns_; }
  int head() const { return head_; }
  const double* storage() const { return data_.data(); }

  double* column(int k) { return data_.data() + slot(k) * static_cast<std::ptrdiff_t>(nx_); }
  const double* column(int k) const { return data_.data() + slot(k) * static_cast<std::ptrdiff_t>(nx_); }
  Eigen::Map<Eigen::VectorXd> col(int k) { return {column(k), nx_}; }
  Eigen::Map<const Eigen::VectorXd> col(int k) const { return {column(k), nx_}; }

  /// Moves every column one node up in s, dropping the last and inserting a
  /// zero inflow column at s_1.
  void shift_in();
  void set_zero();

 private:
  int nx_ = 0, ns_ = 0, head_ = 0;
  std::vector<double> data_;

  std::ptrdiff_t slot(int k) const { return (head_ + k) % ns_; }
};

struct State {
  double t = 0.0;
  Eigen::VectorXd u, v, theta;
  HistoryField eta;

  int nx() const { return static_cast<int>(u.size()); }
  int ns() const { return eta.ns(); }
  /// (u, v, theta, eta_1..eta_Ns).
  Eigen::VectorXd flatten() const;
  static State unflatten(const Eigen::VectorXd& phi, int nx, int ns, double t = 0.0);
  static State zero(int nx, int ns, double t = 0.0);
};

/// Samples the initial profiles on the interior nodes and fills eta per the
/// history mode. Profiles must vanish at both ends; u0 and v0 also need a
/// vanishing slope. Explicit histories must vanish at s = 0.
State build_initial_state(const InitialData& init, const SpatialGrid& grid, const MemoryGrid& memory);

}  // namespace thermobeam
