#pragma once

#include <span>

#include "thermobeam/state.hpp"

namespace thermobeam {

enum class Backend { serial, openmp };

// History-column kernels. Column index k is the s-node s_{k+1}; column -1 is
// the inflow value eta = 0. The openmp versions must agree with serial to
// rounding and are deterministic for a fixed thread count.

namespace serial {

/// out = sum_k w[k] * eta(k - lag), lag in {0, 1}.
void column_combination(const HistoryField& eta, std::span<const double> w, int lag, double* out);
/// eta(k) += scale * x for every column.
void add_to_all_columns(HistoryField& eta, const double* x, double scale);
/// sum_k w[k] |grad eta(k)|^2 (no x-weight).
double gradient_energy(const HistoryField& eta, std::span<const double> w, double h);
/// sum_k w[k] |grad (eta(k) - eta(k - 1))|^2 (no x-weight).
double gradient_energy_of_differences(const HistoryField& eta, std::span<const double> w, double h);

}  // namespace serial

namespace omp {

void column_combination(const HistoryField& eta, std::span<const double> w, int lag, double* out);
void add_to_all_columns(HistoryField& eta, const double* x, double scale);
double gradient_energy(const HistoryField& eta, std::span<const double> w, double h);
double gradient_energy_of_differences(const HistoryField& eta, std::span<const double> w, double h);

}  // namespace omp

void column_combination(Backend b, const HistoryField& eta, std::span<const double> w, int lag, double* out);
void add_to_all_columns(Backend b, HistoryField& eta, const double* x, double scale);
double gradient_energy(Backend b, const HistoryField& eta, std::span<const double> w, double h);
double gradient_energy_of_differences(Backend b, const HistoryField& eta, std::span<const double> w, double h);

/// Threads the openmp backend will use (1 without OpenMP).
int backend_threads();

}  // namespace thermobeam
