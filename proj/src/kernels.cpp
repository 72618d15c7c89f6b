#include "thermobeam/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace thermobeam {

namespace {

void check_weights(const HistoryField& eta, std::span<const double> w) {
  if (w.size() != static_cast<std::size_t>(eta.ns()))
    throw Error(ErrorKind::DimensionMismatch, "weights", "weight count differs from Ns");
}

double grad_sq(const double* a, int n) {
  double acc = a[0] * a[0] + a[n - 1] * a[n - 1];
  for (int i = 1; i < n; ++i) {
    const double d = a[i] - a[i - 1];
    acc += d * d;
  }
  return acc;
}

double grad_sq_diff(const double* a, const double* b, int n) {
  const double first = a[0] - b[0], last = a[n - 1] - b[n - 1];
  double acc = first * first + last * last;
  for (int i = 1; i < n; ++i) {
    const double d = (a[i] - b[i]) - (a[i - 1] - b[i - 1]);
    acc += d * d;
  }
  return acc;
}

}  // namespace

namespace serial {

void column_combination(const HistoryField& eta, std::span<const double> w, int lag, double* out) {
  check_weights(eta, w);
  const int n = eta.nx();
  std::fill_n(out, n, 0.0);
  for (int k = lag; k < eta.ns(); ++k) {
    const double* col = eta.column(k - lag);
    const double wk = w[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) out[i] += wk * col[i];
  }
}

void add_to_all_columns(HistoryField& eta, const double* x, double scale) {
  const int n = eta.nx();
  for (int k = 0; k < eta.ns(); ++k) {
    double* col = eta.column(k);
    for (int i = 0; i < n; ++i) col[i] += scale * x[i];
  }
}

double gradient_energy(const HistoryField& eta, std::span<const double> w, double h) {
  check_weights(eta, w);
  double acc = 0.0;
  for (int k = 0; k < eta.ns(); ++k) acc += w[static_cast<std::size_t>(k)] * grad_sq(eta.column(k), eta.nx());
  return acc / (h * h);
}

double gradient_energy_of_differences(const HistoryField& eta, std::span<const double> w, double h) {
  check_weights(eta, w);
  double acc = w[0] * grad_sq(eta.column(0), eta.nx());
  for (int k = 1; k < eta.ns(); ++k)
    acc += w[static_cast<std::size_t>(k)] * grad_sq_diff(eta.column(k), eta.column(k - 1), eta.nx());
  return acc / (h * h);
}

}  // namespace serial

namespace omp {

void column_combination(const HistoryField& eta, std::span<const double> w, int lag, double* out) {
  check_weights(eta, w);
  const int n = eta.nx();
  const int ns = eta.ns();
  const int threads = backend_threads();
  std::vector<double> partial(static_cast<std::size_t>(threads) * static_cast<std::size_t>(n), 0.0);
#pragma omp parallel num_threads(threads)
  {
#ifdef _OPENMP
    const int tid = omp_get_thread_num();
#else
    const int tid = 0;
#endif
    double* local = partial.data() + static_cast<std::ptrdiff_t>(tid) * n;
#pragma omp for schedule(static)
    for (int k = lag; k < ns; ++k) {
      const double* col = eta.column(k - lag);
      const double wk = w[static_cast<std::size_t>(k)];
#pragma omp simd
      for (int i = 0; i < n; ++i) local[i] += wk * col[i];
    }
  }
  std::fill_n(out, n, 0.0);
  for (int t = 0; t < threads; ++t)
    for (int i = 0; i < n; ++i) out[i] += partial[static_cast<std::size_t>(t) * n + static_cast<std::size_t>(i)];
}

void add_to_all_columns(HistoryField& eta, const double* x, double scale) {
  const int n = eta.nx();
  const int ns = eta.ns();
#pragma omp parallel for schedule(static) num_threads(backend_threads())
  for (int k = 0; k < ns; ++k) {
    double* col = eta.column(k);
#pragma omp simd
    for (int i = 0; i < n; ++i) col[i] += scale * x[i];
  }
}

double gradient_energy(const HistoryField& eta, std::span<const double> w, double h) {
  check_weights(eta, w);
  const int ns = eta.ns();
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc) num_threads(backend_threads())
  for (int k = 0; k < ns; ++k) acc += w[static_cast<std::size_t>(k)] * grad_sq(eta.column(k), eta.nx());
  return acc / (h * h);
}

double gradient_energy_of_differences(const HistoryField& eta, std::span<const double> w, double h) {
  check_weights(eta, w);
  const int ns = eta.ns();
  double acc = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : acc) num_threads(backend_threads())
  for (int k = 0; k < ns; ++k) {
    const double g = k == 0 ? grad_sq(eta.column(0), eta.nx()) : grad_sq_diff(eta.column(k), eta.column(k - 1), eta.nx());
    acc += w[static_cast<std::size_t>(k)] * g;
  }
  return acc / (h * h);
}

}  // namespace omp

int backend_threads() {
#ifdef _OPENMP
  return std::max(1, omp_get_max_threads());
#else
  return 1;
#endif
}

void column_combination(Backend b, const HistoryField& eta, std::span<const double> w, int lag, double* out) {
  b == Backend::openmp ? omp::column_combination(eta, w, lag, out) : serial::column_combination(eta, w, lag, out);
}

void add_to_all_columns(Backend b, HistoryField& eta, const double* x, double scale) {
  b == Backend::openmp ? omp::add_to_all_columns(eta, x, scale) : serial::add_to_all_columns(eta, x, scale);
}

double gradient_energy(Backend b, const HistoryField& eta, std::span<const double> w, double h) {
  return b == Backend::openmp ? omp::gradient_energy(eta, w, h) : serial::gradient_energy(eta, w, h);
}

double gradient_energy_of_differences(Backend b, const HistoryField& eta, std::span<const double> w, double h) {
  return b == Backend::openmp ? omp::gradient_energy_of_differences(eta, w, h)
                              : serial::gradient_energy_of_differences(eta, w, h);
}

}  // namespace thermobeam
