// Times the serial and OpenMP history kernels on one history field and
// reports the speedup and the largest disagreement between the two.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "thermobeam/kernels.hpp"

using namespace thermobeam;

namespace {

double best_of(int reps, const std::function<void()>& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial_s, double omp_s, double diff) {
  std::printf("%-32s %12.3e %12.3e %8.2f %12.3e\n", name, serial_s, omp_s, serial_s / omp_s, diff);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP history kernels"};
  int nx = 64, ns = 1843, reps = 20;
  app.add_option("--nx", nx, "interior nodes")->check(CLI::PositiveNumber);
  app.add_option("--ns", ns, "history nodes")->check(CLI::PositiveNumber);
  app.add_option("--reps", reps, "repetitions (best time is reported)")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  HistoryField eta(nx, ns);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int k = 0; k < ns; ++k)
    for (int i = 0; i < nx; ++i) eta.col(k)(i) = normal(rng);
  std::vector<double> w(static_cast<std::size_t>(ns));
  for (double& x : w) x = std::abs(normal(rng));
  const double h = 1.0 / (nx + 1);
  std::vector<double> x(static_cast<std::size_t>(nx), 1e-3), a(x.size()), b(x.size());

  std::printf("nx=%d ns=%d threads=%d reps=%d\n", nx, ns, backend_threads(), reps);
  std::printf("%-32s %12s %12s %8s %12s\n", "kernel", "serial_s", "openmp_s", "speedup", "max_diff");

  for (int lag : {0, 1}) {
    const double ts = best_of(reps, [&] { serial::column_combination(eta, w, lag, a.data()); });
    const double to = best_of(reps, [&] { omp::column_combination(eta, w, lag, b.data()); });
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    row(lag == 0 ? "column_combination lag 0" : "column_combination lag 1", ts, to, diff);
  }

  double es = 0.0, eo = 0.0;
  double ts = best_of(reps, [&] { es = serial::gradient_energy(eta, w, h); });
  double to = best_of(reps, [&] { eo = omp::gradient_energy(eta, w, h); });
  row("gradient_energy", ts, to, std::abs(es - eo));

  ts = best_of(reps, [&] { es = serial::gradient_energy_of_differences(eta, w, h); });
  to = best_of(reps, [&] { eo = omp::gradient_energy_of_differences(eta, w, h); });
  row("gradient_energy_of_differences", ts, to, std::abs(es - eo));

  HistoryField e1 = eta, e2 = eta;
  ts = best_of(reps, [&] { serial::add_to_all_columns(e1, x.data(), 1.0); });
  to = best_of(reps, [&] { omp::add_to_all_columns(e2, x.data(), 1.0); });
  double diff = 0.0;
  for (int k = 0; k < ns; ++k) diff = std::max(diff, (e1.col(k) - e2.col(k)).cwiseAbs().maxCoeff());
  row("add_to_all_columns", ts, to, diff);
  return 0;
}
