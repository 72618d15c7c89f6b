// Acceptance suite. `acceptance N` runs criterion N; no argument runs all.
// Each criterion prints one line: "criterion N <name>: PASS|FAIL <measurements>".

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "thermobeam/commands.hpp"
#include "thermobeam/io.hpp"

using namespace thermobeam;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Setup setup_from(const std::string& text, Strictness strictness = Strictness::strict) {
  return build_setup(to_run_config(RawConfig::parse(text)), strictness);
}

State initial_state(const Setup& s) { return build_initial_state(s.initial, s.system.grid, s.system.memory); }

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

/// Least-squares slope of log(err) against log(dt).
double loglog_slope(const std::vector<double>& dt, const std::vector<double>& err) {
  const auto n = static_cast<double>(dt.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < dt.size(); ++i) {
    const double x = std::log(dt[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double h_norm(const GeneratorAssembly& a, const Eigen::VectorXd& x) { return std::sqrt(x.dot(a.metric * x)); }

Outcome dissipativity() {
  Stopwatch clock;
  const Setup s = setup_from("[time]\ndt = 0.01\n");
  const GeneratorAssembly a = assemble_generator(s.system);
  const DissipativityReport r = check_dissipativity(a, 1000, s.config.seed);
  const double elapsed = clock.seconds();
  const bool pass = r.worst_ratio <= 1e-10 && elapsed <= 30.0;
  return {pass, "Ns=" + std::to_string(s.system.ns()) + " dim=" + std::to_string(a.layout.dim()) +
                    " worst_ratio=" + num(r.worst_ratio) + " (<= 1e-10) seconds=" + num(elapsed) + " (<= 30)"};
}

Outcome energy_identity() {
  Stopwatch clock;
  const std::vector<double> dts{4e-3, 2e-3, 1e-3};
  std::vector<double> residuals;
  for (double dt : dts) {
    std::ostringstream cfg;
    cfg << "[domain]\nNx = 16\n[memory]\nns = 128\nds = 0.1\n[time]\nscheme = full_implicit_midpoint\ndt = " << dt
        << "\nT = 0.4\n";
    const Setup s = setup_from(cfg.str());
    SchemeConfig sc = s.scheme;
    const SimulationResult res = simulate(s.system, initial_state(s), sc, {.T = 0.4, .sample_every = 1});
    if (res.failure) return {false, res.failure->what()};
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < res.records.size(); ++i)
      worst = std::max(worst, std::abs(res.records[i].identity_residual));
    residuals.push_back(worst);
  }
  const double slope = loglog_slope(dts, residuals);
  const double elapsed = clock.seconds();
  std::string detail = "residuals=";
  for (double r : residuals) detail += num(r) + " ";
  detail += "slope=" + num(slope) + " (>= 1.9) seconds=" + num(elapsed) + " (<= 60)";
  return {slope >= 1.9 && elapsed <= 60.0, detail};
}

double oracle_error(const std::string& text, double T) {
  const Setup s = setup_from(text);
  const GeneratorAssembly a = assemble_generator(s.system);
  const State init = initial_state(s);
  const Eigen::VectorXd exact = oracle_evolve(a, init.flatten(), T);
  Stepper stepper(s.system, s.scheme);
  State st = init;
  const long steps = std::lround(T / s.scheme.dt);
  for (long k = 0; k < steps; ++k) stepper.advance(st);
  return h_norm(a, st.flatten() - exact) / h_norm(a, exact);
}

Outcome oracle_equivalence() {
  Stopwatch clock;
  constexpr double T = 0.5;
  const std::string base = "[domain]\nNx = 4\n[time]\nT = 0.5\n";
  const double midpoint =
      oracle_error(base + "scheme = full_implicit_midpoint\ndt = 1e-4\n[memory]\nns = 8\nds = 0.5\n", T);
  const std::vector<double> dts{2e-3, 1e-3, 5e-4};
  std::vector<double> split;
  for (double dt : dts)
    split.push_back(oracle_error(
        base + "scheme = split_semilagrangian\ndt = " + num(dt) + "\n[memory]\nns = 8\n", T));
  const double order = loglog_slope(dts, split);
  const double elapsed = clock.seconds();
  std::string detail = "midpoint_error=" + num(midpoint) + " (<= 1e-06) split_errors=";
  for (double e : split) detail += num(e) + " ";
  detail += "split_order=" + num(order) + " (>= 0.9) seconds=" + num(elapsed) + " (<= 60)";
  return {midpoint <= 1e-6 && order >= 0.9 && elapsed <= 60.0, detail};
}

/// The default trajectory with multipliers, shared by criteria 4 to 6.
struct DefaultRun {
  Setup setup;
  MultiplierConfig multipliers;
  SimulationResult result;
  double seconds = 0.0;
};

DefaultRun default_run() {
  Stopwatch clock;
  Setup s = setup_from("");
  const MultiplierConfig m = choose_multipliers(s.system.params, s.kernel_report, s.system.coefficients,
                                                poincare_constant(s.system.grid), s.config.multipliers);
  SimulationOptions so{.T = s.config.T, .sample_every = s.config.sample_every};
  DefaultRun run{std::move(s), m, {}, 0.0};
  so.multipliers = &run.multipliers;
  run.result = simulate(run.setup.system, initial_state(run.setup), run.setup.scheme, so);
  run.seconds = clock.seconds();
  return run;
}

Outcome exponential_decay() {
  const DefaultRun run = default_run();
  if (run.result.failure) return {false, run.result.failure->what()};
  std::vector<double> t, E;
  for (const Snapshot& sn : run.result.samples) {
    t.push_back(sn.t);
    E.push_back(sn.E);
  }
  const DecayFit fit = fit_decay(t, E, 2.0, 10.0, FitMethod::peak_envelope);

  Stopwatch clock;
  const Setup reduced = setup_from(
      "[domain]\nNx = 24\n[memory]\nns = 48\nds = 0.25\n[time]\nscheme = full_implicit_midpoint\ndt = 0.01\n");
  const SpectrumReport spec = spectral_abscissa(assemble_generator(reduced.system));
  const double rate = 2.0 * std::abs(spec.abscissa);
  const double gap = std::abs(fit.gamma_fit - rate);
  const double elapsed = run.seconds + clock.seconds();
  const bool pass = fit.gamma_fit > 0 && fit.r2 >= 0.999 && gap <= 0.05 * rate && elapsed <= 120.0;
  return {pass, "gamma_fit=" + num(fit.gamma_fit) + " (> 0) r2=" + num(fit.r2) + " (>= 0.999) spectral_rate=" +
                    num(rate) + " gap=" + num(gap) + " (<= " + num(0.05 * rate) + ") seconds=" + num(elapsed) +
                    " (<= 120)"};
}

Outcome monotone_decay() {
  const DefaultRun run = default_run();
  if (run.result.failure) return {false, run.result.failure->what()};
  double worst = -std::numeric_limits<double>::infinity();
  const auto& sm = run.result.samples;
  for (std::size_t i = 1; i < sm.size(); ++i) worst = std::max(worst, (sm[i].E - sm[i - 1].E) / sm[i - 1].E);
  return {worst <= 1e-10, "samples=" + std::to_string(sm.size()) + " worst_relative_increase=" + num(worst) +
                              " (<= 1e-10)"};
}

Outcome lemma_inequalities() {
  const DefaultRun run = default_run();
  if (run.result.failure) return {false, run.result.failure->what()};
  LemmaMargins worst{1e300, 1e300, 1e300, 1e300, 1e300};
  for (const Snapshot& sn : run.result.samples) {
    const LemmaMargins m = lemma_margins(sn, run.multipliers, run.setup.system.params);
    worst.f1 = std::min(worst.f1, m.f1);
    worst.i = std::min(worst.i, m.i);
    worst.f2 = std::min(worst.f2, m.f2);
    worst.lower = std::min(worst.lower, m.lower);
    worst.upper = std::min(worst.upper, m.upper);
  }
  constexpr double slack = -1e-8;
  const bool pass = worst.f1 >= slack && worst.i >= slack && worst.f2 >= slack && worst.lower >= slack &&
                    worst.upper >= slack;
  return {pass, "min_margins f1=" + num(worst.f1) + " i=" + num(worst.i) + " f2=" + num(worst.f2) +
                    " lower=" + num(worst.lower) + " upper=" + num(worst.upper) + " (>= -1e-08)"};
}

Outcome kernel_gate() {
  const KernelReport single = validate_kernel(MemoryKernel::prony({1.0}, {1.0}), 256);
  const KernelReport scaled = validate_kernel(MemoryKernel::prony({2.0}, {3.0}), 256);
  std::vector<double> s, mu, dmu;
  for (int k = 0; k <= 200; ++k) {
    const double x = 0.05 * k;
    s.push_back(x);
    mu.push_back(std::pow(1.0 + x, -2.0));
    dmu.push_back(-2.0 * std::pow(1.0 + x, -3.0));
  }
  const KernelReport algebraic = validate_kernel(MemoryKernel::tabulated(s, mu, dmu), 256);
  const bool ok1 = single.passed() && std::abs(single.mu0 - 1.0) < 1e-12 && std::abs(single.delta1 - 1.0) < 1e-12;
  const bool ok2 =
      scaled.passed() && std::abs(scaled.mu0 - 2.0 / 3.0) < 1e-12 && std::abs(scaled.delta1 - 3.0) < 1e-12;
  const bool ok3 = algebraic.failure == ErrorKind::NoExponentialDomination;
  return {ok1 && ok2 && ok3,
          "exp(-s): mu0=" + num(single.mu0) + " delta1=" + num(single.delta1) + " | 2exp(-3s): mu0=" +
              num(scaled.mu0) + " delta1=" + num(scaled.delta1) + " | (1+s)^-2: " +
              (algebraic.failure ? std::string(to_string(*algebraic.failure)) : std::string("accepted"))};
}

Outcome resolvent_solvability() {
  bool pass = true;
  double worst = 0.0;
  int cases = 0;
  for (double beta : {0.0, 0.5, 1.0}) {
    for (double kappa : {0.1, 0.5, 1.0}) {
      std::ostringstream cfg;
      cfg << "[domain]\nNx = 16\n[memory]\nns = 48\nds = 0.25\n[time]\ndt = 0.01\nscheme = full_implicit_midpoint\n"
          << "[params]\nbeta = " << beta << "\nkappa = " << kappa << "\n";
      const Setup s = setup_from(cfg.str(), Strictness::limit_cases);
      try {
        const ResolventReport r = resolvent_check(assemble_generator(s.system));
        if (!std::isfinite(r.condition_estimate)) pass = false;
        worst = std::max(worst, r.condition_estimate);
      } catch (const Error&) {
        pass = false;
      }
      ++cases;
    }
  }
  return {pass, "cases=" + std::to_string(cases) + " worst_condition=" + num(worst) + " (finite)"};
}

double smallest_bending_eigenvalue(int nx) {
  const SpatialGrid grid = build_spatial_grid(1.0, nx);
  const CoefficientField cf = sample_coefficients(grid, Profile::constant(1.0), Profile::constant(1.0));
  const DiscreteOperators ops = build_operators(grid, cf);
  const Eigen::MatrixXd bih(ops.bih);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(bih, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

Outcome clamped_beam_spectrum() {
  constexpr double reference = 500.5639017;
  const double coarse = smallest_bending_eigenvalue(64);
  const double fine = smallest_bending_eigenvalue(128);
  const double r2 = std::pow(129.0 / 65.0, 2);
  const double extrapolated = (r2 * fine - coarse) / (r2 - 1.0);
  const double rel = std::abs(extrapolated - reference) / reference;
  return {rel <= 5e-3, "Nx64=" + num(coarse) + " Nx128=" + num(fine) + " extrapolated=" + num(extrapolated) +
                           " relative_error=" + num(rel) + " (<= 0.005)"};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list{
      {"dissipativity", dissipativity},
      {"energy_identity", energy_identity},
      {"oracle_equivalence", oracle_equivalence},
      {"exponential_decay", exponential_decay},
      {"monotone_decay", monotone_decay},
      {"lemma_inequalities", lemma_inequalities},
      {"kernel_gate", kernel_gate},
      {"resolvent_solvability", resolvent_solvability},
      {"clamped_beam_spectrum", clamped_beam_spectrum},
  };
  return list;
}

bool run_one(std::size_t index) {
  const Criterion& c = criteria()[index];
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  std::cout << "criterion " << index + 1 << ' ' << c.name << ": " << (o.pass ? "PASS" : "FAIL") << ' ' << o.detail
            << std::endl;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t count = criteria().size();
  if (argc > 2) {
    std::cerr << "usage: acceptance [criterion 1-" << count << "]\n";
    return 2;
  }
  if (argc == 2) {
    const int index = std::atoi(argv[1]);
    if (index < 1 || index > static_cast<int>(count)) {
      std::cerr << "unknown criterion " << argv[1] << '\n';
      return 2;
    }
    return run_one(static_cast<std::size_t>(index - 1)) ? 0 : 1;
  }
  bool all = true;
  for (std::size_t i = 0; i < count; ++i) all = run_one(i) && all;
  return all ? 0 : 1;
}
