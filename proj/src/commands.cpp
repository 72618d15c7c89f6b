#include "thermobeam/commands.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "thermobeam/io.hpp"

namespace thermobeam {

namespace {

constexpr Eigen::Index kDenseLimit = 2000;
constexpr double kLemmaSlack = 1e-8;
constexpr double kMonotoneTol = 1e-10;
constexpr double kAbscissaTol = 1e-10;
constexpr double kFinalBoundTol = 0.05;

std::string fmt_double(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

bool compare(double a, const std::string& rel, double b) {
  if (rel == "<=") return a <= b;
  if (rel == ">=") return a >= b;
  if (rel == "<") return a < b;
  return a > b;
}

/// Runs a command body, mapping errors to exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::ParseError ? exit_usage : exit_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_failure;
  }
}

RunConfig load_config(const std::string& path) { return to_run_config(RawConfig::load(path)); }

std::optional<MultiplierConfig> try_multipliers(const Setup& s, Report& report) {
  try {
    auto m = choose_multipliers(s.system.params, s.kernel_report, s.system.coefficients,
                                poincare_constant(s.system.grid), s.config.multipliers);
    report.check("multipliers_feasible", 1.0, ">=", 1.0);
    return m;
  } catch (const Error& e) {
    report.add_info("multipliers", e.what());
    report.check("multipliers_feasible", 0.0, ">=", 1.0);
    return std::nullopt;
  }
}

void add_multiplier_info(Report& r, const MultiplierConfig& m) {
  r.add_info("N", m.N);
  r.add_info("N1", m.N1);
  r.add_info("N2", m.N2);
  r.add_info("sigma1", m.sigma1);
  r.add_info("sigma2", m.sigma2);
  r.add_info("sigma3", m.sigma3);
  r.add_info("sigma", m.sigma);
  r.add_info("Ckappa", m.Ckappa);
  r.add_info("C1", m.C1);
  r.add_info("C2", m.C2);
  r.add_info("C3", m.C3);
  r.add_info("Cp", m.Cp);
  r.add_info("zeta1", m.zeta1);
  r.add_info("zeta2", m.zeta2);
  r.add_info("gamma0", m.gamma0);
  r.add_info("gamma1", m.gamma1);
  r.add_info("gamma2", m.gamma2);
  r.add_info("lambda", m.lambda);
  r.add_info("gamma_theory", m.gamma_theory);
  r.add_info("K_theory", m.K_theory);
}

/// Writes to the file if a path is given, otherwise to the fallback stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(ErrorKind::InvalidArgument, path, "cannot open for writing");
    }
    stream_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& operator*() { return *stream_; }
  bool to_file() const { return stream_ == &file_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::string pick(const std::optional<std::string>& override_path, const std::string& configured) {
  return override_path ? *override_path : configured;
}

}  // namespace

void Report::add_info(const std::string& key, double value) { info.emplace_back(key, fmt_double(value)); }

CheckLine& Report::check(const std::string& name, double measured, const std::string& relation, double threshold) {
  checks.push_back({name, measured, relation, threshold, compare(measured, relation, threshold)});
  return checks.back();
}

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

void Report::write(std::ostream& out) const {
  out << "# thermobeam certification report\n";
  for (const auto& [k, v] : info) out << "info " << k << " " << v << '\n';
  for (const auto& c : checks)
    out << "check " << c.name << " measured=" << fmt_double(c.measured) << " required " << c.relation << ' '
        << fmt_double(c.threshold) << ' ' << (c.pass ? "PASS" : "FAIL") << '\n';
  out << "result " << (passed() ? "PASS" : "FAIL") << '\n';
}

TrajectoryCertificate certify_trajectory(const Setup& setup, const SimulationResult& result,
                                         const MultiplierConfig* m) {
  TrajectoryCertificate cert;
  Report& r = cert.report;
  const auto& samples = result.samples;
  const auto& params = setup.system.params;

  double min_e = std::numeric_limits<double>::infinity();
  double max_d = -std::numeric_limits<double>::infinity();
  double max_rise = -std::numeric_limits<double>::infinity();
  double max_identity = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    min_e = std::min(min_e, samples[i].E);
    max_d = std::max(max_d, samples[i].D.total());
    if (i > 0 && samples[i - 1].E > 0.0) max_rise = std::max(max_rise, (samples[i].E - samples[i - 1].E) / samples[i - 1].E);
    if (std::isfinite(result.records[i].identity_residual))
      max_identity = std::max(max_identity, result.records[i].identity_residual);
  }
  r.add_info("samples", static_cast<double>(samples.size()));
  r.add_info("max_identity_residual", max_identity);
  r.check("energy_nonnegative", min_e, ">=", 0.0);
  r.check("dissipation_nonpositive", max_d, "<=", 0.0);
  if (samples.size() > 1 && std::isfinite(max_rise)) r.check("energy_monotone", max_rise, "<=", kMonotoneTol);

  if (m) {
    LemmaMargins worst{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                       std::numeric_limits<double>::infinity()};
    for (const auto& s : samples) {
      const LemmaMargins g = lemma_margins(s, *m, params);
      worst.f1 = std::min(worst.f1, g.f1);
      worst.i = std::min(worst.i, g.i);
      worst.f2 = std::min(worst.f2, g.f2);
      worst.lower = std::min(worst.lower, g.lower);
      worst.upper = std::min(worst.upper, g.upper);
    }
    r.check("lemma_dF1_bound", worst.f1, ">=", -kLemmaSlack);
    r.check("lemma_I_bound", worst.i, ">=", -kLemmaSlack);
    r.check("lemma_dF2_bound", worst.f2, ">=", -kLemmaSlack);
    r.check("sandwich_lower", worst.lower, ">=", -kLemmaSlack);
    r.check("sandwich_upper", worst.upper, ">=", -kLemmaSlack);
  }

  if (samples.empty() || samples.front().E == 0.0) {
    r.add_info("decay_fit", "skipped: zero initial energy");
    return cert;
  }
  std::vector<double> t, e;
  for (const auto& s : samples) {
    t.push_back(s.t);
    e.push_back(s.E);
  }
  const double lo = setup.config.window_lo(), hi = setup.config.window_hi();
  try {
    const DecayFit fit = fit_decay(t, e, lo, hi, setup.config.fit_method);
    cert.fit = fit;
    r.add_info("fit_method", std::string(to_string(fit.method)));
    r.add_info("fit_window", fmt_double(lo) + " " + fmt_double(hi));
    r.add_info("gamma_fit", fit.gamma_fit);
    r.add_info("K_fit", fit.K_fit);
    r.add_info("r2", fit.r2);
    r.check("decay_rate_positive", fit.gamma_fit, ">", 0.0);
    const double rate = fit.gamma_fit * (1.0 - kFinalBoundTol);
    double worst_window = 0.0, global_k = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double envelope = std::exp(-rate * t[i]);
      global_k = std::max(global_k, e[i] / (e.front() * envelope));
      if (t[i] >= lo - 1e-12 && t[i] <= hi + 1e-12)
        worst_window = std::max(worst_window, e[i] / (fit.K_fit * e.front() * envelope));
    }
    r.add_info("K_global", global_k);
    r.check("final_bound", worst_window, "<=", 1.0);
  } catch (const Error& ex) {
    r.add_info("decay_fit", ex.what());
    r.check("decay_fit_available", 0.0, ">=", 1.0);
  }
  return cert;
}

double mechanical_rate(const System& sys) {
  const int n = sys.nx();
  const auto& ops = sys.ops;
  const double k = sys.params.kappa;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  M.topRightCorner(n, n).setIdentity();
  M.bottomLeftCorner(n, n) = Eigen::MatrixXd(-ops.bih + k * k * ops.lap);
  M.bottomRightCorner(n, n) = Eigen::MatrixXd(-2.0 * ops.damping - 2.0 * k * ops.d1);
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigensolveFailed, "mechanical block", "eigensolve failed");
  return -2.0 * es.eigenvalues().real().maxCoeff();
}

// --------------------------------------------------------------- validate

int cmd_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig c = load_config(config_path);
    const PhysicalParams params = derive_params(c.lambda1, c.lambda2, c.kappa, c.beta);
    out << "params kappa=" << params.kappa << " beta=" << params.beta << " lambda1=" << params.lambda1
        << " lambda2=" << params.lambda2 << " l=" << params.l << '\n';

    const Setup s = build_setup(c);
    const auto& k = s.kernel_report;
    out << "kernel " << (s.kernel.form() == MemoryKernel::Form::prony ? "prony" : "table") << " mu0=" << k.mu0
        << " delta1=" << k.delta1 << " H1=" << k.h1 << " H2=" << k.h2 << " H3=" << k.h3 << " H4=" << k.h4 << '\n';
    const auto& cf = s.system.coefficients;
    out << "coefficients alpha1=" << cf.alpha1 << " alpha2=" << cf.alpha2 << " alpha3=" << cf.alpha3
        << " alpha4=" << cf.alpha4 << '\n';
    const auto& mg = s.system.memory;
    out << "memory Ns=" << mg.ns << " ds=" << mg.ds << " s_max=" << mg.s_max << " mass_error=" << mg.mass_error << '\n';
    out << "grid Nx=" << s.system.nx() << " h=" << s.system.h() << " dim=" << s.system.dim() << '\n';
    build_initial_state(s.initial, s.system.grid, s.system.memory);

    const MultiplierConfig m = choose_multipliers(params, k, cf, poincare_constant(s.system.grid), c.multipliers);
    out << "multipliers N=" << m.N << " N1=" << m.N1 << " N2=" << m.N2 << " gamma1=" << m.gamma1
        << " gamma2=" << m.gamma2 << " gamma_theory=" << m.gamma_theory << '\n';
    out << "PASS\n";
    return exit_pass;
  });
}

// --------------------------------------------------------------- simulate

int cmd_simulate(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Setup s = build_setup(load_config(config_path));
    Report pre;
    const auto m = try_multipliers(s, pre);
    const State init = build_initial_state(s.initial, s.system.grid, s.system.memory);

    SimulationOptions so;
    so.T = s.config.T;
    so.sample_every = s.config.sample_every;
    so.multipliers = m ? &*m : nullptr;
    spdlog::info("simulate: Nx={} Ns={} dt={} T={} scheme={}", s.system.nx(), s.system.ns(), s.scheme.dt, so.T,
                 std::string(to_string(s.scheme.scheme)));
    const SimulationResult res = simulate(s.system, init, s.scheme, so);

    Sink csv(pick(opts.csv_path, s.config.csv_path), out);
    write_diagnostics_csv(*csv, res.records);
    if (res.failure) write_truncation_marker(*csv, res.failed_step, res.failure->what());
    (*csv).flush();

    if (!s.config.checkpoint_path.empty()) write_checkpoint(s.config.checkpoint_path, res.final_state, s.config.hash);

    TrajectoryCertificate cert = certify_trajectory(s, res, so.multipliers);
    Report report;
    report.add_info("config_hash", [&] {
      std::ostringstream os;
      os << std::hex << std::setw(16) << std::setfill('0') << s.config.hash;
      return os.str();
    }());
    report.add_info("scheme", std::string(to_string(s.scheme.scheme)));
    report.add_info("Nx", static_cast<double>(s.system.nx()));
    report.add_info("Ns", static_cast<double>(s.system.ns()));
    report.add_info("dt", s.scheme.dt);
    report.add_info("mu0", s.kernel_report.mu0);
    report.add_info("delta1", s.kernel_report.delta1);
    if (m) add_multiplier_info(report, *m);
    for (auto& i : pre.info) report.info.push_back(i);
    for (auto& i : cert.report.info) report.info.push_back(i);
    for (auto& c : pre.checks) report.checks.push_back(c);
    report.check("simulation_completed", res.failure ? 0.0 : 1.0, ">=", 1.0);
    if (res.failure) report.add_info("failure", res.failure->what());
    for (auto& c : cert.report.checks) report.checks.push_back(c);

    if (s.system.dim() <= kDenseLimit) {
      const SpectrumReport sp = spectral_abscissa(assemble_generator(s.system));
      report.add_info("spectral_rate", 2.0 * std::abs(sp.abscissa));
      report.check("spectral_abscissa", sp.abscissa, "<=", kAbscissaTol);
    } else {
      report.add_info("spectral_abscissa", "skipped: dimension " + std::to_string(s.system.dim()) + " > 2000");
    }

    Sink rep(pick(opts.report_path, s.config.report_path), csv.to_file() ? out : err);
    report.write(*rep);
    return report.passed() ? exit_pass : exit_failure;
  });
}

// --------------------------------------------------------------- spectrum

int cmd_spectrum(const std::string& config_path, const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Setup s = build_setup(load_config(config_path));
    if (s.system.dim() > kDenseLimit)
      throw Error(ErrorKind::DimensionTooLarge, "spectrum",
                  "dimension " + std::to_string(s.system.dim()) + " exceeds the dense limit of 2000");
    const SpectrumReport sp = spectral_abscissa(assemble_generator(s.system));
    Sink csv(pick(opts.csv_path, ""), out);
    *csv << "re,im\n" << std::setprecision(17);
    for (const auto& z : sp.eigenvalues) *csv << z.real() << ',' << z.imag() << '\n';
    *csv << "# abscissa " << sp.abscissa << '\n';
    if (csv.to_file()) out << "abscissa " << std::setprecision(12) << sp.abscissa << '\n';
    return sp.abscissa <= kAbscissaTol ? exit_pass : exit_failure;
  });
}

// ----------------------------------------------------------- oracle-check

int cmd_oracle_check(const std::string& config_path, const CommandOptions& opts, std::ostream& out,
                     std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig base = load_config(config_path);
    std::vector<double> dts = base.oracle_dts;
    if (dts.empty()) dts = {base.dt, base.dt / 2, base.dt / 4};
    if (dts.size() < 2) throw Error(ErrorKind::InvalidArgument, "oracle.dts", "need at least two time steps");
    const double T = base.oracle_T.value_or(base.T);

    Sink csv(pick(opts.csv_path, ""), out);
    *csv << "dt,steps,Ns,error_H,order\n" << std::setprecision(10);
    std::vector<double> log_dt, log_err;
    double prev_err = 0.0, prev_dt = 0.0;
    for (double dt : dts) {
      RunConfig c = base;
      c.dt = dt;
      const Setup s = build_setup(c);
      if (s.system.dim() > kDenseLimit)
        throw Error(ErrorKind::DimensionTooLarge, "oracle",
                    "dimension " + std::to_string(s.system.dim()) + " exceeds 2000");
      const GeneratorAssembly a = assemble_generator(s.system);
      const State init = build_initial_state(s.initial, s.system.grid, s.system.memory);
      const Eigen::VectorXd exact = Oracle(a).evolve(init.flatten(), T);

      const long steps = std::lround(T / dt);
      if (std::abs(steps * dt - T) > 1e-9 * std::max(1.0, T))
        throw Error(ErrorKind::InvalidArgument, "oracle.T", "T must be a whole number of steps for every dt");
      const Stepper stepper(s.system, s.scheme);
      State st = init;
      for (long k = 0; k < steps; ++k) stepper.advance(st);
      const Eigen::VectorXd diff = st.flatten() - exact;
      const double e = std::sqrt(diff.dot(a.metric * diff) / exact.dot(a.metric * exact));

      *csv << dt << ',' << steps << ',' << s.system.ns() << ',' << e << ',';
      if (prev_dt > 0.0) *csv << std::log(prev_err / e) / std::log(prev_dt / dt);
      else *csv << "nan";
      *csv << '\n';
      prev_err = e;
      prev_dt = dt;
      log_dt.push_back(std::log(dt));
      log_err.push_back(std::log(e));
    }
    const double n = static_cast<double>(log_dt.size());
    const double mx = std::accumulate(log_dt.begin(), log_dt.end(), 0.0) / n;
    const double my = std::accumulate(log_err.begin(), log_err.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < log_dt.size(); ++i) {
      sxx += (log_dt[i] - mx) * (log_dt[i] - mx);
      sxy += (log_dt[i] - mx) * (log_err[i] - my);
    }
    const double order = sxy / sxx;
    const double required = base.scheme == Scheme::full_implicit_midpoint ? 1.9 : 0.9;
    *csv << "# fitted_order " << order << " required " << required << '\n';
    if (csv.to_file()) out << "fitted_order " << order << '\n';
    return order >= required ? exit_pass : exit_failure;
  });
}

// ------------------------------------------------------------------ sweep

namespace {

std::string resolve_param(const std::string& param) {
  if (RawConfig::known_key(param)) return param;
  for (const char* section : {"params", "time", "domain", "memory", "coefficients", "kernel", "initial", "analysis"}) {
    const std::string dotted = std::string(section) + "." + param;
    if (RawConfig::known_key(dotted)) return dotted;
  }
  throw Error(ErrorKind::ParseError, param, "unknown sweep parameter");
}

struct SweepRow {
  std::string value;
  double gamma_fit = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double K_fit = std::numeric_limits<double>::quiet_NaN();
  double abscissa = std::numeric_limits<double>::quiet_NaN();
  double mech_rate = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
};

SweepRow run_sweep_point(RawConfig raw, const std::string& key, const std::string& value) {
  SweepRow row;
  row.value = value;
  try {
    raw.set(key, value);
    RunConfig c = to_run_config(raw);
    c.backend = Backend::serial;
    const Setup s = build_setup(c, Strictness::limit_cases);
    const State init = build_initial_state(s.initial, s.system.grid, s.system.memory);
    SimulationOptions so;
    so.T = c.T;
    so.sample_every = c.sample_every;
    const SimulationResult res = simulate(s.system, init, s.scheme, so);
    if (res.failure) throw *res.failure;
    std::vector<double> t, e;
    for (const auto& smp : res.samples) {
      t.push_back(smp.t);
      e.push_back(smp.E);
    }
    const DecayFit fit = fit_decay(t, e, c.window_lo(), c.window_hi(), c.fit_method);
    row.gamma_fit = fit.gamma_fit;
    row.r2 = fit.r2;
    row.K_fit = fit.K_fit;
    if (s.system.dim() <= kDenseLimit) row.abscissa = spectral_abscissa(assemble_generator(s.system)).abscissa;
    row.mech_rate = mechanical_rate(s.system);
  } catch (const std::exception& ex) {
    row.status = std::string("error: ") + ex.what();
    std::replace(row.status.begin(), row.status.end(), ',', ';');
  }
  return row;
}

}  // namespace

int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<std::string>& values,
              const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (values.empty()) throw Error(ErrorKind::ParseError, "--values", "no sweep values given");
    const RawConfig raw = RawConfig::load(config_path);
    const std::string key = resolve_param(param);
    to_run_config(raw);

    std::vector<std::future<SweepRow>> jobs;
    for (const auto& v : values) jobs.push_back(std::async(std::launch::async, run_sweep_point, raw, key, v));
    std::vector<SweepRow> rows;
    for (auto& j : jobs) rows.push_back(j.get());

    Sink csv(pick(opts.csv_path, ""), out);
    *csv << "param,value,gamma_fit,r2,K_fit,abscissa,spectral_rate,mechanical_rate,status\n" << std::setprecision(10);
    bool ok = true;
    for (const auto& r : rows) {
      *csv << key << ',' << r.value << ',' << r.gamma_fit << ',' << r.r2 << ',' << r.K_fit << ',' << r.abscissa << ','
           << 2.0 * std::abs(r.abscissa) << ',' << r.mech_rate << ',' << r.status << '\n';
      ok = ok && r.status == "ok";
    }
    return ok ? exit_pass : exit_failure;
  });
}

void init_logging() {
  auto logger = spdlog::stderr_color_mt("thermobeam");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("THERMOBEAM_LOG_LEVEL");
  auto level = env ? spdlog::level::from_str(env) : spdlog::level::warn;
  if (env && level == spdlog::level::off && std::string_view(env) != "off") level = spdlog::level::warn;
  spdlog::set_level(level);
}

}  // namespace thermobeam
