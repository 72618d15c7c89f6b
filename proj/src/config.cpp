#include "thermobeam/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "thermobeam/io.hpp"

namespace thermobeam {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"domain", {"L", "Nx"}},
      {"params", {"kappa", "beta", "lambda1", "lambda2"}},
      {"coefficients", {"p", "g"}},
      {"kernel", {"type", "amplitudes", "rates", "path"}},
      {"memory", {"trunc_tol", "ns", "ds"}},
      {"time", {"dt", "T", "sample_every", "scheme"}},
      {"initial", {"u0", "v0", "theta0", "history", "eta0_x", "eta0_s"}},
      {"output", {"csv", "report", "checkpoint"}},
      {"analysis",
       {"window_start", "window_end", "fit_method", "samples", "seed", "Ckappa", "sigma1", "sigma2", "sigma3", "N1",
        "backend"}},
      {"oracle", {"dts", "T"}},
  };
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_error(const std::string& where, const std::string& msg) {
  throw Error(ErrorKind::ParseError, where, msg);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  parse_error(key, "not a number: '" + v + "'");
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  parse_error(key, "not an integer: '" + v + "'");
}

std::vector<std::string> tokens(const std::string& v) {
  std::string s = v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& t : tokens(v)) out.push_back(to_double(key, t));
  if (out.empty()) parse_error(key, "empty list");
  return out;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).string();
}

}  // namespace

bool RawConfig::known_key(const std::string& dotted) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) return false;
  const auto it = schema().find(dotted.substr(0, dot));
  return it != schema().end() && it->second.count(dotted.substr(dot + 1)) > 0;
}

RawConfig RawConfig::parse(const std::string& text, const std::string& base_dir) {
  RawConfig cfg;
  cfg.base_dir_ = base_dir;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') parse_error(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema().count(section)) parse_error(where, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_error(where, "expected key = value");
    if (section.empty()) parse_error(where, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string dotted = section + "." + key;
    if (!known_key(dotted)) parse_error(where, "unknown key '" + key + "' in [" + section + "]");
    if (cfg.entries_.count(dotted)) parse_error(where, "duplicate key '" + dotted + "'");
    cfg.entries_[dotted] = value;
  }
  return cfg;
}

RawConfig RawConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ParseError, path, "cannot open run file");
  std::stringstream ss;
  ss << f.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse(ss.str(), dir.empty() ? "." : dir.string());
}

std::optional<std::string> RawConfig::get(const std::string& dotted) const {
  const auto it = entries_.find(dotted);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void RawConfig::set(const std::string& dotted, const std::string& value) {
  if (!known_key(dotted)) throw Error(ErrorKind::ParseError, dotted, "unknown key");
  entries_[dotted] = value;
}

std::uint64_t RawConfig::hash() const {
  std::string canon;
  for (const auto& [k, v] : entries_) canon += k + "=" + v + "\n";
  return fnv1a(canon);
}

RunConfig to_run_config(const RawConfig& raw) {
  RunConfig c;
  c.base_dir = raw.base_dir();
  c.hash = raw.hash();
  auto num = [&](const char* key, double& out) {
    if (auto v = raw.get(key)) out = to_double(key, *v);
  };
  auto integer = [&](const char* key, int& out) {
    if (auto v = raw.get(key)) out = static_cast<int>(to_long(key, *v));
  };
  auto text = [&](const char* key, std::string& out) {
    if (auto v = raw.get(key)) out = *v;
  };

  num("domain.L", c.L);
  integer("domain.Nx", c.Nx);
  num("params.kappa", c.kappa);
  num("params.beta", c.beta);
  num("params.lambda1", c.lambda1);
  num("params.lambda2", c.lambda2);
  text("coefficients.p", c.p_spec);
  text("coefficients.g", c.g_spec);

  text("kernel.type", c.kernel_type);
  if (c.kernel_type != "prony" && c.kernel_type != "table")
    parse_error("kernel.type", "expected prony or table, got '" + c.kernel_type + "'");
  if (auto v = raw.get("kernel.amplitudes")) c.amplitudes = to_list("kernel.amplitudes", *v);
  if (auto v = raw.get("kernel.rates")) c.rates = to_list("kernel.rates", *v);
  if (auto v = raw.get("kernel.path")) c.kernel_path = resolve(*v, c.base_dir);
  if (c.kernel_type == "table" && c.kernel_path.empty()) parse_error("kernel.path", "table kernel needs a path");

  num("memory.trunc_tol", c.trunc_tol);
  if (auto v = raw.get("memory.ns")) c.ns = static_cast<int>(to_long("memory.ns", *v));
  if (auto v = raw.get("memory.ds")) c.ds = to_double("memory.ds", *v);
  if (c.ds && !c.ns) parse_error("memory.ds", "memory.ds requires memory.ns");

  num("time.dt", c.dt);
  num("time.T", c.T);
  integer("time.sample_every", c.sample_every);
  if (auto v = raw.get("time.scheme")) {
    if (*v == "split_semilagrangian") c.scheme = Scheme::split_semilagrangian;
    else if (*v == "full_implicit_midpoint") c.scheme = Scheme::full_implicit_midpoint;
    else parse_error("time.scheme", "unknown scheme '" + *v + "'");
  }

  text("initial.u0", c.u0);
  text("initial.v0", c.v0);
  text("initial.theta0", c.theta0);
  text("initial.eta0_x", c.eta0_x);
  text("initial.eta0_s", c.eta0_s);
  if (auto v = raw.get("initial.history")) {
    if (*v == "zero") c.history = HistoryMode::zero;
    else if (*v == "constant_past") c.history = HistoryMode::constant_past;
    else if (*v == "explicit") c.history = HistoryMode::explicit_history;
    else parse_error("initial.history", "unknown history mode '" + *v + "'");
  }

  if (auto v = raw.get("output.csv")) c.csv_path = resolve(*v, c.base_dir);
  if (auto v = raw.get("output.report")) c.report_path = resolve(*v, c.base_dir);
  if (auto v = raw.get("output.checkpoint")) c.checkpoint_path = resolve(*v, c.base_dir);

  if (auto v = raw.get("analysis.window_start")) c.window_start = to_double("analysis.window_start", *v);
  if (auto v = raw.get("analysis.window_end")) c.window_end = to_double("analysis.window_end", *v);
  if (auto v = raw.get("analysis.fit_method")) {
    if (*v == "peak_envelope") c.fit_method = FitMethod::peak_envelope;
    else if (*v == "plain_lsq") c.fit_method = FitMethod::plain_lsq;
    else parse_error("analysis.fit_method", "unknown fit method '" + *v + "'");
  }
  integer("analysis.samples", c.dissipativity_samples);
  if (auto v = raw.get("analysis.seed")) c.seed = static_cast<std::uint64_t>(to_long("analysis.seed", *v));
  num("analysis.Ckappa", c.multipliers.Ckappa);
  num("analysis.sigma1", c.multipliers.sigma1);
  num("analysis.sigma2", c.multipliers.sigma2);
  if (auto v = raw.get("analysis.sigma3")) c.multipliers.sigma3 = to_double("analysis.sigma3", *v);
  num("analysis.N1", c.multipliers.N1);
  if (auto v = raw.get("analysis.backend")) {
    if (*v == "openmp") c.backend = Backend::openmp;
    else if (*v == "serial") c.backend = Backend::serial;
    else parse_error("analysis.backend", "unknown backend '" + *v + "'");
  }

  if (auto v = raw.get("oracle.dts")) c.oracle_dts = to_list("oracle.dts", *v);
  if (auto v = raw.get("oracle.T")) c.oracle_T = to_double("oracle.T", *v);
  return c;
}

Profile parse_profile(const std::string& spec, double length, const std::string& base_dir) {
  const auto t = tokens(spec);
  if (t.empty()) parse_error("profile", "empty profile spec");
  const std::string& kind = t[0];
  auto args = [&](std::size_t from) {
    std::vector<double> out;
    for (std::size_t i = from; i < t.size(); ++i) out.push_back(to_double(spec, t[i]));
    return out;
  };
  if (kind == "constant") {
    const auto a = args(1);
    if (a.size() != 1) parse_error(spec, "constant takes one value");
    return Profile::constant(a[0]);
  }
  if (kind == "polynomial") {
    const auto a = args(1);
    if (a.empty()) parse_error(spec, "polynomial needs coefficients");
    return Profile::polynomial(a);
  }
  if (kind == "sine") {
    const auto a = args(1);
    if (a.size() != 2) parse_error(spec, "sine takes a mode and an amplitude");
    return Profile::sine(static_cast<int>(a[0]), a[1], length);
  }
  if (kind == "table") {
    if (t.size() != 2) parse_error(spec, "table takes one path");
    return read_profile_table(resolve(t[1], base_dir));
  }
  if (t.size() == 1) return Profile::constant(to_double(spec, kind));
  parse_error(spec, "unknown profile kind '" + kind + "'");
}

Setup build_setup(const RunConfig& c, Strictness strictness) {
  const PhysicalParams params = derive_params(c.lambda1, c.lambda2, c.kappa, c.beta, strictness);
  SpatialGrid grid = build_spatial_grid(c.L, c.Nx);
  CoefficientField coeffs =
      sample_coefficients(grid, parse_profile(c.p_spec, c.L, c.base_dir), parse_profile(c.g_spec, c.L, c.base_dir));

  MemoryKernel kernel = c.kernel_type == "table" ? read_kernel_table(c.kernel_path) : [&] {
    try {
      return MemoryKernel::prony(c.amplitudes, c.rates);
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, "kernel", e.what());
    }
  }();
  KernelReport report = validate_kernel(kernel, 256);
  report.require();

  MemoryGrid memory = c.ns ? build_memory_grid_fixed(kernel, c.ds.value_or(c.dt), *c.ns)
                           : build_memory_grid(kernel, c.dt, c.trunc_tol);

  InitialData init;
  init.u0 = parse_profile(c.u0, c.L, c.base_dir);
  init.v0 = parse_profile(c.v0, c.L, c.base_dir);
  init.theta0 = parse_profile(c.theta0, c.L, c.base_dir);
  init.history = c.history;
  if (c.history == HistoryMode::explicit_history) {
    const Profile ex = parse_profile(c.eta0_x, c.L, c.base_dir);
    const Profile es = parse_profile(c.eta0_s, c.L, c.base_dir);
    init.eta0 = [ex, es](double x, double s) { return ex.value(x) * es.value(s); };
  }

  if (c.sample_every < 1) throw Error(ErrorKind::InvalidArgument, "time.sample_every", "must be >= 1");
  if (!(c.T >= 0.0)) throw Error(ErrorKind::InvalidArgument, "time.T", "must be >= 0");

  SchemeConfig scheme;
  scheme.dt = c.dt;
  scheme.scheme = c.scheme;
  scheme.backend = c.backend;

  return Setup{c, std::move(kernel), std::move(report),
               make_system(std::move(grid), std::move(coeffs), params, std::move(memory)), std::move(init), scheme};
}

}  // namespace thermobeam
