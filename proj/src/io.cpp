#include "thermobeam/io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace thermobeam {

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticsRecord>& records) {
  out << kCsvHeader << '\n' << std::setprecision(17);
  for (const auto& r : records)
    out << r.t << ',' << r.E << ',' << r.D << ',' << r.dE_numeric << ',' << r.identity_residual << ',' << r.F1 << ','
        << r.F2 << ',' << r.I << ',' << r.L << '\n';
}

void write_truncation_marker(std::ostream& out, long step, const std::string& reason) {
  out << "# truncated at step " << step << ": " << reason << '\n';
  out.flush();
}

std::vector<std::vector<double>> read_numeric_table(const std::string& path, int min_cols, int max_cols) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ParseError, path, "cannot open table file");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::vector<double> row;
    std::string tok;
    while (is >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno), "not a number: " + tok);
      }
    }
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) < min_cols || static_cast<int>(row.size()) > max_cols)
      throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno),
                  "expected " + std::to_string(min_cols) + ".." + std::to_string(max_cols) + " columns");
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorKind::ParseError, path + ":" + std::to_string(lineno), "inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw Error(ErrorKind::ParseError, path, "table needs at least two rows");
  return rows;
}

MemoryKernel read_kernel_table(const std::string& path) {
  const auto rows = read_numeric_table(path, 2, 3);
  std::vector<double> s, mu, dmu;
  for (const auto& r : rows) {
    s.push_back(r[0]);
    mu.push_back(r[1]);
    if (r.size() == 3) dmu.push_back(r[2]);
  }
  try {
    return MemoryKernel::tabulated(std::move(s), std::move(mu), std::move(dmu));
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, path, e.what());
  }
}

Profile read_profile_table(const std::string& path) {
  const auto rows = read_numeric_table(path, 2, 2);
  std::vector<double> x, y;
  for (const auto& r : rows) {
    x.push_back(r[0]);
    y.push_back(r[1]);
  }
  try {
    return Profile::table(std::move(x), std::move(y));
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, path, e.what());
  }
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

void write_row(std::ostream& out, const double* x, int n) {
  for (int i = 0; i < n; ++i) out << ' ' << x[i];
  out << '\n';
}

void read_row(std::istream& in, double* x, int n, const char* what) {
  for (int i = 0; i < n; ++i)
    if (!(in >> x[i])) throw Error(ErrorKind::ParseError, "checkpoint", std::string("truncated ") + what + " row");
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) throw Error(ErrorKind::ParseError, "checkpoint", "expected '" + word + "', got '" + got + "'");
}

}  // namespace

void write_checkpoint(std::ostream& out, const State& st, std::uint64_t config_hash) {
  const int n = st.nx();
  out << "thermobeam-checkpoint " << kCheckpointVersion << '\n';
  out << "nx " << n << " ns " << st.ns() << " t " << std::setprecision(17) << st.t << " config " << std::hex
      << std::setw(16) << std::setfill('0') << config_hash << std::dec << std::setfill(' ') << '\n';
  out << "u";
  write_row(out, st.u.data(), n);
  out << "v";
  write_row(out, st.v.data(), n);
  out << "theta";
  write_row(out, st.theta.data(), n);
  for (int k = 0; k < st.ns(); ++k) {
    out << "eta " << k;
    write_row(out, st.eta.column(k), n);
  }
}

void write_checkpoint(const std::string& path, const State& state, std::uint64_t config_hash) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::InvalidArgument, path, "cannot open for writing");
  write_checkpoint(f, state, config_hash);
}

Checkpoint read_checkpoint(std::istream& in) {
  expect(in, "thermobeam-checkpoint");
  int version = 0;
  if (!(in >> version) || version != kCheckpointVersion)
    throw Error(ErrorKind::ParseError, "checkpoint", "unsupported checkpoint version " + std::to_string(version));
  int nx = 0, ns = 0;
  double t = 0.0;
  std::string hex;
  expect(in, "nx");
  in >> nx;
  expect(in, "ns");
  in >> ns;
  expect(in, "t");
  in >> t;
  expect(in, "config");
  in >> hex;
  if (!in || nx < 1 || ns < 1) throw Error(ErrorKind::ParseError, "checkpoint", "malformed header");
  Checkpoint cp;
  cp.config_hash = std::stoull(hex, nullptr, 16);
  cp.state = State::zero(nx, ns, t);
  expect(in, "u");
  read_row(in, cp.state.u.data(), nx, "u");
  expect(in, "v");
  read_row(in, cp.state.v.data(), nx, "v");
  expect(in, "theta");
  read_row(in, cp.state.theta.data(), nx, "theta");
  for (int k = 0; k < ns; ++k) {
    expect(in, "eta");
    int idx = -1;
    in >> idx;
    if (idx != k) throw Error(ErrorKind::ParseError, "checkpoint", "eta rows out of order");
    read_row(in, cp.state.eta.column(k), nx, "eta");
  }
  return cp;
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::ParseError, path, "cannot open checkpoint");
  return read_checkpoint(f);
}

}  // namespace thermobeam
