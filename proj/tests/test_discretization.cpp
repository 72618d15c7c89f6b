#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "thermobeam/generator.hpp"
#include "thermobeam/kernels.hpp"
#include "thermobeam/state.hpp"
#include "thermobeam/system.hpp"

using namespace thermobeam;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

System small_system(double beta, const MemoryKernel& kernel, int nx = 8, int ns = 6, double ds = 0.5) {
  SpatialGrid grid = build_spatial_grid(1.0, nx);
  CoefficientField cf = sample_coefficients(grid, Profile::polynomial({1.0, 1.0, -1.0}), Profile::constant(0.7));
  return make_system(grid, cf, derive_params(0.5, 1.0, 0.5, beta, Strictness::limit_cases),
                     build_memory_grid_fixed(kernel, ds, ns));
}

double max_abs(const SparseMatrix& m) { return Eigen::MatrixXd(m).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("spatial grid") {
  CHECK(kind_of([] { build_spatial_grid(1.0, 3); }) == ErrorKind::GridTooCoarse);
  const SpatialGrid g = build_spatial_grid(1.0, 4);
  CHECK(g.h == doctest::Approx(0.2));
  REQUIRE(g.nodes.size() == 4);
  CHECK(g.nodes[0] == doctest::Approx(0.2));
  CHECK(g.nodes[3] == doctest::Approx(0.8));
  CHECK(g.closed_nodes().size() == 6);
  CHECK(build_spatial_grid(2.0, 7).h == doctest::Approx(0.25));
}

TEST_CASE("memory truncation") {
  SUBCASE("unit exponential") {
    const MemoryGrid m = build_memory_grid(MemoryKernel::prony({1.0}, {1.0}), 0.01, 1e-8);
    CHECK(m.s_max >= std::log(1e8));
    CHECK(m.ns == doctest::Approx(1843).epsilon(0.002));
    CHECK(m.weights.back() == doctest::Approx(0.005));
    CHECK(m.mass_error < 1e-3);
  }
  SUBCASE("fast exponential") {
    const MemoryGrid m = build_memory_grid(MemoryKernel::prony({2.0}, {3.0}), 0.1, 1e-6);
    CHECK(m.s_max >= std::log(1e6) / 3.0);
    CHECK(m.s_max <= std::log(1e6) / 3.0 + 0.2);
  }
  SUBCASE("table exhausted") {
    const MemoryKernel k = MemoryKernel::tabulated({0.0, 0.5, 1.0}, {1.0, 0.6, 0.4});
    CHECK(kind_of([&] { build_memory_grid(k, 0.01, 1e-12); }) == ErrorKind::TruncationUnreachable);
  }
}

TEST_CASE("operator structure") {
  const System sys = small_system(1.0, MemoryKernel::prony({1.0}, {1.0}), 12);
  const DiscreteOperators& op = sys.ops;
  CHECK(max_abs(SparseMatrix(op.d1 + SparseMatrix(op.d1.transpose()))) == 0.0);
  CHECK(max_abs(SparseMatrix(op.lap + SparseMatrix(op.grad.transpose() * op.grad))) < 1e-12 * max_abs(op.lap));
  const Eigen::MatrixXd bih(op.bih);
  CHECK((bih - bih.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(bih).eigenvalues()(0) > 0.0);
  CHECK(poincare_constant(sys.grid) == doctest::Approx(1.0 / (M_PI * M_PI)).epsilon(0.01));
}

TEST_CASE("clamped beam eigenvalue converges") {
  double previous_error = 1e300;
  for (int nx : {16, 32, 64}) {
    const SpatialGrid g = build_spatial_grid(1.0, nx);
    const DiscreteOperators op =
        build_operators(g, sample_coefficients(g, Profile::constant(1.0), Profile::constant(1.0)));
    const double lmin =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(op.bih)).eigenvalues()(0);
    const double error = std::abs(lmin - 500.5639);
    CHECK(error < previous_error);
    previous_error = error;
  }
  CHECK(previous_error / 500.5639 < 0.01);
}

TEST_CASE("generator blocks") {
  const MemoryKernel k = MemoryKernel::prony({1.0}, {1.0});
  const System coupled = small_system(1.0, k);
  const GeneratorAssembly a = assemble_generator(coupled);
  CHECK(a.layout.dim() == coupled.nx() * (3 + coupled.ns()));
  CHECK(a.generator.rows() == a.layout.dim());

  SUBCASE("beta = 0 decouples the mechanical rows") {
    const GeneratorAssembly d = assemble_generator(small_system(0.0, k));
    const Eigen::MatrixXd A(d.generator);
    const int n = d.layout.nx;
    CHECK(A.block(0, 2 * n, 2 * n, A.cols() - 2 * n).cwiseAbs().maxCoeff() == 0.0);
    CHECK(A.block(2 * n, 0, n, 2 * n).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("vanishing kernel gives the Fourier limit") {
    const System z = small_system(1.0, MemoryKernel::prony({0.0}, {1.0}));
    const Eigen::MatrixXd A(assemble_generator(z).generator);
    const int n = z.nx();
    CHECK(A.block(2 * n, 3 * n, n, A.cols() - 3 * n).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::MatrixXd expected = z.params.l * Eigen::MatrixXd(z.ops.lap);
    CHECK((A.block(2 * n, 2 * n, n, n) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("metric is positive definite") {
    const Eigen::MatrixXd H(a.metric);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues()(0) > 0.0);
  }
  SUBCASE("symmetric part is negative semidefinite") {
    const Eigen::MatrixXd HA = Eigen::MatrixXd(a.metric) * Eigen::MatrixXd(a.generator);
    const Eigen::MatrixXd sym = HA + HA.transpose();
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().maxCoeff() <= 1e-10 * sym.norm());
  }
}

TEST_CASE("coordinate export") {
  SparseMatrix m(3, 3);
  m.insert(2, 0) = 1.5;
  m.insert(0, 1) = -2.0;
  m.makeCompressed();
  std::ostringstream os;
  write_coo(m, os);
  std::istringstream in(os.str());
  int r, c;
  double v;
  in >> r >> c >> v;
  CHECK((r == 0 && c == 1 && v == -2.0));
  in >> r >> c >> v;
  CHECK((r == 2 && c == 0 && v == 1.5));
}

TEST_CASE("initial state") {
  const SpatialGrid g = build_spatial_grid(1.0, 8);
  const MemoryGrid m = build_memory_grid_fixed(MemoryKernel::prony({1.0}, {1.0}), 0.25, 5);

  SUBCASE("zero data") {
    const State st = build_initial_state(InitialData{}, g, m);
    CHECK(st.flatten().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("constant past") {
    InitialData init;
    init.theta0 = Profile::sine(1, 1.0, 1.0);
    const State st = build_initial_state(init, g, m);
    for (int k = 0; k < m.ns; ++k)
      for (int i = 0; i < g.nx; ++i)
        CHECK(st.eta.col(k)(i) == doctest::Approx(m.s[k] * std::sin(M_PI * g.nodes[i])));
  }
  SUBCASE("history without inflow zero") {
    InitialData init;
    init.history = HistoryMode::explicit_history;
    init.eta0 = [](double x, double) { return std::sin(M_PI * x); };
    CHECK(kind_of([&] { build_initial_state(init, g, m); }) == ErrorKind::IncompatibleBoundary);
  }
  SUBCASE("displacement with a boundary slope") {
    InitialData init;
    init.u0 = Profile::sine(1, 1.0, 1.0);
    CHECK(kind_of([&] { build_initial_state(init, g, m); }) == ErrorKind::IncompatibleBoundary);
  }
  SUBCASE("flatten round trip") {
    InitialData init;
    init.u0 = Profile::polynomial({0, 0, 1, -2, 1});
    init.theta0 = Profile::sine(2, 0.5, 1.0);
    const State st = build_initial_state(init, g, m);
    const State back = State::unflatten(st.flatten(), g.nx, m.ns);
    CHECK((back.flatten() - st.flatten()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("history ring shift") {
  HistoryField f(3, 4);
  for (int k = 0; k < 4; ++k) f.col(k).setConstant(k + 1.0);
  f.shift_in();
  CHECK(f.col(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.col(1)(0) == 1.0);
  CHECK(f.col(3)(2) == 3.0);
}

TEST_CASE("history kernels agree across backends") {
  HistoryField f(37, 53);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 53; ++k)
    for (int i = 0; i < 37; ++i) f.col(k)(i) = normal(rng);
  f.shift_in();
  std::vector<double> w(53);
  for (double& x : w) x = normal(rng);
  const double h = 1.0 / 38.0;

  for (int lag : {0, 1}) {
    Eigen::VectorXd a(37), b(37);
    serial::column_combination(f, w, lag, a.data());
    omp::column_combination(f, w, lag, b.data());
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
  }
  const double e1 = serial::gradient_energy(f, w, h), e2 = omp::gradient_energy(f, w, h);
  CHECK(e2 == doctest::Approx(e1).epsilon(1e-12));
  const double d1 = serial::gradient_energy_of_differences(f, w, h);
  const double d2 = omp::gradient_energy_of_differences(f, w, h);
  CHECK(d2 == doctest::Approx(d1).epsilon(1e-12));
  CHECK(omp::gradient_energy(f, w, h) == e2);

  HistoryField g1 = f, g2 = f;
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(37, -1.0, 1.0);
  serial::add_to_all_columns(g1, x.data(), 0.3);
  omp::add_to_all_columns(g2, x.data(), 0.3);
  for (int k = 0; k < 53; ++k) CHECK((g1.col(k) - g2.col(k)).cwiseAbs().maxCoeff() == 0.0);
}
