#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

#include "thermobeam/stepper.hpp"

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

System beam(int nx, int ns, double ds, double kappa = 0.5, double beta = 1.0, double g0 = 1.0,
            const MemoryKernel& kernel = MemoryKernel::prony({1.0}, {1.0})) {
  SpatialGrid grid = build_spatial_grid(1.0, nx);
  CoefficientField cf = sample_coefficients(grid, Profile::polynomial({1.0, 0.5}), Profile::constant(g0));
  return make_system(grid, cf, derive_params(0.5, 1.0, kappa, beta, Strictness::limit_cases),
                     build_memory_grid_fixed(kernel, ds, ns));
}

State excited(const System& sys) {
  InitialData init;
  init.u0 = Profile::polynomial({0, 0, 1, -2, 1});
  init.v0 = Profile::polynomial({0, 0, -1, 2, -1});
  init.theta0 = Profile::sine(1, 1.0, 1.0);
  return build_initial_state(init, sys.grid, sys.memory);
}

double quad(const GeneratorAssembly& a, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return x.dot(a.metric * y);
}

}  // namespace

TEST_CASE("functionals vanish at the origin") {
  const System sys = beam(8, 10, 0.2);
  const State z = State::zero(8, 10);
  CHECK(energy(sys, z) == 0.0);
  CHECK(dissipation(sys, z) == 0.0);
  CHECK(lyap_F1(sys, z) == 0.0);
  CHECK(lyap_F2(sys, z) == 0.0);
  CHECK(lyap_I(sys, z) == 0.0);
}

TEST_CASE("energy of a pure temperature mode") {
  const System sys = beam(63, 4, 0.2);
  State st = State::zero(63, 4);
  for (int i = 0; i < 63; ++i) st.theta[i] = 3.0 * std::sin(M_PI * sys.grid.nodes[static_cast<std::size_t>(i)]);
  CHECK(energy(sys, st) == doctest::Approx(0.25 * 9.0).epsilon(1e-6));
}

TEST_CASE("energy and dissipation match the assembled forms") {
  const System sys = beam(10, 12, 0.25);
  const GeneratorAssembly a = assemble_generator(sys);
  const State st = excited(sys);
  const Eigen::VectorXd phi = st.flatten();
  CHECK(energy(sys, st) == doctest::Approx(0.5 * quad(a, phi, phi)).epsilon(1e-12));
  CHECK(dissipation(sys, st) == doctest::Approx(quad(a, phi, a.generator * phi)).epsilon(1e-10));
  const DissipationBreakdown d = dissipation_breakdown(sys, st);
  CHECK(d.damping <= 0.0);
  CHECK(d.conduction <= 0.0);
  CHECK(d.memory_upwind <= 0.0);
  CHECK(d.memory_analytic <= 0.0);
}

TEST_CASE("rayleigh probes") {
  const System sys = beam(8, 6, 0.5);
  const GeneratorAssembly a = assemble_generator(sys);
  const double h = sys.h();
  SUBCASE("displacement alone is not dissipated") {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(a.layout.dim());
    phi.segment(0, 8) = Eigen::VectorXd::LinSpaced(8, 1.0, 2.0);
    CHECK(std::abs(quad(a, phi, a.generator * phi)) <= 1e-10 * quad(a, phi, phi));
  }
  SUBCASE("unit velocity") {
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(a.layout.dim());
    phi[a.layout.v() + 3] = 1.0;
    CHECK(quad(a, phi, a.generator * phi) == doctest::Approx(-2.0 * h));
  }
  SUBCASE("random states") {
    const DissipativityReport r = check_dissipativity(a, 200, 42);
    CHECK(r.worst_ratio <= 1e-10);
    CHECK(r.samples == 200);
    CHECK(check_dissipativity(a, 200, 42).worst_ratio == r.worst_ratio);
  }
}

TEST_CASE("velocity-only dissipation") {
  const System sys = beam(8, 6, 0.5);
  State st = State::zero(8, 6);
  st.v = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
  CHECK(dissipation(sys, st) == doctest::Approx(-2.0 * sys.h() * st.v.squaredNorm()));
}

TEST_CASE("multiplier derivatives match the flow") {
  const System sys = beam(6, 8, 0.5);
  const GeneratorAssembly a = assemble_generator(sys);
  const Oracle oracle(a);
  const State st = excited(sys);
  const Snapshot s = snapshot(sys, st);
  const double eps = 1e-4;
  const State ahead = State::unflatten(oracle.evolve(st.flatten(), eps), sys.nx(), sys.ns());
  const double dF1 = (lyap_F1(sys, ahead) - lyap_F1(sys, st)) / eps;
  const double dF2 = (lyap_F2(sys, ahead) - lyap_F2(sys, st)) / eps;
  CHECK(s.dF1 == doctest::Approx(dF1).epsilon(1e-3));
  CHECK(s.dF2 == doctest::Approx(dF2).epsilon(1e-3));
  CHECK(s.E == doctest::Approx(energy(sys, st)));
  CHECK(s.bending > 0.0);
  CHECK(s.memory_prime <= 0.0);
}

TEST_CASE("multiplier selection") {
  const PhysicalParams p = derive_params(0.5, 1.0, 1.0, 1.0);
  const KernelReport k = validate_kernel(MemoryKernel::prony({1.0}, {1.0}), 256);
  const std::vector<double> one(10, 1.0);
  const CoefficientField cf = certify_coefficients(one, one);
  const double Cp = 1.0 / (M_PI * M_PI);

  SUBCASE("unit data") {
    const MultiplierConfig m = choose_multipliers(p, k, cf, Cp, {.sigma3 = 1.0});
    CHECK(m.N2 == doctest::Approx(1.1));
    CHECK(m.lambda > 0.0);
    CHECK(m.gamma1 > 0.0);
    CHECK(m.K_theory >= 1.0);
  }
  SUBCASE("sigma3 at twice the mass") {
    CHECK(kind_of([&] { choose_multipliers(p, k, cf, Cp, {.sigma3 = 2.0}); }) == ErrorKind::InfeasibleMultipliers);
  }
  SUBCASE("Ckappa below five") {
    CHECK(kind_of([&] { choose_multipliers(p, k, cf, Cp, {.Ckappa = 4.0}); }) == ErrorKind::InfeasibleMultipliers);
  }
  SUBCASE("degenerate weights reduce L to E") {
    const System sys = beam(8, 10, 0.2);
    const State st = excited(sys);
    MultiplierConfig m;
    m.N = 1.0;
    CHECK(lyapunov_total(sys, st, m) == doctest::Approx(energy(sys, st)));
    CHECK(lyapunov_total(sys, State::zero(8, 10), m) == 0.0);
  }
}

TEST_CASE("damped oscillator modes") {
  const double g0 = 1.5;
  const System sys = beam(10, 4, 0.5, 0.0, 0.0, g0, MemoryKernel::prony({1e-12}, {1.0}));
  const Eigen::MatrixXd A(assemble_generator(sys).generator);
  const Eigen::MatrixXd uv = A.topLeftCorner(20, 20);
  Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(uv).eigenvalues();
  const Eigen::VectorXd omega2 =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Eigen::MatrixXd(sys.ops.bih)).eigenvalues();
  for (int j = 0; j < omega2.size(); ++j) {
    const std::complex<double> root = std::sqrt(std::complex<double>(g0 * g0 - omega2[j]));
    for (const std::complex<double> expected : {-g0 + root, -g0 - root}) {
      double best = 1e300;
      for (const auto& z : eig) best = std::min(best, std::abs(z - expected));
      CHECK(best <= 1e-6 * std::abs(expected));
    }
  }
  const SpectrumReport spec = spectral_abscissa(assemble_generator(sys));
  CHECK(spec.abscissa <= 1e-10);
  double uv_abscissa = -1e300;
  for (const auto& z : eig) uv_abscissa = std::max(uv_abscissa, z.real());
  CHECK(uv_abscissa == doctest::Approx(-g0));
}

TEST_CASE("spectrum and resolvent") {
  const System sys = beam(8, 12, 0.25);
  const GeneratorAssembly a = assemble_generator(sys);
  const SpectrumReport spec = spectral_abscissa(a);
  CHECK_FALSE(spec.estimated);
  CHECK(spec.eigenvalues.size() == static_cast<std::size_t>(a.layout.dim()));
  CHECK(spec.abscissa < 0.0);
  CHECK(std::is_sorted(spec.eigenvalues.begin(), spec.eigenvalues.end(),
                       [](auto x, auto y) { return x.real() < y.real(); }));
  const ResolventReport r = resolvent_check(a);
  CHECK(std::isfinite(r.condition_estimate));
  CHECK(r.condition_estimate >= 1.0);
}

TEST_CASE("decay fit") {
  std::vector<double> t, E;
  for (int i = 0; i <= 200; ++i) {
    t.push_back(0.05 * i);
    E.push_back(3.0 * std::exp(-2.0 * t.back()));
  }
  for (FitMethod method : {FitMethod::plain_lsq, FitMethod::peak_envelope}) {
    const DecayFit f = fit_decay(t, E, 1.0, 9.0, method);
    CHECK(f.gamma_fit == doctest::Approx(2.0));
    CHECK(f.K_fit == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
  }
  CHECK(kind_of([&] { fit_decay(t, E, 1.0, 1.2, FitMethod::plain_lsq); }) == ErrorKind::WindowTooSmall);
  const std::vector<double> zeros(t.size(), 0.0);
  CHECK(kind_of([&] { fit_decay(t, zeros, 1.0, 9.0, FitMethod::plain_lsq); }) == ErrorKind::EnergyUnderflow);
  CHECK(to_string(FitMethod::peak_envelope) == "peak_envelope");
}

TEST_CASE("oscillating decay fit follows the envelope") {
  std::vector<double> t, E;
  for (int i = 0; i <= 2000; ++i) {
    t.push_back(0.005 * i);
    E.push_back(std::exp(-t.back()) * (1.5 + std::cos(6.0 * t.back())));
  }
  const DecayFit f = fit_decay(t, E, 2.0, 10.0, FitMethod::peak_envelope);
  CHECK(f.gamma_fit == doctest::Approx(1.0).epsilon(0.02));
}
