#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

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

System beam(int nx, int ns, double ds) {
  SpatialGrid grid = build_spatial_grid(1.0, nx);
  CoefficientField cf = sample_coefficients(grid, Profile::constant(1.0), Profile::constant(1.0));
  return make_system(grid, cf, derive_params(0.5, 1.0, 0.5, 1.0),
                     build_memory_grid_fixed(MemoryKernel::prony({1.0}, {1.0}), ds, ns));
}

State excited(const System& sys) {
  InitialData init;
  init.u0 = Profile::polynomial({0, 0, 1, -2, 1});
  init.theta0 = Profile::sine(1, 1.0, 1.0);
  return build_initial_state(init, sys.grid, sys.memory);
}

}  // namespace

TEST_CASE("zero state is a fixed point") {
  const System sys = beam(6, 10, 0.05);
  for (Scheme scheme : {Scheme::full_implicit_midpoint, Scheme::split_semilagrangian}) {
    const Stepper stepper(sys, {.dt = 0.05, .scheme = scheme});
    State st = State::zero(6, 10);
    for (int k = 0; k < 5; ++k) stepper.advance(st);
    CHECK(st.flatten().cwiseAbs().maxCoeff() == 0.0);
    CHECK(st.t == doctest::Approx(0.25));
  }
}

TEST_CASE("split scheme needs matching grids") {
  const System sys = beam(6, 10, 0.05);
  CHECK(kind_of([&] { Stepper(sys, {.dt = 0.01, .scheme = Scheme::split_semilagrangian}); }) ==
        ErrorKind::InconsistentGrid);
}

TEST_CASE("midpoint step is the Cayley transform") {
  const System sys = beam(5, 4, 0.5);
  const double dt = 0.02;
  const Eigen::MatrixXd A(assemble_generator(sys).generator);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  const State st = excited(sys);
  const Eigen::VectorXd expected = (I - 0.5 * dt * A).partialPivLu().solve((I + 0.5 * dt * A) * st.flatten());
  const State next = Stepper(sys, {.dt = dt, .scheme = Scheme::full_implicit_midpoint}).step(st);
  CHECK((next.flatten() - expected).cwiseAbs().maxCoeff() <= 1e-10 * expected.cwiseAbs().maxCoeff());
}

TEST_CASE("midpoint conserves the discrete energy identity") {
  const System sys = beam(8, 12, 0.25);
  const double dt = 0.01;
  const Stepper stepper(sys, {.dt = dt, .scheme = Scheme::full_implicit_midpoint});
  State st = excited(sys);
  for (int k = 0; k < 20; ++k) {
    const State next = stepper.step(st);
    const State mid = State::unflatten(0.5 * (st.flatten() + next.flatten()), sys.nx(), sys.ns());
    const double lhs = (energy(sys, next) - energy(sys, st)) / dt;
    CHECK(lhs == doctest::Approx(dissipation(sys, mid)).epsilon(1e-8));
    st = next;
  }
}

TEST_CASE("energy decreases under both schemes") {
  const System sys = beam(10, 40, 0.01);
  for (Scheme scheme : {Scheme::full_implicit_midpoint, Scheme::split_semilagrangian}) {
    const SimulationResult r = simulate(sys, excited(sys), {.dt = 0.01, .scheme = scheme}, {.T = 1.0});
    REQUIRE_FALSE(r.failure);
    for (std::size_t i = 1; i < r.samples.size(); ++i) CHECK(r.samples[i].E <= r.samples[i - 1].E);
  }
}

TEST_CASE("backends give the same trajectory") {
  const System sys = beam(10, 40, 0.01);
  SchemeConfig serial_cfg{.dt = 0.01, .backend = Backend::serial};
  SchemeConfig omp_cfg{.dt = 0.01, .backend = Backend::openmp};
  const SimulationResult a = simulate(sys, excited(sys), serial_cfg, {.T = 0.5});
  const SimulationResult b = simulate(sys, excited(sys), omp_cfg, {.T = 0.5});
  CHECK((a.final_state.flatten() - b.final_state.flatten()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sampling contract") {
  const System sys = beam(6, 10, 0.05);
  const SchemeConfig cfg{.dt = 0.05};
  SUBCASE("no steps") {
    const SimulationResult r = simulate(sys, excited(sys), cfg, {.T = 0.0});
    CHECK(r.samples.size() == 1);
    CHECK(r.records.size() == 1);
    CHECK(std::isnan(r.records[0].dE_numeric));
  }
  SUBCASE("sampling interval beyond the horizon") {
    const SimulationResult r = simulate(sys, excited(sys), cfg, {.T = 0.5, .sample_every = 100});
    REQUIRE(r.samples.size() == 2);
    CHECK(r.samples[0].t == 0.0);
    CHECK(r.samples[1].t == doctest::Approx(0.5));
  }
  SUBCASE("zero trajectory") {
    const SimulationResult r = simulate(sys, State::zero(6, 10), cfg, {.T = 0.5});
    for (const auto& rec : r.records) CHECK(rec.E == 0.0);
  }
  SUBCASE("horizon not a whole number of steps") {
    CHECK(kind_of([&] { simulate(sys, excited(sys), cfg, {.T = 0.52}); }) == ErrorKind::InvalidArgument);
  }
  SUBCASE("sample times") {
    const SimulationResult r = simulate(sys, excited(sys), cfg, {.T = 1.0, .sample_every = 3});
    CHECK(r.samples.size() == 8);
    CHECK(r.samples.back().t == doctest::Approx(1.0));
  }
}

TEST_CASE("centered energy derivative") {
  std::vector<Snapshot> s(3);
  for (int i = 0; i < 3; ++i) {
    s[i].t = 0.1 * i;
    s[i].E = std::pow(s[i].t, 2);
    s[i].D.damping = 2.0 * s[i].t;
  }
  const auto r = make_records(s);
  CHECK(r[1].dE_numeric == doctest::Approx(0.2));
  CHECK(r[1].identity_residual == doctest::Approx(0.0));
  CHECK(r[0].dE_numeric == doctest::Approx(0.0));
}

TEST_CASE("matrix exponential oracle") {
  const System sys = beam(4, 8, 0.5);
  const GeneratorAssembly a = assemble_generator(sys);
  const Eigen::VectorXd phi0 = excited(sys).flatten();
  CHECK((oracle_evolve(a, phi0, 0.0) - phi0).cwiseAbs().maxCoeff() == 0.0);

  const Oracle oracle(a);
  const Eigen::VectorXd half = oracle.evolve(phi0, 0.25);
  const Eigen::VectorXd full = oracle.evolve(half, 0.25);
  CHECK((full - oracle.evolve(phi0, 0.5)).norm() <= 1e-8 * full.norm());

  const Stepper stepper(sys, {.dt = 1e-3, .scheme = Scheme::full_implicit_midpoint});
  State st = State::unflatten(phi0, sys.nx(), sys.ns());
  for (int k = 0; k < 500; ++k) stepper.advance(st);
  CHECK((st.flatten() - full).norm() <= 1e-3 * full.norm());
}
