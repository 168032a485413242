#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ratchet/dynamics.hpp"
#include "ratchet/errors.hpp"

#include <random>

using namespace ratchet;
using namespace ratchet::dynamics;

namespace {

Matrix random_state(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  Matrix r = a * a.adjoint();
  return r / r.trace().real();
}

}  // namespace

TEST_CASE("NV pumping") {
  const Matrix rho = nv_initial_state(2.0);
  CHECK(rho.trace().real() == doctest::Approx(1.0));
  const spin::HilbertLayout nv({{"NV", 1.0}});
  CHECK(polarization(rho, nv, 0) == doctest::Approx(1.0));
  CHECK(polarization(nv_initial_state(0.6), nv, 0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(nv_initial_state(2.5), ConfigError);

  const auto cfg = model::make_cluster({});
  const Matrix mixed = random_state(12, 1);
  const Matrix pumped = optical_repolarize(mixed, cfg.layout, cfg.nv(), 2.0);
  check_invariants(pumped, "pump");
  CHECK((reduced_state(pumped, cfg.layout, cfg.nv()) - nv_initial_state(2.0)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((partial_trace_site(pumped, cfg.layout, cfg.nv()) - partial_trace_site(mixed, cfg.layout, cfg.nv()))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("dephasing keeps populations and removes coherences") {
  const auto cfg = model::make_cluster({});
  const Matrix H = model::assemble_hamiltonian(cfg, 51.2);
  const Matrix rho = random_state(12, 2);
  const Matrix out = apply_dephasing(rho, H);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const Matrix a = es.eigenvectors().adjoint() * rho * es.eigenvectors();
  const Matrix b = es.eigenvectors().adjoint() * out * es.eigenvectors();
  for (int i = 0; i < 12; ++i) {
    CHECK(std::abs(a(i, i) - b(i, i)) < 1e-12);
    for (int j = 0; j < 12; ++j) {
      if (i != j) CHECK(std::abs(b(i, j)) < 1e-12);
    }
  }
  // A fully degenerate H leaves the state alone.
  CHECK((apply_dephasing(rho, Matrix::Identity(12, 12)) - rho).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("P1 relaxation is an idempotent depolarizing flip") {
  const auto cfg = model::make_cluster({});
  const Matrix rho = random_state(12, 3);
  const Matrix once = apply_p1_relaxation(rho, cfg.layout, cfg.p1());
  CHECK(std::abs(polarization(once, cfg.layout, cfg.p1())) < 1e-12);
  CHECK((apply_p1_relaxation(once, cfg.layout, cfg.p1()) - once).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(polarization(once, cfg.layout, cfg.proton()) == doctest::Approx(polarization(rho, cfg.layout, cfg.proton())));
  CHECK_THROWS_AS(apply_p1_relaxation(rho, cfg.layout, cfg.nv()), std::invalid_argument);
}

TEST_CASE("invariant checks reject broken states") {
  Matrix rho = Matrix::Identity(2, 2) * 0.5;
  CHECK_NOTHROW(check_invariants(rho, "ok"));
  Matrix bad = rho;
  bad(0, 0) = 0.6;
  CHECK_THROWS_AS(check_invariants(bad, "trace"), InvariantError);
  bad = rho;
  bad(0, 1) = cplx(0, 0.1);
  CHECK_THROWS_AS(check_invariants(bad, "hermiticity"), InvariantError);
  bad = rho;
  bad(0, 0) = -0.1;
  bad(1, 1) = 1.1;
  CHECK_THROWS_AS(check_invariants(bad, "positivity"), InvariantError);
}

TEST_CASE("sweep propagators") {
  const auto cfg = model::make_cluster({});
  Propagator prop(cfg);
  const double c = model::crossing_center(cfg);
  const Matrix& U = prop.unitary(c - 0.25, c + 0.25, 3.0);
  CHECK((U * U.adjoint() - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-12);
  prop.unitary(c - 0.25, c + 0.25, 3.0);
  CHECK(prop.cache_size() == 1);

  StepPolicy tight = prop.policy();
  tight.max_steps = 10;
  Propagator small(cfg, tight);
  CHECK_THROWS_AS(small.unitary(c - 0.25, c + 0.25, 3.0), StepUnderflowError);
}

TEST_CASE("protocol runner") {
  const auto cfg = model::make_cluster({});
  Protocol empty;
  CHECK(run_protocol(cfg, empty).records.empty());

  const double c = model::crossing_center(cfg);
  auto proto = ratchet_protocol(c - 0.25, c + 0.25, 3.0, 3.0, 3, LightPlacement::LowEnd, true, true);
  int ops = 0;
  RunOptions opt;
  opt.observer = [&](const Matrix&, std::string_view) { ++ops; };
  const auto ts = run_protocol(cfg, proto, opt);
  CHECK(ops > 0);
  CHECK(ts.records.front().tag == "init");
  CHECK(ts.cycle_end_pol_H().size() == 3);
  CHECK(ts.final_pol_H() > 0.0);

  proto.t1_sites = {"B1"};
  CHECK_THROWS_AS(run_protocol(cfg, proto), ConfigError);
  CHECK_THROWS_AS(parse_light("sometimes"), ConfigError);
  CHECK(to_string(parse_light("every_l_cycles")) == "every_l_cycles");
}

TEST_CASE("light placement flips the sign") {
  const auto cfg = model::make_cluster({});
  const double c = model::crossing_center(cfg);
  auto low = ratchet_protocol(c - 0.25, c + 0.25, 3.0, 3.0, 4, LightPlacement::LowEnd, true, false);
  auto high = low;
  high.light = LightPlacement::HighEnd;
  CHECK(run_protocol(cfg, low).final_pol_H() > 0.0);
  CHECK(run_protocol(cfg, high).final_pol_H() < 0.0);
}
