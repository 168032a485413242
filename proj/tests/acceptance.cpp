// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.
#include "ratchet/dynamics.hpp"
#include "ratchet/experiments.hpp"
#include "ratchet/model.hpp"
#include "ratchet/transfer_matrix.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

using namespace ratchet;
namespace ex = ratchet::experiments;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += " [over time budget]";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d %-4s %s: %s (%.1f s, budget %.0f s)\n", id, o.pass ? "PASS" : "FAIL", title,
              o.detail.c_str(), secs, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double final_pol(const std::string& scenario, const std::map<std::string, std::string>& set = {}) {
  const auto r = ex::run_scenario(scenario, set);
  const auto col = r.data.column("pol_H");
  return std::get<double>(r.data.rows.back()[col]);
}

// Subspace written out by hand in the aligned frame.
Eigen::Matrix4cd subspace_by_hand(const model::ClusterParams& p, double B) {
  const auto& k = p.constants;
  const double ws = k.gamma_e * B;
  const double wi = k.gamma_H * B;
  const auto g_nv = model::dipolar_geometry(p.theta_nv_p1, p.phi_nv_p1);
  const auto g_h = model::dipolar_geometry(p.theta_h_p1, p.phi_h_p1);
  const double z1 = g_nv.g0 * p.J_nv_p1;
  const double z2 = g_h.g0 * p.J_h_p1;
  const cplx v_ss = g_h.g1 * p.J_h_p1 / 2.0;
  const cplx v_dq = std::sqrt(2.0) * g_nv.g2 * p.J_nv_p1;
  Eigen::Matrix4cd h = Eigen::Matrix4cd::Zero();
  h(0, 0) = ws / 2 - wi / 2 + z2 / 4;
  h(1, 1) = ws / 2 + wi / 2 - z2 / 4;
  h(2, 2) = -1.5 * ws - wi / 2 + k.D - z2 / 4 + z1 / 2;
  h(3, 3) = -1.5 * ws + wi / 2 + k.D + z2 / 4 + z1 / 2;
  h(0, 1) = v_ss;
  h(2, 3) = -v_ss;
  h(0, 2) = v_dq;
  h(1, 3) = v_dq;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < i; ++j) h(i, j) = std::conj(h(j, i));
  }
  return h;
}

Outcome c1_subspace() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> J1(0.05, 2.0), J2(0.01, 1.0), th(0.0, kPi), ph(0.0, 2 * kPi), B(40, 60);
  double worst = 0.0;
  for (int n = 0; n < 10; ++n) {
    model::ClusterParams p;
    p.J_nv_p1 = J1(rng);
    p.J_h_p1 = J2(rng);
    p.theta_nv_p1 = th(rng);
    p.phi_nv_p1 = ph(rng);
    p.theta_h_p1 = th(rng);
    p.phi_h_p1 = ph(rng);
    const double b = B(rng);
    const auto got = model::central_subspace(model::make_cluster(p), b);
    worst = std::max(worst, (got - subspace_by_hand(p, b)).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-9, fmt("max deviation %.3e MHz over 10 random sets (tol 1e-9)", worst)};
}

Outcome c2_matching() {
  const double b0 = model::matching_field(model::make_cluster({}));
  bool ok = std::abs(b0 - 51.2) <= 0.3;
  std::string d = fmt("B_m(0) = %.4f mT (want 51.2 +- 0.3)", b0);
  for (int deg = 5; deg <= 40; deg += 5) {
    model::ClusterParams p;
    p.field_theta = deg * kPi / 180.0;
    const double b = model::matching_field(model::make_cluster(p));
    const bool in = b >= 50.0 && b <= 90.0;
    ok = ok && in;
    if (!in || deg == 40) d += fmt("; B_m(%d deg) = %.3f mT%s", deg, b, in ? "" : " outside [50, 90]");
  }
  return {ok, d};
}

Outcome c3_lz_oracle() {
  const model::PhysicalConstants k;
  const double delta = 0.07;
  const double slope = 2.0 * k.gamma_e;
  auto H = [&](double B) {
    Matrix h(2, 2);
    h << 0.5 * slope * B, 0.5 * delta, 0.5 * delta, -0.5 * slope * B;
    return h;
  };
  double worst = 0.0;
  std::string d;
  for (double beta : {0.3, 1.0, 3.0, 10.0, 30.0}) {
    const double duration_us = 1.0 / beta * 1e3;
    const auto U = dynamics::sweep_unitary(H, -0.5, 0.5, beta, static_cast<long>(duration_us * 200));
    const double survival = std::norm(U(0, 0));
    const double expected = tm::lz_prob(delta, beta, tm::Channel::Wide, k);
    worst = std::max(worst, std::abs(survival - expected));
    d += fmt("%s%.1f: %.4f/%.4f", d.empty() ? "beta " : ", ", beta, survival, expected);
  }
  return {worst <= 0.02, d + fmt(" (max |diff| %.4f, tol 0.02)", worst)};
}

Outcome c4_single_sweep() {
  const auto r = ex::run_scenario("fig1e", {{"record_every_mT", "0"}});
  double up = 0.0, down = 0.0;
  for (std::size_t i = 0; i < r.data.rows.size(); ++i) {
    const auto dir = std::get<std::string>(r.data.rows[i][r.data.column("direction")]);
    (dir == "up" ? up : down) = r.data.number(i, "pol_H");
  }
  const bool ok = std::abs(up) > 0.8 && std::abs(down) > 0.8 && up * down < 0.0;
  return {ok, fmt("up %+.4f, down %+.4f (want |pol| > 0.8, opposite signs)", up, down)};
}

Outcome c5_sign_rule() {
  const double a = final_pol("fig2a");
  const double b = final_pol("fig2b");
  const double c = final_pol("fig2c");
  const bool ok = a > 0.0 && b < 0.0 && std::abs(std::abs(a) - std::abs(b)) < 0.15 && std::abs(c) < 0.15;
  return {ok, fmt("low %+.4f, high %+.4f, both %+.4f", a, b, c)};
}

Outcome c6_plateau() {
  const auto r = ex::run_scenario("fig2e", {{"n_cycles", "100"}});
  const spin::HilbertLayout nv_only({{"NV", 1.0}});
  const double nv0 = dynamics::polarization(dynamics::nv_initial_state(2.0), nv_only, 0);
  bool monotone = true;
  for (std::size_t i = 0; i < r.data.rows.size(); ++i) monotone = monotone && r.data.number(i, "increment") >= 0.0;
  const double last = r.data.number(r.data.rows.size() - 1, "pol_H");
  const bool ok = r.data.rows.size() >= 50 && monotone && last >= 0.8 * nv0;
  return {ok, fmt("pol_H after %zu cycles %.4f vs %.4f required; increments %s", r.data.rows.size(), last, 0.8 * nv0,
                  monotone ? "monotone" : "not monotone")};
}

Outcome c7_asymmetry() {
  const auto cfg = model::make_cluster([] {
    model::ClusterParams p;
    p.J_h_p1 = 0.1;
    return p;
  }());
  auto pol = [&](double bu, double bd) {
    ex::RatchetSettings s;
    s.beta_up = bu;
    s.beta_down = bd;
    s.n_cycles = ex::cycles_in_budget(10.0, s.range_mT, bu, bd);
    s.t1 = true;
    return ex::run_ratchet(cfg, s).final_pol_H();
  };
  const double slow_up = pol(3.0, 30.0);
  const double fast_up = pol(30.0, 3.0);
  return {slow_up >= 3.0 * fast_up && slow_up > 0.0,
          fmt("(3, 30): %.4f, (30, 3): %.4f, ratio %.1f (want >= 3)", slow_up, fast_up, slow_up / fast_up)};
}

Outcome c8_tm_exact() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double diff = 0.0, transpose = 0.0, stoch = 0.0, p0_spread = 0.0;
  bool unit = true;
  for (int n = 0; n < 1000; ++n) {
    const double p0 = u(rng), p1 = u(rng), q0 = u(rng), q1 = u(rng);
    const auto up = tm::build_tm_up(p0, p1).T;
    const auto down = tm::build_tm_down(q0, q1).T;
    transpose = std::max(transpose, (tm::build_tm_down(p0, p1).T - up.transpose()).cwiseAbs().maxCoeff());
    for (bool t1 : {false, true}) {
      const auto c = tm::compose_cycle({p0, p1, q0, q1, false}, t1).T;
      for (const auto* m : {&up, &down, &c}) {
        stoch = std::max(stoch, tm::stochastic_defect(*m));
        unit = unit && tm::entries_in_unit_interval(*m);
      }
    }
    const auto relaxed = tm::compose_cycle({0.5, p1, q0, 1.0, false}, true).T;
    const auto analytic = tm::analytic_relaxed_cycle(p1).T;
    diff = std::max(diff, (relaxed - analytic).cwiseAbs().maxCoeff());
    const auto other = tm::compose_cycle({0.5, p1, u(rng), 1.0, false}, true).T;
    p0_spread = std::max(p0_spread, (other - relaxed).cwiseAbs().maxCoeff());
  }
  const bool ok = diff < 1e-12 && transpose < 1e-15 && stoch < 1e-12 && unit && p0_spread < 1e-12;
  return {ok, fmt("composed vs closed form %.1e, transpose %.1e, column-sum defect %.1e, entries in [0,1] %s, "
                  "p0_down dependence %.1e",
                  diff, transpose, stoch, unit ? "yes" : "no", p0_spread)};
}

Outcome c9_s7_contrast() {
  const auto v0 = tm::default_initial();
  const double with_t1 = tm::iterate(tm::analytic_relaxed_cycle(0.98).T, v0, 100).back().pol_H;
  const double without = tm::iterate(tm::analytic_unrelaxed_cycle(0.98).T, v0, 100).back().pol_H;
  const bool ok = with_t1 >= 0.4 && with_t1 >= 5.0 * std::abs(without);
  return {ok, fmt("with T1 %.4f, without %.4f, ratio %.1f (want >= 0.4 and >= 5x)", with_t1, without,
                  with_t1 / without)};
}

Outcome c10_robustness() {
  const auto r = ex::run_scenario("fig4a", {{"workers", std::to_string(std::max(1u, std::thread::hardware_concurrency()))}});
  double mx = -1.0;
  for (std::size_t i = 0; i < r.data.rows.size(); ++i) mx = std::max(mx, r.data.number(i, "pol_H"));
  double worst = 1e9;
  std::string where;
  for (std::size_t i = 0; i < r.data.rows.size(); ++i) {
    const double j1 = r.data.number(i, "J_nv_p1_MHz");
    const double j2 = r.data.number(i, "J_h_p1_MHz");
    if (j1 < 0.35 - 1e-9 || j2 < 0.25 - 1e-9) continue;
    const double v = r.data.number(i, "pol_H");
    if (!(v >= worst)) {
      worst = v;
      where = fmt("J = %.0f/%.0f kHz", j1 * 1e3, j2 * 1e3);
    }
  }
  const bool ok = r.data.rows.size() == 100 && worst >= 0.5 * mx;
  return {ok, fmt("map max %.4f; lowest in robust region %.4f at %s (want >= %.4f)", mx, worst, where.c_str(),
                  0.5 * mx)};
}

Outcome c11_bystander() {
  const auto r = ex::run_scenario("figS8");
  auto value = [&](const std::string& variant) {
    double v = std::nan("");
    for (std::size_t i = 0; i < r.data.rows.size(); ++i) {
      if (std::get<std::string>(r.data.rows[i][r.data.column("variant")]) == variant) v = r.data.number(i, "pol_H");
    }
    return v;
  };
  const double free_v = value("free_t1");
  const double with_b1 = value("bystander_t1_p1_b1");

  // Zero bystander coupling: B1 is a spectator and the 3-spin result must come back.
  model::ClusterParams p;
  p.J_nv_p1 = 0.3;
  p.J_h_p1 = 0.2;
  ex::RatchetSettings s;
  s.beta_up = 6.0;
  s.beta_down = 10.0;
  s.n_cycles = 50;
  s.t1 = true;
  const double three = ex::run_ratchet(model::make_cluster(p), s).final_pol_H();
  p.include_bystander = true;
  p.J_nv_b1 = 0.0;
  s.t1_sites = {"P1", "B1"};
  const double spectator = ex::run_ratchet(model::make_cluster(p), s).final_pol_H();

  const double ratio = with_b1 / free_v;
  const bool ok = ratio >= 0.4 && std::abs(spectator - three) < 1e-6;
  return {ok, fmt("with bystander %.4f, bystander-free %.4f, ratio %.3f (want >= 0.4); zero-coupling |diff| %.1e "
                  "(want < 1e-6)",
                  with_b1, free_v, ratio, std::abs(spectator - three))};
}

Matrix random_state(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  Matrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

Matrix random_hermitian(std::mt19937_64& rng, int n, bool degenerate) {
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  Matrix h = (a + a.adjoint()) / 2.0;
  if (!degenerate) return h;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXd w = es.eigenvalues();
  for (int i = 1; i < n; i += 2) w(i) = w(i - 1);  // pairwise degenerate spectrum
  return es.eigenvectors() * w.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

Outcome c12_invariants() {
  const auto cfg = model::make_cluster({});
  const auto& layout = cfg.layout;
  const int n = layout.dim();
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> eps(0.0, 2.0), b(50.0, 52.5);
  const auto parts = model::hamiltonian_parts(cfg);
  Matrix rho = random_state(rng, n);
  int applied = 0;
  for (; applied < 10000; ++applied) {
    if (applied % 500 == 0) rho = random_state(rng, n);
    switch (pick(rng)) {
      case 0: {
        const double b0 = b(rng);
        rho = [&] {
          const auto U = dynamics::sweep_unitary([&](double B) { return parts.at(B); }, b0, b0 + 0.01, 3.0, 4);
          return Matrix(U * rho * U.adjoint());
        }();
        break;
      }
      case 1:
        rho = dynamics::apply_dephasing(rho, applied % 3 ? parts.at(b(rng)) : random_hermitian(rng, n, true));
        break;
      case 2:
        rho = dynamics::apply_p1_relaxation(rho, layout, cfg.p1());
        break;
      default:
        rho = dynamics::optical_repolarize(rho, layout, cfg.nv(), eps(rng));
    }
    dynamics::check_invariants(rho, "random channel");
  }
  // Every scenario run above already checked the state after each operation.
  return {true, fmt("%d random channel applications within trace 1e-9, hermiticity 1e-10, eigenvalue >= -1e-8",
                    applied)};
}

}  // namespace

int main() {
  run(1, "4x4 subspace reconstruction", 1, c1_subspace);
  run(2, "matching field", 5, c2_matching);
  run(3, "Landau-Zener oracle", 30, c3_lz_oracle);
  run(4, "single sweeps", 120, c4_single_sweep);
  run(5, "light placement sign rule", 300, c5_sign_rule);
  run(6, "buildup plateau", 600, c6_plateau);
  run(7, "sweep-rate asymmetry with T1", 600, c7_asymmetry);
  run(8, "transfer-matrix exactness", 1, c8_tm_exact);
  run(9, "T1 contrast in the strong-dephasing limit", 1, c9_s7_contrast);
  run(10, "coupling robustness map", 1800, c10_robustness);
  run(11, "bystander P1", 600, c11_bystander);
  run(12, "channel invariants", 60, c12_invariants);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
