#include "ratchet/transfer_matrix.hpp"

#include "ratchet/errors.hpp"

#include <cmath>
#include <numbers>

namespace ratchet::tm {

namespace {

// Gap in MHz, slope in MHz/mT, beta in mT/ms: the 1e3 turns MHz^2 / (MHz/ms) into
// a pure number, pi^2 comes from converting both the gap and the slope to
// angular frequency.
double lz_exponent(double delta, double beta, double slope) {
  if (!(delta >= 0.0)) throw std::invalid_argument("gap must be >= 0");
  if (!(beta > 0.0)) throw std::invalid_argument("sweep rate must be > 0");
  return std::numbers::pi * std::numbers::pi * 1e3 * delta * delta / (slope * beta);
}

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

double lz_prob(double delta, double beta, Channel channel, const model::PhysicalConstants& k) {
  const double slope = channel == Channel::Wide ? 2.0 * k.gamma_e : 2.0 * k.gamma_e + k.gamma_H;
  return std::exp(-lz_exponent(delta, beta, slope));
}

double lz_prob_sd(double delta, double beta, const model::PhysicalConstants& k) {
  const double p = lz_prob(delta, beta, Channel::Wide, k);
  return 0.5 * (1.0 + p * p);
}

double tau_lz(double delta0, double beta, const model::PhysicalConstants& k) {
  return delta0 / (2.0 * k.gamma_e * beta);
}

void LZParams::validate() const {
  check_prob(p0_up, "p0_up");
  check_prob(p1_up, "p1_up");
  check_prob(p0_down, "p0_down");
  check_prob(p1_down, "p1_down");
}

LZParams lz_from_gaps(const model::GapEstimate& g, double beta_up, double beta_down,
                      const model::PhysicalConstants& k, bool sd_mode) {
  LZParams p;
  p.sd_mode = sd_mode;
  p.p0_up = sd_mode ? lz_prob_sd(g.delta0, beta_up, k) : lz_prob(g.delta0, beta_up, Channel::Wide, k);
  p.p0_down = sd_mode ? lz_prob_sd(g.delta0, beta_down, k) : lz_prob(g.delta0, beta_down, Channel::Wide, k);
  p.p1_up = lz_prob(g.delta1, beta_up, Channel::Narrow, k);
  p.p1_down = lz_prob(g.delta1, beta_down, Channel::Narrow, k);
  return p;
}

CycleMatrix build_tm_up(double p0, double p1) {
  check_prob(p0, "p0");
  check_prob(p1, "p1");
  const double q0 = 1.0 - p0;
  const double q1 = 1.0 - p1;
  const double mix = p1 * p1 + q1 * q1;
  CycleMatrix m;
  m.T = Mat8::Identity();
  // Rows and columns |3>..|6> (indices 2..5).
  Eigen::Matrix4d b;
  b << p0 * p1, 2.0 * q0 * p1 * q1, q0 * mix, p0 * q1,
       0.0, p1 * p0, q1 * p0, q0,
       q0, q1 * p0, p1 * p0, 0.0,
       p0 * q1, q0 * mix, 2.0 * q0 * p1 * q1, p0 * p1;
  m.T.block<4, 4>(2, 2) = b;
  return m;
}

CycleMatrix build_tm_down(double p0, double p1) {
  CycleMatrix m = build_tm_up(p0, p1);
  m.T.transposeInPlace();
  return m;
}

CycleMatrix tm_t1() {
  CycleMatrix m;
  m.T = Mat8::Zero();
  for (auto [a, b] : {std::pair{0, 2}, {1, 3}, {4, 6}, {5, 7}}) {
    m.T(a, a) = m.T(a, b) = m.T(b, a) = m.T(b, b) = 0.5;
  }
  return m;
}

CycleMatrix tm_light() {
  CycleMatrix m;
  m.T = Mat8::Zero();
  for (int i = 0; i < 4; ++i) {
    m.T(i, i) = 1.0;
    m.T(i, i + 4) = 1.0;
  }
  return m;
}

CycleMatrix compose_cycle(const LZParams& in, bool with_t1, Light light) {
  LZParams p = in;
  if (p.sd_mode) p.p0_up = p.p0_down = 0.5;
  p.validate();
  const Mat8 up = build_tm_up(p.p0_up, p.p1_up).T;
  const Mat8 down = build_tm_down(p.p0_down, p.p1_down).T;
  Mat8 T = up;
  if (with_t1) T = tm_t1().T * T;
  T = down * T;
  if (with_t1) T = tm_t1().T * T;
  if (light == Light::Start) T = tm_light().T * T;
  return {T, "composed"};
}

CycleMatrix analytic_relaxed_cycle(double p1) {
  check_prob(p1, "p1_up");
  const double q1 = 1.0 - p1;
  Mat8 T = Mat8::Zero();
  const double a = (p1 + 1.0) / 4.0;
  const double b = p1 * q1 / 2.0 + q1 / 4.0;
  const double c = p1 * p1 / 2.0 + q1 / 4.0;
  const double d = q1 / 4.0;
  for (int r : {0, 2}) {
    T.row(r) << 0.5, 0.0, a, b, c, d, 0.5, 0.0;
    T.row(r + 1) << 0.0, 0.5, d, c, b, a, 0.0, 0.5;
  }
  return {T, "analytic-relaxed"};
}

CycleMatrix analytic_unrelaxed_cycle(double p1) {
  check_prob(p1, "p1_up");
  const double q1 = 1.0 - p1;
  const double mix = p1 * p1 + q1 * q1;
  Mat8 T = Mat8::Zero();
  T.row(0) << 1.0, 0.0, 0.5, q1 / 2.0, p1 / 2.0, 0.0, 0.0, 0.0;
  T.row(1) << 0.0, 1.0, q1 / 2.0, mix / 2.0, q1 * p1, p1 / 2.0, 0.0, 0.0;
  T.row(2) << 0.0, 0.0, p1 / 2.0, q1 * p1, mix / 2.0, q1 / 2.0, 1.0, 0.0;
  T.row(3) << 0.0, 0.0, 0.0, p1 / 2.0, q1 / 2.0, 0.5, 0.0, 1.0;
  return {T, "analytic-unrelaxed"};
}

double stochastic_defect(const Mat8& T) { return (T.colwise().sum().array() - 1.0).abs().maxCoeff(); }

bool entries_in_unit_interval(const Mat8& T, double tol) {
  return (T.array() >= -tol).all() && (T.array() <= 1.0 + tol).all();
}

double proton_polarization(const Vec8& v) {
  double pol = 0.0;
  for (int i = 0; i < 8; ++i) pol += (i % 2 == 0 ? 1.0 : -1.0) * v(i);
  return pol;
}

Vec8 default_initial() {
  Vec8 v = Vec8::Zero();
  v.head<4>().setConstant(0.25);
  return v;
}

std::vector<IterateRow> iterate(const Mat8& T, const Vec8& v0, int n) {
  if (n < 0) throw ConfigError("cycle count must be >= 0");
  std::vector<IterateRow> rows;
  rows.reserve(static_cast<std::size_t>(n) + 1);
  Vec8 v = v0;
  rows.push_back({0, proton_polarization(v), v});
  for (int c = 1; c <= n; ++c) {
    v = T * v;
    rows.push_back({c, proton_polarization(v), v});
  }
  return rows;
}

}  // namespace ratchet::tm
