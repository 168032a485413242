#pragma once

#include "ratchet/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ratchet::tm {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;

enum class Channel { Wide, Narrow };

// Landau-Zener survival probability for a gap `delta` (MHz) crossed at `beta`
// (mT/ms). The wide-gap channel has diabatic slope 2*gamma_e, the narrow one
// 2*gamma_e + gamma_H (MHz/mT).
double lz_prob(double delta, double beta, Channel channel, const model::PhysicalConstants& k = {});

// Strong-dephasing limit of the wide-gap crossing: (1 + lz_prob^2) / 2.
double lz_prob_sd(double delta, double beta, const model::PhysicalConstants& k = {});

// Landau-Zener time of the wide gap in ms.
double tau_lz(double delta0, double beta, const model::PhysicalConstants& k = {});

struct LZParams {
  double p0_up = 1.0;
  double p1_up = 1.0;
  double p0_down = 1.0;
  double p1_down = 1.0;
  bool sd_mode = false;  // forces both wide-gap probabilities to 1/2

  void validate() const;
};

LZParams lz_from_gaps(const model::GapEstimate& g, double beta_up, double beta_down,
                      const model::PhysicalConstants& k = {}, bool sd_mode = false);

struct CycleMatrix {
  Mat8 T = Mat8::Identity();
  std::string provenance = "composed";
};

CycleMatrix build_tm_up(double p0, double p1);
CycleMatrix build_tm_down(double p0, double p1);
CycleMatrix tm_t1();
CycleMatrix tm_light();

enum class Light { Start, None };

// T_L T_T1 T_down T_T1 T_up, dropping T_T1 and T_L according to the flags.
CycleMatrix compose_cycle(const LZParams& p, bool with_t1, Light light = Light::Start);

// Closed-form cycles: relaxed with p0_up = 1/2, p1_down = 1; unrelaxed with
// p0_up = 1/2, p0_down = p1_down = 1.
CycleMatrix analytic_relaxed_cycle(double p1_up);
CycleMatrix analytic_unrelaxed_cycle(double p1_up);

// Max deviation of column sums from 1, and whether all entries lie in [0, 1].
double stochastic_defect(const Mat8& T);
bool entries_in_unit_interval(const Mat8& T, double tol = 1e-12);

// States |1>..|8>: odd labels carry a spin-up proton.
double proton_polarization(const Vec8& v);
Vec8 default_initial();

struct IterateRow {
  int cycle = 0;
  double pol_H = 0.0;
  Vec8 v;
};

// Rows for cycles 0..n.
std::vector<IterateRow> iterate(const Mat8& T, const Vec8& v0, int n);

}  // namespace ratchet::tm
