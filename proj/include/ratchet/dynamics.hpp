#pragma once

#include "ratchet/model.hpp"

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace ratchet::dynamics {

// Density matrices are plain dense matrices in the cluster layout basis.
struct Tolerances {
  double trace = 1e-9;
  double hermitian = 1e-10;
  double min_eigenvalue = -1e-8;
};

// Throws InvariantError naming `after` when rho is not a valid state.
void check_invariants(const Matrix& rho, std::string_view after, const Tolerances& tol = {});

Matrix maximally_mixed(const spin::HilbertLayout& layout);

// Removes coherences between distinct eigenspaces of H (degenerate levels are
// kept together).
Matrix apply_dephasing(const Matrix& rho, const Matrix& H, double degeneracy_tol = 1e-9);

// rho -> (rho + F rho F^dagger) / 2 with F = 2 Sx on a spin-1/2 site.
Matrix apply_p1_relaxation(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site);

// NV state diag((1 - eps/2)/3, (1 + eps)/3, (1 - eps/2)/3) over m = +1, 0, -1.
Matrix nv_initial_state(double epsilon);

// Replace the NV reduced state by nv_initial_state(epsilon), keeping the rest.
Matrix optical_repolarize(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t nv_site,
                          double epsilon);

Matrix partial_trace_site(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site);
Matrix reduced_state(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site);

// Spin-1/2: 2<Sz>. Spin-1: P(0) - (P(+1) + P(-1)) / 2, which is eps/2 right after
// a light pulse.
double polarization(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site);
double expectation_sz(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site);

// ---------------------------------------------------------------------------
// Field sweeps

struct StepPolicy {
  double delta_narrow = 0.1;  // MHz
  double delta_wide = 0.1;    // MHz
  double gamma_e = 28.025;    // MHz/mT
  double drift_fraction = 20.0;
  double tau_fraction = 50.0;
  long max_steps = 20'000'000;
  double max_dt_ms = 0.0;  // 0 = no extra cap

  double step_ms(double beta) const;
};

// Step limits taken from the cluster's gap estimates, with fallbacks when a gap vanishes.
StepPolicy step_policy(const model::ClusterConfig& cfg);

using HamiltonianFn = std::function<Matrix(double)>;

// Product of exp(-i 2pi H(B_mid) dt) over `steps` equal steps from B0 to B1;
// H in MHz, beta in mT/ms.
Matrix sweep_unitary(const HamiltonianFn& H, double B0, double B1, double beta, long steps);

// Sweep unitaries for one cluster, cached by (B0, B1, beta).
class Propagator {
 public:
  Propagator(const model::ClusterConfig& cfg, StepPolicy policy);
  explicit Propagator(const model::ClusterConfig& cfg);

  const Matrix& unitary(double B0, double B1, double beta);
  Matrix hamiltonian(double B) const { return parts_.at(B); }
  long steps_for(double B0, double B1, double beta) const;
  const StepPolicy& policy() const { return policy_; }
  std::size_t cache_size() const { return cache_.size(); }

 private:
  model::HamiltonianParts parts_;
  StepPolicy policy_;
  std::map<std::tuple<double, double, double>, Matrix> cache_;
};

// ---------------------------------------------------------------------------
// Protocols

struct SweepSegment {
  double B_start = 0.0;  // mT
  double B_end = 0.0;    // mT
  double beta = 1.0;     // mT/ms
  bool dephase_at_end = false;
  std::vector<double> t1_events;  // ms from segment start

  double duration() const { return std::abs(B_end - B_start) / beta; }
  bool upward() const { return B_end > B_start; }
};

enum class LightPlacement { None, LowEnd, HighEnd, BothEnds, EveryLCycles };

LightPlacement parse_light(std::string_view s);
std::string to_string(LightPlacement p);

// `segments` describe one cycle and are repeated n_cycles times.
struct Protocol {
  std::vector<SweepSegment> segments;
  LightPlacement light = LightPlacement::LowEnd;
  int light_every = 1;
  double epsilon0 = 2.0;
  double eta_nv = 1.0;
  int n_cycles = 1;
  std::vector<std::string> t1_sites{"P1"};
  double record_every_mT = 0.0;  // > 0 adds samples inside sweeps
  bool record_populations = false;

  double epsilon() const { return epsilon0 * eta_nv; }
  void validate() const;
};

// Up sweep then down sweep between B_low and B_high. T1 fires once at the end of
// each sweep when `t1` is set.
Protocol ratchet_protocol(double B_low, double B_high, double beta_up, double beta_down, int n_cycles,
                          LightPlacement light, bool dephase, bool t1);

struct Record {
  double t_ms = 0.0;
  double B_mT = 0.0;
  double pol_H = 0.0;
  double pol_NV = 0.0;
  double pol_P1 = 0.0;
  int cycle = 0;
  std::string tag;
  std::vector<double> populations;  // instantaneous eigenbasis, when requested
};

struct TimeSeries {
  std::vector<Record> records;

  // Proton polarization at the end of each cycle.
  std::vector<double> cycle_end_pol_H() const;
  double final_pol_H() const;
};

struct RunOptions {
  bool check_invariants = true;
  Tolerances tolerances;
  // Called with the state after every operation.
  std::function<void(const Matrix&, std::string_view)> observer;
};

TimeSeries run_protocol(const model::ClusterConfig& cfg, const Protocol& proto, Propagator& prop,
                        const RunOptions& opt = {});
TimeSeries run_protocol(const model::ClusterConfig& cfg, const Protocol& proto, const RunOptions& opt = {});

}  // namespace ratchet::dynamics
