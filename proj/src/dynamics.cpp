#include "ratchet/dynamics.hpp"

#include "ratchet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ratchet::dynamics {

void check_invariants(const Matrix& rho, std::string_view after, const Tolerances& tol) {
  auto fail = [&](const std::string& what) {
    throw InvariantError("state invariant violated after " + std::string(after) + ": " + what);
  };
  auto sci = [](double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
  };
  if (!rho.allFinite()) fail("non-finite entries");
  const cplx tr = rho.trace();
  if (std::abs(tr - 1.0) > tol.trace) fail("trace deviates from 1 by " + sci(std::abs(tr - 1.0)));
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.hermitian) fail("hermiticity defect " + sci(herm));
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo < tol.min_eigenvalue) fail("negative eigenvalue " + sci(lo));
}

Matrix maximally_mixed(const spin::HilbertLayout& layout) {
  const int n = layout.dim();
  return Matrix::Identity(n, n) / static_cast<double>(n);
}

Matrix apply_dephasing(const Matrix& rho, const Matrix& H, double degeneracy_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const auto& w = es.eigenvalues();
  const Matrix& V = es.eigenvectors();
  const int n = static_cast<int>(w.size());
  std::vector<int> group(n, 0);
  for (int j = 1; j < n; ++j) {
    const double scale = std::max(1.0, std::abs(w(j)));
    group[j] = group[j - 1] + (w(j) - w(j - 1) > degeneracy_tol * scale ? 1 : 0);
  }
  Matrix r = V.adjoint() * rho * V;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (group[i] != group[j]) r(i, j) = 0.0;
    }
  }
  Matrix out = V * r * V.adjoint();
  return 0.5 * (out + out.adjoint());
}

Matrix apply_p1_relaxation(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site) {
  if (layout.local_dim(site) != 2) {
    throw std::invalid_argument("relaxation channel needs a spin-1/2 site, got '" + layout.site(site).label + "'");
  }
  const auto s = spin::spin_operators(0.5);
  const Matrix F = spin::embed(2.0 * s.sx, site, layout);
  return 0.5 * (rho + F * rho * F.adjoint());
}

Matrix nv_initial_state(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 2.0)) {
    throw ConfigError("epsilon must lie in [0, 2], got " + std::to_string(epsilon));
  }
  Matrix nv = Matrix::Zero(3, 3);
  nv(0, 0) = (1.0 - epsilon / 2.0) / 3.0;
  nv(1, 1) = (1.0 + epsilon) / 3.0;
  nv(2, 2) = (1.0 - epsilon / 2.0) / 3.0;
  return nv;
}

namespace {

// global = (hi * d + m) * stride + lo; the "rest" index is hi * stride + lo.
struct SiteSplit {
  int d = 0;
  int stride = 0;
  int rest = 0;

  SiteSplit(const spin::HilbertLayout& layout, std::size_t site) {
    d = layout.local_dim(site);
    stride = 1;
    for (std::size_t k = site + 1; k < layout.size(); ++k) stride *= layout.local_dim(k);
    rest = layout.dim() / d;
  }
  int global(int m, int r) const { return ((r / stride) * d + m) * stride + r % stride; }
};

}  // namespace

Matrix partial_trace_site(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site) {
  const SiteSplit sp(layout, site);
  Matrix red = Matrix::Zero(sp.rest, sp.rest);
  for (int a = 0; a < sp.rest; ++a) {
    for (int b = 0; b < sp.rest; ++b) {
      cplx acc = 0.0;
      for (int m = 0; m < sp.d; ++m) acc += rho(sp.global(m, a), sp.global(m, b));
      red(a, b) = acc;
    }
  }
  return red;
}

Matrix reduced_state(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site) {
  const SiteSplit sp(layout, site);
  Matrix red = Matrix::Zero(sp.d, sp.d);
  for (int m = 0; m < sp.d; ++m) {
    for (int mp = 0; mp < sp.d; ++mp) {
      cplx acc = 0.0;
      for (int r = 0; r < sp.rest; ++r) acc += rho(sp.global(m, r), sp.global(mp, r));
      red(m, mp) = acc;
    }
  }
  return red;
}

Matrix optical_repolarize(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t nv_site,
                          double epsilon) {
  if (layout.local_dim(nv_site) != 3) throw std::invalid_argument("optical pumping needs the spin-1 NV site");
  const Matrix nv = nv_initial_state(epsilon);
  const Matrix red = partial_trace_site(rho, layout, nv_site);
  const SiteSplit sp(layout, nv_site);
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (int m = 0; m < 3; ++m) {
    for (int a = 0; a < sp.rest; ++a) {
      for (int b = 0; b < sp.rest; ++b) out(sp.global(m, a), sp.global(m, b)) = nv(m, m) * red(a, b);
    }
  }
  return out;
}

double expectation_sz(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site) {
  const Matrix red = reduced_state(rho, layout, site);
  const double s = layout.site(site).spin;
  double acc = 0.0;
  for (int k = 0; k < red.rows(); ++k) acc += spin::projection(s, k) * red(k, k).real();
  return acc;
}

double polarization(const Matrix& rho, const spin::HilbertLayout& layout, std::size_t site) {
  const double s = layout.site(site).spin;
  if (s == 0.5) return 2.0 * expectation_sz(rho, layout, site);
  if (s == 1.0) {
    const Matrix red = reduced_state(rho, layout, site);
    return red(1, 1).real() - 0.5 * (red(0, 0).real() + red(2, 2).real());
  }
  return expectation_sz(rho, layout, site) / s;
}

// ---------------------------------------------------------------------------

double StepPolicy::step_ms(double beta) const {
  if (!(beta > 0.0)) throw ConfigError("sweep rate must be > 0 mT/ms");
  const double drift = delta_narrow / (drift_fraction * gamma_e * beta);
  const double tau_lz = delta_wide / (2.0 * gamma_e * beta);
  double dt = std::min(drift, tau_lz / tau_fraction);
  if (max_dt_ms > 0.0) dt = std::min(dt, max_dt_ms);
  return dt;
}

StepPolicy step_policy(const model::ClusterConfig& cfg) {
  StepPolicy p;
  p.gamma_e = cfg.constants().gamma_e;
  double d0 = 0.0;
  double d1 = 0.0;
  try {
    const auto g = model::gap_estimates(cfg);
    d0 = g.delta0;
    d1 = g.delta1;
  } catch (const PhysicsError&) {
  }
  constexpr double fallback = 0.1;
  p.delta_wide = d0 > 0.0 ? d0 : fallback;
  p.delta_narrow = d1 > 0.0 ? d1 : (d0 > 0.0 ? d0 : fallback);
  return p;
}

Matrix sweep_unitary(const HamiltonianFn& H, double B0, double B1, double beta, long steps) {
  if (!(beta > 0.0)) throw ConfigError("sweep rate must be > 0 mT/ms");
  if (steps < 1) throw std::invalid_argument("need at least one step");
  const double duration_us = std::abs(B1 - B0) / beta * 1e3;
  const double dt_us = duration_us / static_cast<double>(steps);
  const double phase = -2.0 * std::numbers::pi * dt_us;

  Matrix U;
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  Vector ph;
  for (long k = 0; k < steps; ++k) {
    const double B = B0 + (B1 - B0) * (static_cast<double>(k) + 0.5) / static_cast<double>(steps);
    es.compute(H(B));
    const auto& w = es.eigenvalues();
    ph.resize(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) ph(i) = std::polar(1.0, phase * w(i));
    const Matrix& V = es.eigenvectors();
    Matrix step = V * ph.asDiagonal() * V.adjoint();
    if (k == 0) {
      U = std::move(step);
    } else {
      U = step * U;
    }
  }
  // Rounding in the long product leaves U slightly non-unitary; use its polar factor.
  Eigen::JacobiSVD<Matrix> svd(U, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Propagator::Propagator(const model::ClusterConfig& cfg, StepPolicy policy)
    : parts_(model::hamiltonian_parts(cfg)), policy_(policy) {}

Propagator::Propagator(const model::ClusterConfig& cfg) : Propagator(cfg, step_policy(cfg)) {}

long Propagator::steps_for(double B0, double B1, double beta) const {
  const double duration = std::abs(B1 - B0) / beta;
  const double dt = policy_.step_ms(beta);
  const double n = std::ceil(duration / dt - 1e-9);
  if (n > static_cast<double>(policy_.max_steps)) {
    std::ostringstream os;
    os << "sweep " << B0 << " -> " << B1 << " mT at " << beta << " mT/ms needs " << n << " steps (limit "
       << policy_.max_steps << "); the narrow gap " << policy_.delta_narrow << " MHz is too small to resolve";
    throw StepUnderflowError(os.str());
  }
  return std::max(1L, static_cast<long>(n));
}

const Matrix& Propagator::unitary(double B0, double B1, double beta) {
  const auto key = std::make_tuple(B0, B1, beta);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (B0 == B1) {
    const int n = static_cast<int>(parts_.fixed.rows());
    return cache_.emplace(key, Matrix::Identity(n, n)).first->second;
  }
  const long steps = steps_for(B0, B1, beta);
  Matrix U = sweep_unitary([this](double B) { return parts_.at(B); }, B0, B1, beta, steps);
  return cache_.emplace(key, std::move(U)).first->second;
}

// ---------------------------------------------------------------------------

LightPlacement parse_light(std::string_view s) {
  if (s == "none") return LightPlacement::None;
  if (s == "low_end") return LightPlacement::LowEnd;
  if (s == "high_end") return LightPlacement::HighEnd;
  if (s == "both_ends") return LightPlacement::BothEnds;
  if (s == "every_l_cycles") return LightPlacement::EveryLCycles;
  throw ConfigError("unknown light placement '" + std::string(s) +
                    "' (expected none, low_end, high_end, both_ends, every_l_cycles)");
}

std::string to_string(LightPlacement p) {
  switch (p) {
    case LightPlacement::None: return "none";
    case LightPlacement::LowEnd: return "low_end";
    case LightPlacement::HighEnd: return "high_end";
    case LightPlacement::BothEnds: return "both_ends";
    case LightPlacement::EveryLCycles: return "every_l_cycles";
  }
  return "none";
}

void Protocol::validate() const {
  if (!(epsilon0 >= 0.0 && epsilon0 <= 2.0)) throw ConfigError("epsilon0 must lie in [0, 2]");
  if (!(eta_nv >= 0.0 && eta_nv <= 1.0)) throw ConfigError("eta_nv must lie in [0, 1]");
  if (n_cycles < 0) throw ConfigError("n_cycles must be >= 0");
  if (light == LightPlacement::EveryLCycles && light_every < 1) throw ConfigError("light_every must be >= 1");
  if (record_every_mT < 0.0) throw ConfigError("record_every_mT must be >= 0");
  for (const auto& s : segments) {
    if (!(s.beta > 0.0) || !std::isfinite(s.beta)) throw ConfigError("sweep rate beta must be > 0 mT/ms");
    if (!(s.B_start >= 0.0) || !(s.B_end >= 0.0)) throw ConfigError("sweep fields must be >= 0 mT");
    for (double t : s.t1_events) {
      if (!(t >= 0.0) || t > s.duration() * (1.0 + 1e-12)) {
        throw ConfigError("T1 event time outside its segment");
      }
    }
  }
}

Protocol ratchet_protocol(double B_low, double B_high, double beta_up, double beta_down, int n_cycles,
                          LightPlacement light, bool dephase, bool t1) {
  Protocol p;
  p.light = light;
  p.n_cycles = n_cycles;
  SweepSegment up{B_low, B_high, beta_up, dephase, {}};
  SweepSegment down{B_high, B_low, beta_down, dephase, {}};
  if (t1) {
    up.t1_events.push_back(up.duration());
    down.t1_events.push_back(down.duration());
  }
  p.segments = {up, down};
  return p;
}

std::vector<double> TimeSeries::cycle_end_pol_H() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.tag == "init") continue;
    const bool last = i + 1 == records.size() || records[i + 1].cycle != r.cycle;
    if (last) out.push_back(r.pol_H);
  }
  return out;
}

double TimeSeries::final_pol_H() const { return records.empty() ? 0.0 : records.back().pol_H; }

namespace {

bool light_before(const Protocol& p, const SweepSegment& seg, int cycle) {
  switch (p.light) {
    case LightPlacement::None: return false;
    case LightPlacement::LowEnd: return seg.upward();
    case LightPlacement::HighEnd: return !seg.upward();
    case LightPlacement::BothEnds: return true;
    case LightPlacement::EveryLCycles: return seg.upward() && cycle % p.light_every == 0;
  }
  return false;
}

}  // namespace

TimeSeries run_protocol(const model::ClusterConfig& cfg, const Protocol& proto, Propagator& prop,
                        const RunOptions& opt) {
  proto.validate();
  TimeSeries ts;
  if (proto.segments.empty() || proto.n_cycles == 0) return ts;

  const auto& layout = cfg.layout;
  const auto nv = cfg.nv();
  const auto p1 = cfg.p1();
  const auto h = cfg.proton();
  std::vector<std::size_t> t1_sites;
  for (const auto& label : proto.t1_sites) {
    auto idx = layout.find(label);
    if (!idx) throw ConfigError("T1 site '" + label + "' is not part of the cluster");
    t1_sites.push_back(*idx);
  }

  Matrix rho = maximally_mixed(layout);
  double t = 0.0;
  int cycle = 0;

  auto after = [&](std::string_view what) {
    if (opt.check_invariants) check_invariants(rho, what, opt.tolerances);
    if (opt.observer) opt.observer(rho, what);
  };
  auto record = [&](double B, std::string tag) {
    Record r{t, B, polarization(rho, layout, h), polarization(rho, layout, nv), polarization(rho, layout, p1),
             cycle, std::move(tag), {}};
    if (proto.record_populations) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(prop.hamiltonian(B));
      const Matrix r_e = es.eigenvectors().adjoint() * rho * es.eigenvectors();
      r.populations.resize(static_cast<std::size_t>(r_e.rows()));
      for (Eigen::Index k = 0; k < r_e.rows(); ++k) r.populations[static_cast<std::size_t>(k)] = r_e(k, k).real();
    }
    ts.records.push_back(std::move(r));
  };
  auto relax = [&]() {
    for (auto s : t1_sites) rho = apply_p1_relaxation(rho, layout, s);
    after("T1 relaxation");
  };

  record(proto.segments.front().B_start, "init");

  for (cycle = 0; cycle < proto.n_cycles; ++cycle) {
    for (const auto& seg : proto.segments) {
      if (light_before(proto, seg, cycle)) {
        rho = optical_repolarize(rho, layout, nv, proto.epsilon());
        after("optical pulse");
        record(seg.B_start, "light");
      }

      const double dur = seg.duration();
      const double dir = seg.upward() ? 1.0 : -1.0;
      // Breakpoints inside the sweep: intermediate samples and mid-sweep T1 events.
      struct Break {
        double t;
        bool sample;
        bool t1;
      };
      std::vector<Break> breaks;
      if (proto.record_every_mT > 0.0) {
        const double dt = proto.record_every_mT / seg.beta;
        for (int k = 1; k * dt < dur * (1.0 - 1e-12); ++k) breaks.push_back({k * dt, true, false});
      }
      for (double te : seg.t1_events) {
        if (te < dur * (1.0 - 1e-12)) breaks.push_back({te, false, true});
      }
      std::stable_sort(breaks.begin(), breaks.end(), [](const Break& a, const Break& b) { return a.t < b.t; });

      double t_local = 0.0;
      double B = seg.B_start;
      for (const auto& br : breaks) {
        const double B_next = seg.B_start + dir * seg.beta * br.t;
        if (br.t > t_local) {
          const Matrix& U = prop.unitary(B, B_next, seg.beta);
          rho = U * rho * U.adjoint();
          after("sweep");
          t += br.t - t_local;
          t_local = br.t;
          B = B_next;
        }
        if (br.t1) relax();
        record(B, br.t1 ? "t1" : "sample");
      }
      if (dur > t_local) {
        const Matrix& U = prop.unitary(B, seg.B_end, seg.beta);
        rho = U * rho * U.adjoint();
        after("sweep");
        t += dur - t_local;
      }
      B = seg.B_end;
      record(B, "sweep");

      if (seg.dephase_at_end) {
        rho = apply_dephasing(rho, prop.hamiltonian(B));
        after("dephasing");
        record(B, "dephase");
      }
      for (double te : seg.t1_events) {
        if (te >= dur * (1.0 - 1e-12)) {
          relax();
          record(B, "t1");
        }
      }
    }
  }
  return ts;
}

TimeSeries run_protocol(const model::ClusterConfig& cfg, const Protocol& proto, const RunOptions& opt) {
  Propagator prop(cfg);
  return run_protocol(cfg, proto, prop, opt);
}

}  // namespace ratchet::dynamics
