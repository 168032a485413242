#include "ratchet/model.hpp"

#include "ratchet/errors.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace ratchet::model {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ConfigError(std::string(what) + " must be finite");
}

void require_coupling(double J, const char* what) {
  require_finite(J, what);
  if (J < 0.0) throw ConfigError(std::string(what) + " must be >= 0 (MHz), got " + std::to_string(J));
}

void require_tensor(const HyperfineTensor& t, const char* what) {
  if (!t.A.allFinite() || !t.Q.allFinite()) throw ConfigError(std::string(what) + ": tensors must be finite");
  if ((t.Q - t.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError(std::string(what) + ": quadrupole tensor must be symmetric");
  }
}

Eigen::Vector3d field_direction(const ClusterParams& p) {
  return {std::sin(p.field_theta) * std::cos(p.field_phi), std::sin(p.field_theta) * std::sin(p.field_phi),
          std::cos(p.field_theta)};
}

std::array<Matrix, 3> cartesian(const spin::SpinOperatorSet& s) { return {s.sx, s.sy, s.sz}; }

}  // namespace

ClusterConfig make_cluster(const ClusterParams& p) {
  require_coupling(p.J_nv_p1, "NV-P1 coupling");
  require_coupling(p.J_h_p1, "H-P1 coupling");
  for (double a : {p.theta_nv_p1, p.phi_nv_p1, p.theta_h_p1, p.phi_h_p1, p.field_theta, p.field_phi}) {
    require_finite(a, "angle");
  }
  const auto& c = p.constants;
  for (double v : {c.D, c.gamma_e, c.gamma_H, c.gamma_N}) {
    require_finite(v, "physical constant");
    if (v <= 0.0) throw ConfigError("physical constants are stored as positive magnitudes");
  }

  ClusterConfig cfg;
  cfg.params = p;
  const auto nv = cfg.layout.add_site("NV", 1.0);
  const auto p1 = cfg.layout.add_site("P1", 0.5);
  const auto h = cfg.layout.add_site("H", 0.5);
  cfg.couplings.push_back({p.J_nv_p1, p.theta_nv_p1, p.phi_nv_p1, nv, p1});
  cfg.couplings.push_back({p.J_h_p1, p.theta_h_p1, p.phi_h_p1, h, p1});

  if (p.include_hosts) {
    require_tensor(p.host_nv, "NV host nitrogen");
    require_tensor(p.host_p1, "P1 host nitrogen");
    const auto n_nv = cfg.layout.add_site("N_NV", 1.0);
    const auto n_p1 = cfg.layout.add_site("N_P1", 1.0);
    cfg.hosts.push_back({nv, n_nv, p.host_nv});
    cfg.hosts.push_back({p1, n_p1, p.host_p1});
  }
  if (p.include_bystander) {
    require_coupling(p.J_nv_b1, "NV-B1 coupling");
    require_finite(p.theta_nv_b1, "angle");
    require_finite(p.phi_nv_b1, "angle");
    const auto b1 = cfg.layout.add_site("B1", 0.5);
    cfg.couplings.push_back({p.J_nv_b1, p.theta_nv_b1, p.phi_nv_b1, nv, b1});
  }
  return cfg;
}

ClusterConfig aligned_core(const ClusterConfig& cfg) {
  ClusterParams p = cfg.params;
  p.include_hosts = false;
  p.include_bystander = false;
  p.field_theta = 0.0;
  p.field_phi = 0.0;
  return make_cluster(p);
}

DipolarGeometry dipolar_geometry(double theta, double phi) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  DipolarGeometry g;
  g.g0 = 1.0 - 3.0 * c * c;
  g.g1 = -1.5 * s * c * std::polar(1.0, -phi);
  g.g2 = -0.75 * s * s * std::polar(1.0, -2.0 * phi);
  return g;
}

Matrix dipolar_hamiltonian(const DipolarCoupling& c, const spin::HilbertLayout& layout) {
  const auto sa = spin::spin_operators(layout.site(c.site_a).spin);
  const auto sb = spin::spin_operators(layout.site(c.site_b).spin);
  const auto g = dipolar_geometry(c.theta, c.phi);
  const auto gm = dipolar_geometry(c.theta, -c.phi);
  auto pr = [&](const Matrix& x, const Matrix& y) { return spin::embed_product(x, c.site_a, y, c.site_b, layout); };

  Matrix h = g.g0 * (pr(sa.sz, sb.sz) - 0.25 * pr(sa.sminus, sb.splus) - 0.25 * pr(sa.splus, sb.sminus));
  h += g.g1 * (pr(sa.splus, sb.sz) + pr(sa.sz, sb.splus));
  h += gm.g1 * (pr(sa.sminus, sb.sz) + pr(sa.sz, sb.sminus));
  h += g.g2 * pr(sa.splus, sb.splus);
  h += gm.g2 * pr(sa.sminus, sb.sminus);
  return c.J * h;
}

HamiltonianParts hamiltonian_parts(const ClusterConfig& cfg) {
  const auto& layout = cfg.layout;
  const auto& k = cfg.constants();
  const int n = layout.dim();
  const Eigen::Vector3d dir = field_direction(cfg.params);

  HamiltonianParts parts{Matrix::Zero(n, n), Matrix::Zero(n, n)};

  auto zeeman = [&](std::size_t site, double gamma) {
    const auto ops = cartesian(spin::spin_operators(layout.site(site).spin));
    Matrix local = Matrix::Zero(ops[0].rows(), ops[0].cols());
    for (int a = 0; a < 3; ++a) local += dir(a) * ops[a];
    parts.per_mT += gamma * spin::embed(local, site, layout);
  };

  const auto nv = cfg.nv();
  const auto nv_ops = spin::spin_operators(1.0);
  parts.fixed += k.D * spin::embed(nv_ops.sz * nv_ops.sz, nv, layout);
  zeeman(nv, k.gamma_e);
  zeeman(cfg.p1(), k.gamma_e);
  zeeman(cfg.proton(), -k.gamma_H);
  if (auto b1 = cfg.bystander()) zeeman(*b1, k.gamma_e);

  for (const auto& c : cfg.couplings) parts.fixed += dipolar_hamiltonian(c, layout);

  for (const auto& host : cfg.hosts) {
    zeeman(host.nucleus, -k.gamma_N);
    const auto s = cartesian(spin::spin_operators(layout.site(host.electron).spin));
    const auto kk = cartesian(spin::spin_operators(layout.site(host.nucleus).spin));
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (host.tensor.A(a, b) != 0.0) {
          parts.fixed += host.tensor.A(a, b) * spin::embed_product(s[a], host.electron, kk[b], host.nucleus, layout);
        }
        if (host.tensor.Q(a, b) != 0.0) {
          parts.fixed += host.tensor.Q(a, b) * spin::embed(kk[a] * kk[b], host.nucleus, layout);
        }
      }
    }
  }
  return parts;
}

Matrix assemble_hamiltonian(const ClusterConfig& cfg, double B) { return hamiltonian_parts(cfg).at(B); }

std::array<int, 4> central_subspace_indices(const ClusterConfig& cfg) {
  const auto& layout = cfg.layout;
  std::vector<double> m(layout.size());
  for (std::size_t k = 0; k < layout.size(); ++k) m[k] = layout.site(k).spin;
  const auto nv = cfg.nv();
  const auto p1 = cfg.p1();
  const auto h = cfg.proton();
  auto idx = [&](double m_nv, double m_p1, double m_h) {
    m[nv] = m_nv;
    m[p1] = m_p1;
    m[h] = m_h;
    return layout.index_of_projections(m);
  };
  return {idx(0, 0.5, 0.5), idx(0, 0.5, -0.5), idx(-1, -0.5, 0.5), idx(-1, -0.5, -0.5)};
}

Eigen::Matrix4cd central_subspace(const ClusterConfig& cfg, double B) {
  const Matrix H = assemble_hamiltonian(cfg, B);
  const auto idx = central_subspace_indices(cfg);
  Eigen::Matrix4cd out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out(i, j) = H(idx[i], idx[j]);
  }
  return out;
}

namespace {

// Root of f on [lo, hi] by scanning for the first sign change and polishing it.
double bracketed_root(const std::function<double(double)>& f, double lo, double hi, int scan_points,
                      const char* what) {
  double a = lo;
  double fa = f(a);
  for (int i = 1; i <= scan_points; ++i) {
    const double b = lo + (hi - lo) * i / scan_points;
    const double fb = f(b);
    if (fa == 0.0) return a;
    if (fa * fb < 0.0 || fb == 0.0) {
      if (fb == 0.0) return b;
      std::uintmax_t iters = 200;
      auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(48),
                                                 iters);
      return 0.5 * (r.first + r.second);
    }
    a = b;
    fa = fb;
  }
  throw NoRootError(std::string(what) + ": no sign change in [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "] mT");
}

// NV 0<->-1 splitting minus the P1 Zeeman splitting for a tilted field.
double nv_p1_mismatch(const ClusterParams& p, double B) {
  const auto s = spin::spin_operators(1.0);
  const Eigen::Vector3d dir = field_direction(p);
  const auto& k = p.constants;
  Matrix h = k.D * s.sz * s.sz + k.gamma_e * B * (dir(0) * s.sx + dir(1) * s.sy + dir(2) * s.sz);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  const auto& w = es.eigenvalues();
  return (w(1) - w(0)) - k.gamma_e * B;
}

constexpr double kBracketLo = 40.0;
constexpr double kBracketHi = 120.0;

}  // namespace

double matching_field(const ClusterConfig& cfg) {
  const auto& p = cfg.params;
  if (p.field_theta == 0.0) {
    // Diagonal resonance of |0,+1/2,down> and |-1,-1/2,up>.
    const auto& k = p.constants;
    const double Z1 = dipolar_geometry(p.theta_nv_p1, p.phi_nv_p1).g0 * p.J_nv_p1;
    const double B = (k.D + 0.5 * Z1) / (2.0 * k.gamma_e + k.gamma_H);
    if (B < kBracketLo || B > kBracketHi) throw NoRootError("matching field outside the search bracket");
    return B;
  }
  return bracketed_root([&](double B) { return nv_p1_mismatch(p, B); }, kBracketLo, kBracketHi, 1600,
                        "matching field");
}

double crossing_center(const ClusterConfig& cfg) {
  return bracketed_root([&](double B) { return nv_p1_mismatch(cfg.params, B); }, kBracketLo, kBracketHi, 1600,
                        "crossing centre");
}

GapEstimate gap_estimates(const ClusterConfig& cfg) {
  const ClusterConfig core = aligned_core(cfg);
  const auto& p = core.params;
  GapEstimate g;
  g.B_m = matching_field(core);
  g.Z1 = dipolar_geometry(p.theta_nv_p1, p.phi_nv_p1).g0 * p.J_nv_p1;
  g.Z2 = dipolar_geometry(p.theta_h_p1, p.phi_h_p1).g0 * p.J_h_p1;

  // 0: |0,+1/2,up>  1: |0,+1/2,down>  2: |-1,-1/2,up>  3: |-1,-1/2,down>
  const Eigen::Matrix4cd h = central_subspace(core, g.B_m);
  g.V_SS = h(0, 1);
  g.V_DQ = h(0, 2);
  g.E0 = 0.5 * (h(1, 1).real() + h(2, 2).real());
  g.Ea = h(0, 0).real();
  g.Eb = h(3, 3).real();

  const double scale = std::max(1.0, std::abs(g.E0));
  for (double d : {g.E0 - g.Ea, g.E0 - g.Eb}) {
    if (std::abs(d) < 1e-9 * scale) {
      throw DegenerateDenominatorError("virtual coupling denominator vanishes (proton Larmor frequency ~ Z2/2)");
    }
  }
  const std::complex<double> Ja = h(2, 0) * h(0, 1) / (g.E0 - g.Ea);
  const std::complex<double> Jb = h(2, 3) * h(3, 1) / (g.E0 - g.Eb);
  g.J_virtual = Ja + Jb;
  g.delta0 = 2.0 * std::abs(g.V_DQ);
  g.delta1 = 2.0 * std::abs(g.J_virtual);
  return g;
}

// ---------------------------------------------------------------------------
// Branch tracking

namespace {

struct Spectrum {
  Eigen::VectorXd w;
  Matrix v;
};

Spectrum diagonalize(const HamiltonianParts& parts, double B) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(parts.at(B));
  return {es.eigenvalues(), es.eigenvectors()};
}

std::string branch_label(const spin::HilbertLayout& layout, int global) {
  const auto local = layout.local_indices(global);
  std::string out = "|";
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (k) out += ",";
    const auto& site = layout.site(k);
    const double m = spin::projection(site.spin, local[k]);
    if (site.label == "H") {
      out += m > 0 ? "up" : "down";
    } else {
      const long twice = std::lround(2.0 * m);
      if (twice == 0) {
        out += "0";
      } else if (twice % 2 == 0) {
        out += (twice > 0 ? "+" : "-") + std::to_string(std::abs(twice / 2));
      } else {
        out += (twice > 0 ? "+" : "-") + std::to_string(std::abs(twice)) + "/2";
      }
    }
  }
  return out + ">";
}

// Assigns the new spectrum to the existing branches. Returns false when some
// branch has no partner with overlap >= min_overlap.
bool assign(const Matrix& prev, const Spectrum& next, const BranchOptions& opt, Matrix& vec_out,
            std::vector<double>& energy_out) {
  const int n = static_cast<int>(next.w.size());

  // Group (near-)degenerate eigenvalues; overlaps are taken with the whole group.
  std::vector<std::vector<int>> groups;
  for (int j = 0; j < n; ++j) {
    if (!groups.empty() && next.w(j) - next.w(groups.back().back()) < opt.degeneracy_tol) {
      groups.back().push_back(j);
    } else {
      groups.push_back({j});
    }
  }
  const int ng = static_cast<int>(groups.size());
  const Matrix proj = next.v.adjoint() * prev;  // <w_j|v_k>
  Eigen::MatrixXd ov = Eigen::MatrixXd::Zero(n, ng);
  for (int k = 0; k < n; ++k) {
    for (int g = 0; g < ng; ++g) {
      for (int j : groups[g]) ov(k, g) += std::norm(proj(j, k));
    }
  }

  std::vector<int> capacity(ng);
  for (int g = 0; g < ng; ++g) capacity[g] = static_cast<int>(groups[g].size());
  std::vector<int> owner(n, -1);
  std::vector<std::pair<double, std::pair<int, int>>> cand;
  cand.reserve(static_cast<std::size_t>(n) * ng);
  for (int k = 0; k < n; ++k) {
    for (int g = 0; g < ng; ++g) cand.push_back({ov(k, g), {k, g}});
  }
  std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  int assigned = 0;
  for (const auto& [o, kg] : cand) {
    const auto [k, g] = kg;
    if (owner[k] >= 0 || capacity[g] == 0) continue;
    if (o < opt.min_overlap) return false;
    owner[k] = g;
    --capacity[g];
    if (++assigned == n) break;
  }

  vec_out.resize(n, n);
  energy_out.assign(n, 0.0);
  for (int g = 0; g < ng; ++g) {
    std::vector<int> members;
    for (int k = 0; k < n; ++k) {
      if (owner[k] == g) members.push_back(k);
    }
    const auto& js = groups[g];
    if (js.size() == 1) {
      vec_out.col(members[0]) = next.v.col(js[0]);
      energy_out[members[0]] = next.w(js[0]);
      continue;
    }
    // Rotate the degenerate group so each member keeps its own character.
    Matrix basis(n, static_cast<Eigen::Index>(js.size()));
    for (std::size_t i = 0; i < js.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = next.v.col(js[i]);
    double mean = 0.0;
    for (int j : js) mean += next.w(j);
    mean /= static_cast<double>(js.size());
    std::vector<Vector> done;
    std::size_t fallback = 0;
    for (int k : members) {
      Vector u = basis * (basis.adjoint() * prev.col(k));
      for (const auto& d : done) u -= d * d.dot(u);
      while (u.norm() < 1e-8 && fallback < js.size()) {
        u = next.v.col(js[fallback++]);
        for (const auto& d : done) u -= d * d.dot(u);
      }
      u.normalize();
      done.push_back(u);
      vec_out.col(k) = u;
      energy_out[k] = mean;
    }
  }
  return true;
}

}  // namespace

BranchDiagram eigen_branches(const ClusterConfig& cfg, const std::vector<double>& B_grid,
                             const BranchOptions& opt) {
  if (B_grid.empty()) return {};
  for (std::size_t i = 1; i < B_grid.size(); ++i) {
    if (!(B_grid[i] > B_grid[i - 1])) throw std::invalid_argument("field grid must be strictly increasing");
  }
  const auto parts = hamiltonian_parts(cfg);
  const int n = cfg.layout.dim();

  BranchDiagram out;
  Spectrum first = diagonalize(parts, B_grid.front());
  Matrix vecs = first.v;
  out.B.push_back(B_grid.front());
  out.energy.emplace_back(first.w.data(), first.w.data() + n);
  for (int k = 0; k < n; ++k) {
    Eigen::Index best = 0;
    vecs.col(k).cwiseAbs2().maxCoeff(&best);
    out.labels.push_back(branch_label(cfg.layout, static_cast<int>(best)));
  }

  // Advance from the last accepted point to `target`, bisecting when tracking fails.
  std::function<void(double, double, int)> advance = [&](double from, double to, int depth) {
    const Spectrum s = diagonalize(parts, to);
    Matrix next_vecs;
    std::vector<double> e;
    if (assign(vecs, s, opt, next_vecs, e)) {
      vecs = std::move(next_vecs);
      out.B.push_back(to);
      out.energy.push_back(std::move(e));
      return;
    }
    if (depth >= opt.max_refine_depth) {
      throw OverlapAmbiguityError("branch overlap below " + std::to_string(opt.min_overlap) + " near B = " +
                                  std::to_string(to) + " mT; refine the field grid");
    }
    const double mid = 0.5 * (from + to);
    advance(from, mid, depth + 1);
    advance(mid, to, depth + 1);
  };
  for (std::size_t i = 1; i < B_grid.size(); ++i) advance(B_grid[i - 1], B_grid[i], 0);

  // Avoided crossings: interior local minima of adjacent-rank spacings.
  const std::size_t np = out.B.size();
  std::vector<std::vector<int>> order(np);
  for (std::size_t i = 0; i < np; ++i) {
    order[i].resize(n);
    std::iota(order[i].begin(), order[i].end(), 0);
    std::stable_sort(order[i].begin(), order[i].end(),
                     [&](int a, int b) { return out.energy[i][a] < out.energy[i][b]; });
  }
  auto spacing = [&](std::size_t i, int r) {
    return out.energy[i][order[i][r + 1]] - out.energy[i][order[i][r]];
  };
  for (int r = 0; r + 1 < n; ++r) {
    for (std::size_t i = 1; i + 1 < np; ++i) {
      const double g = spacing(i, r);
      if (!(g < spacing(i - 1, r) && g <= spacing(i + 1, r)) || g > opt.crossing_max_gap) continue;
      auto f = [&](double B) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(parts.at(B), Eigen::EigenvaluesOnly);
        return es.eigenvalues()(r + 1) - es.eigenvalues()(r);
      };
      const auto [Bmin, gmin] = boost::math::tools::brent_find_minima(f, out.B[i - 1], out.B[i + 1], 40);
      if (gmin < opt.crossing_min_gap) continue;
      out.crossings.push_back({Bmin, gmin, r, out.labels[order[i - 1][r]], out.labels[order[i - 1][r + 1]]});
    }
  }
  std::stable_sort(out.crossings.begin(), out.crossings.end(),
                   [](const auto& a, const auto& b) { return a.B < b.B; });
  return out;
}

}  // namespace ratchet::model
