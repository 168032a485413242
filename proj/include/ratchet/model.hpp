#pragma once

#include "ratchet/spin.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace ratchet::model {

using Real3 = Eigen::Matrix3d;

// Energies in MHz, fields in mT.
struct PhysicalConstants {
  double D = 2870.0;
  double gamma_e = 28.025;
  double gamma_H = 0.042577;
  double gamma_N = 0.003077;
};

struct DipolarCoupling {
  double J = 0.0;  // MHz
  double theta = 0.0;
  double phi = 0.0;
  std::size_t site_a = 0;
  std::size_t site_b = 0;
};

struct HyperfineTensor {
  Real3 A = Real3::Zero();
  Real3 Q = Real3::Zero();
};

// Electron-nucleus pair for a host nitrogen.
struct HostCoupling {
  std::size_t electron = 0;
  std::size_t nucleus = 0;
  HyperfineTensor tensor;
};

// User-facing description of the cluster. Couplings are named by role so a
// config file never has to know site indices.
struct ClusterParams {
  PhysicalConstants constants;

  double J_nv_p1 = 0.5;
  double theta_nv_p1 = 0.7853981633974483;
  double phi_nv_p1 = 0.0;

  double J_h_p1 = 0.2;
  double theta_h_p1 = 0.7853981633974483;
  double phi_h_p1 = 0.0;

  double field_theta = 0.0;
  double field_phi = 0.0;

  bool include_hosts = false;
  HyperfineTensor host_nv{2.0 * Real3::Identity(), Real3::Zero()};
  HyperfineTensor host_p1{115.0 * Real3::Identity(), Real3::Zero()};

  bool include_bystander = false;
  double J_nv_b1 = 1.0;
  double theta_nv_b1 = 0.7853981633974483;
  double phi_nv_b1 = 0.0;
};

struct ClusterConfig {
  ClusterParams params;
  spin::HilbertLayout layout;
  std::vector<DipolarCoupling> couplings;
  std::vector<HostCoupling> hosts;

  const PhysicalConstants& constants() const { return params.constants; }
  std::size_t nv() const { return layout.index_of("NV"); }
  std::size_t p1() const { return layout.index_of("P1"); }
  std::size_t proton() const { return layout.index_of("H"); }
  std::optional<std::size_t> bystander() const { return layout.find("B1"); }
};

// Validates params and builds the layout: NV, P1, H, then N_NV, N_P1, B1 when enabled.
ClusterConfig make_cluster(const ClusterParams& p);

// Same cluster without hosts or bystander, and with the field along the NV axis.
ClusterConfig aligned_core(const ClusterConfig& cfg);

struct DipolarGeometry {
  double g0 = 0.0;
  std::complex<double> g1;
  std::complex<double> g2;
};

DipolarGeometry dipolar_geometry(double theta, double phi);

Matrix dipolar_hamiltonian(const DipolarCoupling& c, const spin::HilbertLayout& layout);

// H(B) = fixed + B * per_mT.
struct HamiltonianParts {
  Matrix fixed;
  Matrix per_mT;

  Matrix at(double B) const { return fixed + B * per_mT; }
};

HamiltonianParts hamiltonian_parts(const ClusterConfig& cfg);
Matrix assemble_hamiltonian(const ClusterConfig& cfg, double B);

// Basis indices of |0,+1/2,up>, |0,+1/2,down>, |-1,-1/2,up>, |-1,-1/2,down>
// (NV, P1, H; every other site at its highest projection).
std::array<int, 4> central_subspace_indices(const ClusterConfig& cfg);
Eigen::Matrix4cd central_subspace(const ClusterConfig& cfg, double B);

// Field where the NV 0<->-1 splitting equals the P1 Zeeman splitting.
double matching_field(const ClusterConfig& cfg);

// Same resonance ignoring the proton and the dipolar shift; the centre of the
// set of avoided crossings used for default sweep windows.
double crossing_center(const ClusterConfig& cfg);

struct GapEstimate {
  double delta0 = 0.0;
  double delta1 = 0.0;
  double Z1 = 0.0;
  double Z2 = 0.0;
  std::complex<double> V_SS;
  std::complex<double> V_DQ;
  double E0 = 0.0;
  double Ea = 0.0;
  double Eb = 0.0;
  std::complex<double> J_virtual;
  double B_m = 0.0;
};

GapEstimate gap_estimates(const ClusterConfig& cfg);

struct AvoidedCrossing {
  double B = 0.0;
  double gap = 0.0;
  int lower_rank = 0;  // energy rank of the lower level
  std::string lower_label;
  std::string upper_label;
};

struct BranchDiagram {
  std::vector<double> B;
  std::vector<std::vector<double>> energy;  // [point][branch]
  std::vector<std::string> labels;          // per branch
  std::vector<AvoidedCrossing> crossings;
};

struct BranchOptions {
  int max_refine_depth = 24;
  double min_overlap = 0.5;
  double degeneracy_tol = 1e-9;  // MHz
  double crossing_max_gap = 5.0;  // MHz; wider local minima are not reported
  double crossing_min_gap = 1e-4;  // MHz; narrower minima are true crossings at the minimiser's resolution
};

BranchDiagram eigen_branches(const ClusterConfig& cfg, const std::vector<double>& B_grid,
                             const BranchOptions& opt = {});

}  // namespace ratchet::model
