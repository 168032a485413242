#pragma once

#include "ratchet/dynamics.hpp"
#include "ratchet/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ratchet::config {

// Sweep window and schedule as written in a config file. Turned into a
// dynamics::Protocol once the cluster (and its crossing centre) is known.
struct ProtocolSpec {
  std::optional<double> field_center_mT;  // empty: crossing centre of the cluster
  double field_range_mT = 0.5;
  double beta_up_mT_per_ms = 3.0;
  double beta_down_mT_per_ms = 3.0;
  std::string sweeps = "up_down";  // up_down | up | down
  int n_cycles = 20;
  std::string light = "low_end";
  int light_every_cycles = 1;
  double epsilon0 = 2.0;
  double eta_nv = 1.0;
  bool dephase = true;
  bool t1 = false;
  std::vector<std::string> t1_sites{"P1"};
  double record_every_mT = 0.0;
  // Explicit segments replace the generated up/down schedule when present.
  std::optional<std::vector<dynamics::SweepSegment>> segments;
};

// Cluster description with angles in degrees, exactly as written in the file.
struct ClusterSpec {
  model::PhysicalConstants constants;
  double J_nv_p1_MHz = 0.5;
  double theta_nv_p1_deg = 45.0;
  double phi_nv_p1_deg = 0.0;
  double J_h_p1_MHz = 0.2;
  double theta_h_p1_deg = 45.0;
  double phi_h_p1_deg = 0.0;
  double field_theta_deg = 0.0;
  double field_phi_deg = 0.0;
  bool include_hosts = false;
  model::Real3 A_nv_MHz = 2.0 * model::Real3::Identity();
  model::Real3 Q_nv_MHz = model::Real3::Zero();
  model::Real3 A_p1_MHz = 115.0 * model::Real3::Identity();
  model::Real3 Q_p1_MHz = model::Real3::Zero();
  bool include_bystander = false;
  double J_nv_b1_MHz = 1.0;
  double theta_nv_b1_deg = 45.0;
  double phi_nv_b1_deg = 0.0;

  model::ClusterParams params() const;
};

struct RunConfig {
  ClusterSpec cluster;
  ProtocolSpec protocol;
  std::string output;  // empty: <output root>/simulate/<timestamp>
  std::uint64_t seed = 0;
  int verbosity = 0;
};

// Parses YAML (or JSON, which YAML reads too). A document with a top-level
// "config" member (a meta.json sidecar) is unwrapped first. Throws ConfigError
// naming the offending key.
RunConfig parse(const std::string& text);
RunConfig load_file(const std::string& path);

// `key=value` overrides with dotted paths, e.g. protocol.beta_up_mT_per_ms=5.
void apply_override(RunConfig& cfg, const std::string& assignment);

nlohmann::json to_json(const RunConfig& cfg);

dynamics::Protocol resolve_protocol(const ProtocolSpec& spec, const model::ClusterConfig& cluster);

// Stable 64-bit FNV-1a hash rendered as hex.
std::string content_hash(const std::string& text);

}  // namespace ratchet::config
