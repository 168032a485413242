#include "ratchet/config.hpp"

#include "ratchet/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace ratchet::config {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string join_keys(const std::vector<std::string>& keys) {
  std::string out;
  for (const auto& k : keys) out += (out.empty() ? "" : ", ") + k;
  return out;
}

// One config key: how to read it from YAML and write it to JSON.
struct Field {
  std::string key;
  std::function<void(const YAML::Node&, const std::string& path)> read;
  std::function<nlohmann::json()> write;
};

double as_double(const YAML::Node& n, const std::string& path) {
  try {
    const double v = n.as<double>();
    if (!std::isfinite(v)) throw ConfigError(path + ": must be finite");
    return v;
  } catch (const YAML::Exception&) {
    throw ConfigError(path + ": expected a number");
  }
}

bool as_bool(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path + ": expected true or false");
  }
}

int as_int(const YAML::Node& n, const std::string& path) {
  try {
    return n.as<int>();
  } catch (const YAML::Exception&) {
    throw ConfigError(path + ": expected an integer");
  }
}

std::string as_string(const YAML::Node& n, const std::string& path) {
  if (!n.IsScalar()) throw ConfigError(path + ": expected a string");
  return n.as<std::string>();
}

// Scalar -> isotropic, or a 3x3 nested list.
model::Real3 as_tensor(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return as_double(n, path) * model::Real3::Identity();
  if (!n.IsSequence() || n.size() != 3) throw ConfigError(path + ": expected a number or a 3x3 list (MHz)");
  model::Real3 t;
  for (int i = 0; i < 3; ++i) {
    if (!n[i].IsSequence() || n[i].size() != 3) throw ConfigError(path + ": expected a 3x3 list (MHz)");
    for (int j = 0; j < 3; ++j) t(i, j) = as_double(n[i][j], path);
  }
  return t;
}

nlohmann::json tensor_json(const model::Real3& t) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) out.push_back({t(i, 0), t(i, 1), t(i, 2)});
  return out;
}

Field num(std::string key, double& ref) {
  return {key, [&ref](const YAML::Node& n, const std::string& p) { ref = as_double(n, p); },
          [&ref] { return nlohmann::json(ref); }};
}
Field flag(std::string key, bool& ref) {
  return {key, [&ref](const YAML::Node& n, const std::string& p) { ref = as_bool(n, p); },
          [&ref] { return nlohmann::json(ref); }};
}
Field integer(std::string key, int& ref) {
  return {key, [&ref](const YAML::Node& n, const std::string& p) { ref = as_int(n, p); },
          [&ref] { return nlohmann::json(ref); }};
}
Field text(std::string key, std::string& ref) {
  return {key, [&ref](const YAML::Node& n, const std::string& p) { ref = as_string(n, p); },
          [&ref] { return nlohmann::json(ref); }};
}
Field tensor(std::string key, model::Real3& ref) {
  return {key, [&ref](const YAML::Node& n, const std::string& p) { ref = as_tensor(n, p); },
          [&ref] { return tensor_json(ref); }};
}

void read_section(const YAML::Node& node, const std::string& section, const std::vector<Field>& fields) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError(section + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const std::string path = section + "." + key;
    auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) { return f.key == key; });
    if (it != fields.end()) {
      it->read(kv.second, path);
      continue;
    }
    for (const auto& f : fields) {
      if (f.key.rfind(key + "_", 0) == 0) {
        throw ConfigError(path + ": key lacks its unit suffix; expected '" + f.key + "'");
      }
    }
    std::vector<std::string> known;
    for (const auto& f : fields) known.push_back(f.key);
    throw ConfigError(path + ": unknown key (known: " + join_keys(known) + ")");
  }
}

nlohmann::json write_section(const std::vector<Field>& fields) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& f : fields) out[f.key] = f.write();
  return out;
}

std::vector<Field> constants_fields(model::PhysicalConstants& k) {
  return {num("D_MHz", k.D), num("gamma_e_MHz_per_mT", k.gamma_e), num("gamma_H_MHz_per_mT", k.gamma_H),
          num("gamma_N_MHz_per_mT", k.gamma_N)};
}

std::vector<Field> cluster_fields(ClusterSpec& c) {
  return {num("J_nv_p1_MHz", c.J_nv_p1_MHz),
          num("theta_nv_p1_deg", c.theta_nv_p1_deg),
          num("phi_nv_p1_deg", c.phi_nv_p1_deg),
          num("J_h_p1_MHz", c.J_h_p1_MHz),
          num("theta_h_p1_deg", c.theta_h_p1_deg),
          num("phi_h_p1_deg", c.phi_h_p1_deg),
          num("field_theta_deg", c.field_theta_deg),
          num("field_phi_deg", c.field_phi_deg),
          flag("include_hosts", c.include_hosts),
          tensor("A_nv_MHz", c.A_nv_MHz),
          tensor("Q_nv_MHz", c.Q_nv_MHz),
          tensor("A_p1_MHz", c.A_p1_MHz),
          tensor("Q_p1_MHz", c.Q_p1_MHz),
          flag("include_bystander", c.include_bystander),
          num("J_nv_b1_MHz", c.J_nv_b1_MHz),
          num("theta_nv_b1_deg", c.theta_nv_b1_deg),
          num("phi_nv_b1_deg", c.phi_nv_b1_deg)};
}

dynamics::SweepSegment read_segment(const YAML::Node& n, const std::string& path) {
  dynamics::SweepSegment s;
  bool have_start = false;
  bool have_end = false;
  bool have_beta = false;
  std::vector<Field> fields{
      {"B_start_mT", [&](const YAML::Node& v, const std::string& p) { s.B_start = as_double(v, p); have_start = true; }, {}},
      {"B_end_mT", [&](const YAML::Node& v, const std::string& p) { s.B_end = as_double(v, p); have_end = true; }, {}},
      {"beta_mT_per_ms", [&](const YAML::Node& v, const std::string& p) { s.beta = as_double(v, p); have_beta = true; }, {}},
      {"dephase", [&](const YAML::Node& v, const std::string& p) { s.dephase_at_end = as_bool(v, p); }, {}},
      {"t1_events_ms",
       [&](const YAML::Node& v, const std::string& p) {
         if (!v.IsSequence()) throw ConfigError(p + ": expected a list of times (ms)");
         for (const auto& t : v) s.t1_events.push_back(as_double(t, p));
       },
       {}},
  };
  read_section(n, path, fields);
  if (!have_start || !have_end || !have_beta) {
    throw ConfigError(path + ": segments need B_start_mT, B_end_mT and beta_mT_per_ms");
  }
  if (!(s.beta > 0.0)) throw ConfigError(path + ".beta_mT_per_ms: must be > 0 mT/ms");
  return s;
}

nlohmann::json segment_json(const dynamics::SweepSegment& s) {
  return {{"B_start_mT", s.B_start}, {"B_end_mT", s.B_end},         {"beta_mT_per_ms", s.beta},
          {"dephase", s.dephase_at_end}, {"t1_events_ms", s.t1_events}};
}

std::vector<Field> protocol_fields(ProtocolSpec& p) {
  return {
      {"field_center_mT",
       [&p](const YAML::Node& n, const std::string& path) {
         if (n.IsScalar() && n.as<std::string>() == "auto") {
           p.field_center_mT.reset();
         } else {
           p.field_center_mT = as_double(n, path);
         }
       },
       [&p] { return p.field_center_mT ? nlohmann::json(*p.field_center_mT) : nlohmann::json("auto"); }},
      num("field_range_mT", p.field_range_mT),
      num("beta_up_mT_per_ms", p.beta_up_mT_per_ms),
      num("beta_down_mT_per_ms", p.beta_down_mT_per_ms),
      text("sweeps", p.sweeps),
      integer("n_cycles", p.n_cycles),
      text("light", p.light),
      integer("light_every_cycles", p.light_every_cycles),
      num("epsilon0", p.epsilon0),
      num("eta_nv", p.eta_nv),
      flag("dephase", p.dephase),
      flag("t1", p.t1),
      {"t1_sites",
       [&p](const YAML::Node& n, const std::string& path) {
         if (!n.IsSequence()) throw ConfigError(path + ": expected a list of site labels");
         p.t1_sites.clear();
         for (const auto& s : n) p.t1_sites.push_back(as_string(s, path));
       },
       [&p] { return nlohmann::json(p.t1_sites); }},
      num("record_every_mT", p.record_every_mT),
      {"segments",
       [&p](const YAML::Node& n, const std::string& path) {
         if (!n.IsSequence()) throw ConfigError(path + ": expected a list of segments");
         std::vector<dynamics::SweepSegment> segs;
         for (std::size_t i = 0; i < n.size(); ++i) segs.push_back(read_segment(n[i], path + "[" + std::to_string(i) + "]"));
         p.segments = std::move(segs);
       },
       [&p] {
         if (!p.segments) return nlohmann::json(nullptr);
         nlohmann::json a = nlohmann::json::array();
         for (const auto& s : *p.segments) a.push_back(segment_json(s));
         return a;
       }},
  };
}

struct RunFields {
  std::vector<Field> fields;
  explicit RunFields(RunConfig& c) {
    fields = {text("output_path", c.output),
              {"seed", [&c](const YAML::Node& n, const std::string& p) {
                 try {
                   c.seed = n.as<std::uint64_t>();
                 } catch (const YAML::Exception&) {
                   throw ConfigError(p + ": expected a non-negative integer");
                 }
               },
               [&c] { return nlohmann::json(c.seed); }},
              integer("verbosity", c.verbosity)};
  }
};

void validate(const RunConfig& c) {
  const auto& p = c.protocol;
  auto positive = [](double v, const std::string& path, const char* unit) {
    if (!(v > 0.0)) throw ConfigError(path + ": must be > 0 " + unit + " (got " + std::to_string(v) + ")");
  };
  positive(p.beta_up_mT_per_ms, "protocol.beta_up_mT_per_ms", "mT/ms");
  positive(p.beta_down_mT_per_ms, "protocol.beta_down_mT_per_ms", "mT/ms");
  positive(p.field_range_mT, "protocol.field_range_mT", "mT");
  if (p.field_center_mT && *p.field_center_mT - 0.5 * p.field_range_mT < 0.0) {
    throw ConfigError("protocol.field_center_mT: sweep window reaches negative fields");
  }
  if (p.sweeps != "up_down" && p.sweeps != "up" && p.sweeps != "down") {
    throw ConfigError("protocol.sweeps: expected up_down, up or down");
  }
  if (p.n_cycles < 0) throw ConfigError("protocol.n_cycles: must be >= 0");
  if (p.light_every_cycles < 1) throw ConfigError("protocol.light_every_cycles: must be >= 1");
  if (!(p.epsilon0 >= 0.0 && p.epsilon0 <= 2.0)) throw ConfigError("protocol.epsilon0: must lie in [0, 2]");
  if (!(p.eta_nv >= 0.0 && p.eta_nv <= 1.0)) throw ConfigError("protocol.eta_nv: must lie in [0, 1]");
  if (p.record_every_mT < 0.0) throw ConfigError("protocol.record_every_mT: must be >= 0 mT");
  dynamics::parse_light(p.light);
  const auto& cl = c.cluster;
  for (auto [v, path] : {std::pair{cl.J_nv_p1_MHz, "cluster.J_nv_p1_MHz"}, {cl.J_h_p1_MHz, "cluster.J_h_p1_MHz"},
                         {cl.J_nv_b1_MHz, "cluster.J_nv_b1_MHz"}}) {
    if (v < 0.0) throw ConfigError(std::string(path) + ": must be >= 0 MHz");
  }
  const auto& k = cl.constants;
  for (auto [v, path] : {std::pair{k.D, "constants.D_MHz"}, {k.gamma_e, "constants.gamma_e_MHz_per_mT"},
                         {k.gamma_H, "constants.gamma_H_MHz_per_mT"}, {k.gamma_N, "constants.gamma_N_MHz_per_mT"}}) {
    positive(v, path, "");
  }
}

RunConfig from_node(YAML::Node root) {
  if (root && root.IsMap() && root["config"]) root = root["config"];
  RunConfig c;
  if (!root || root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("config: expected a mapping at the top level");
  RunFields run(c);
  auto cluster = cluster_fields(c.cluster);
  auto constants = constants_fields(c.cluster.constants);
  auto protocol = protocol_fields(c.protocol);
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key == "cluster") {
      read_section(kv.second, "cluster", cluster);
    } else if (key == "constants") {
      read_section(kv.second, "constants", constants);
    } else if (key == "protocol") {
      read_section(kv.second, "protocol", protocol);
    } else if (key == "run") {
      read_section(kv.second, "run", run.fields);
    } else {
      throw ConfigError(key + ": unknown section (expected cluster, constants, protocol, run)");
    }
  }
  validate(c);
  return c;
}

}  // namespace

model::ClusterParams ClusterSpec::params() const {
  model::ClusterParams p;
  p.constants = constants;
  p.J_nv_p1 = J_nv_p1_MHz;
  p.theta_nv_p1 = theta_nv_p1_deg * kDeg;
  p.phi_nv_p1 = phi_nv_p1_deg * kDeg;
  p.J_h_p1 = J_h_p1_MHz;
  p.theta_h_p1 = theta_h_p1_deg * kDeg;
  p.phi_h_p1 = phi_h_p1_deg * kDeg;
  p.field_theta = field_theta_deg * kDeg;
  p.field_phi = field_phi_deg * kDeg;
  p.include_hosts = include_hosts;
  p.host_nv = {A_nv_MHz, Q_nv_MHz};
  p.host_p1 = {A_p1_MHz, Q_p1_MHz};
  p.include_bystander = include_bystander;
  p.J_nv_b1 = J_nv_b1_MHz;
  p.theta_nv_b1 = theta_nv_b1_deg * kDeg;
  p.phi_nv_b1 = phi_nv_b1_deg * kDeg;
  return p;
}

RunConfig parse(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_node(root);
}

RunConfig load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + assignment + "': expected section.key=value");
  }
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string value = assignment.substr(eq + 1);
  nlohmann::json j = to_json(cfg);
  if (!j.contains(section)) throw ConfigError("override '" + assignment + "': unknown section " + section);
  // Let the YAML reader interpret the value, then reuse the normal parsing path.
  YAML::Node v;
  try {
    v = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("override '" + assignment + "': " + e.what());
  }
  YAML::Node root = YAML::Load(j.dump());
  root[section][key] = v;
  cfg = from_node(root);
}

nlohmann::json to_json(const RunConfig& cfg) {
  RunConfig c = cfg;  // fields bind to non-const references
  RunFields run(c);
  nlohmann::json out;
  out["cluster"] = write_section(cluster_fields(c.cluster));
  out["constants"] = write_section(constants_fields(c.cluster.constants));
  nlohmann::json proto = write_section(protocol_fields(c.protocol));
  if (proto["segments"].is_null()) proto.erase("segments");
  out["protocol"] = proto;
  out["run"] = write_section(run.fields);
  return out;
}

dynamics::Protocol resolve_protocol(const ProtocolSpec& spec, const model::ClusterConfig& cluster) {
  dynamics::Protocol p;
  p.light = dynamics::parse_light(spec.light);
  p.light_every = spec.light_every_cycles;
  p.epsilon0 = spec.epsilon0;
  p.eta_nv = spec.eta_nv;
  p.n_cycles = spec.n_cycles;
  p.t1_sites = spec.t1_sites;
  p.record_every_mT = spec.record_every_mT;
  if (spec.segments) {
    p.segments = *spec.segments;
    return p;
  }
  const double c = spec.field_center_mT ? *spec.field_center_mT : model::crossing_center(cluster);
  const double lo = c - 0.5 * spec.field_range_mT;
  const double hi = c + 0.5 * spec.field_range_mT;
  const auto full = dynamics::ratchet_protocol(lo, hi, spec.beta_up_mT_per_ms, spec.beta_down_mT_per_ms,
                                               spec.n_cycles, p.light, spec.dephase, spec.t1);
  if (spec.sweeps == "up_down") {
    p.segments = full.segments;
  } else if (spec.sweeps == "up") {
    p.segments = {full.segments[0]};
  } else {
    p.segments = {full.segments[1]};
  }
  return p;
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace ratchet::config
