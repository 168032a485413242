#include "ratchet/errors.hpp"
#include "ratchet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ratchet::experiments {

namespace {

using LP = dynamics::LightPlacement;
constexpr double kDeg = std::numbers::pi / 180.0;

double get(const Params& p, const std::string& key) {
  auto it = p.find(key);
  if (it == p.end()) throw std::logic_error("scenario parameter missing: " + key);
  return it->second;
}
int get_int(const Params& p, const std::string& key) { return static_cast<int>(std::lround(get(p, key))); }
bool get_flag(const Params& p, const std::string& key) { return get(p, key) != 0.0; }

model::ClusterParams cluster_params(const Params& p) {
  model::ClusterParams c;
  if (p.count("J_nv_p1_MHz")) c.J_nv_p1 = get(p, "J_nv_p1_MHz");
  if (p.count("J_h_p1_MHz")) c.J_h_p1 = get(p, "J_h_p1_MHz");
  if (p.count("field_theta_deg")) c.field_theta = get(p, "field_theta_deg") * kDeg;
  if (p.count("field_phi_deg")) c.field_phi = get(p, "field_phi_deg") * kDeg;
  if (p.count("include_hosts")) c.include_hosts = get_flag(p, "include_hosts");
  if (p.count("J_nv_b1_MHz")) c.J_nv_b1 = get(p, "J_nv_b1_MHz");
  if (p.count("theta_nv_b1_deg")) c.theta_nv_b1 = get(p, "theta_nv_b1_deg") * kDeg;
  return c;
}

ScenarioResult make_result(const Scenario& s, const Params& p, Table data) {
  ScenarioResult r{s.name, s.figure, nlohmann::json::object(), std::move(data)};
  r.meta["description"] = s.description;
  r.meta["params"] = p;
  const std::string canon = nlohmann::json(p).dump();
  r.meta["config_hash"] = config::content_hash(s.name + canon);
  return r;
}

void append_series(Table& t, const dynamics::TimeSeries& ts, const std::vector<Cell>& prefix) {
  for (const auto& r : ts.records) {
    std::vector<Cell> row = prefix;
    for (Cell c : {Cell(r.t_ms), Cell(r.B_mT), Cell(r.pol_H), Cell(r.pol_NV), Cell(r.pol_P1),
                   Cell(static_cast<long>(r.cycle)), Cell(r.tag)}) {
      row.push_back(std::move(c));
    }
    t.add(std::move(row));
  }
}

std::vector<std::string> with_series_columns(std::vector<std::string> prefix) {
  for (const char* c : {"t_ms", "B_mT", "pol_H", "pol_NV", "pol_P1", "cycle_index", "event_tag"}) prefix.push_back(c);
  return prefix;
}

// Single low-to-high and high-to-low sweeps from a freshly pumped NV.
dynamics::TimeSeries single_sweep(const model::ClusterConfig& cfg, double center, double range, double beta,
                                  bool upward, double record_every) {
  dynamics::Protocol proto;
  const double lo = center - 0.5 * range;
  const double hi = center + 0.5 * range;
  proto.segments = {upward ? dynamics::SweepSegment{lo, hi, beta, false, {}}
                           : dynamics::SweepSegment{hi, lo, beta, false, {}}};
  proto.light = upward ? LP::LowEnd : LP::HighEnd;
  proto.record_every_mT = record_every;
  return dynamics::run_protocol(cfg, proto);
}

Params ratchet_defaults() {
  return {{"J_nv_p1_MHz", 0.5}, {"J_h_p1_MHz", 0.1}, {"beta_up_mT_per_ms", 3.0}, {"beta_down_mT_per_ms", 3.0},
          {"range_mT", 0.5},    {"n_cycles", 20},    {"dephase", 1},             {"t1", 0}};
}

RatchetSettings ratchet_settings(const Params& p, LP light) {
  RatchetSettings s;
  s.beta_up = get(p, "beta_up_mT_per_ms");
  s.beta_down = get(p, "beta_down_mT_per_ms");
  s.range_mT = get(p, "range_mT");
  s.n_cycles = get_int(p, "n_cycles");
  s.dephase = get_flag(p, "dephase");
  s.t1 = get_flag(p, "t1");
  s.light = light;
  return s;
}

Scenario fig2(const std::string& name, const std::string& figure, LP light, const std::string& what) {
  Scenario s{name, figure, "Ratchet cycles with the NV pumped " + what + "; proton polarization versus time",
             ratchet_defaults(), {}};
  s.run = [s, light](const Params& p, [[maybe_unused]] const RunContext& ctx) {
    const auto cfg = model::make_cluster(cluster_params(p));
    return make_result(s, p, time_series_table(run_ratchet(cfg, ratchet_settings(p, light))));
  };
  return s;
}

// beta_up x beta_down map at a fixed time budget.
Scenario beta_map(const std::string& name, const std::string& figure, LP light, bool t1, const std::string& what) {
  Params d{{"J_nv_p1_MHz", 0.5}, {"J_h_p1_MHz", 0.1}, {"beta_min_mT_per_ms", 1.0}, {"beta_max_mT_per_ms", 30.0},
           {"points", 20},       {"budget_ms", 10.0}, {"range_mT", 0.5},           {"dephase", 1},
           {"t1", t1 ? 1.0 : 0.0}, {"workers", 1}};
  Scenario s{name, figure, "Proton polarization over sweep-rate pairs at a fixed DNP time, " + what, d, {}};
  s.run = [s, light](const Params& p, [[maybe_unused]] const RunContext& ctx) {
    const auto base = cluster_params(p);
    const int n = get_int(p, "points");
    const Axis a1{"beta_up_mT_per_ms", get(p, "beta_min_mT_per_ms"), get(p, "beta_max_mT_per_ms"), n, "log"};
    Axis a2 = a1;
    a2.name = "beta_down_mT_per_ms";
    const double range = get(p, "range_mT");
    const double budget = get(p, "budget_ms");
    auto fn = [&](double bu, double bd) {
      const auto cfg = model::make_cluster(base);
      RatchetSettings rs;
      rs.beta_up = bu;
      rs.beta_down = bd;
      rs.range_mT = range;
      rs.n_cycles = cycles_in_budget(budget, range, bu, bd);
      rs.light = light;
      rs.dephase = get_flag(p, "dephase");
      rs.t1 = get_flag(p, "t1");
      const double pol = run_ratchet(cfg, rs).final_pol_H();
      return std::vector<double>{pol, range / bu + range / bd, static_cast<double>(rs.n_cycles)};
    };
    GridOptions go;
    go.workers = get_int(p, "workers");
    go.checkpoint = ctx.checkpoint;
    return make_result(s, p, grid_run(a1, a2, {"pol_H", "T_c_ms", "n_cycles"}, fn, go));
  };
  return s;
}

Table tm_curves(const std::vector<std::pair<std::string, std::function<tm::CycleMatrix(double)>>>& variants,
                double p1_min, double p1_max, int points, int cycles) {
  Table t{{"variant", "p1_up", "cycle_index", "pol_H"}, {}};
  const Axis ax{"p1_up", p1_min, p1_max, points, "linear"};
  for (const auto& [name, make] : variants) {
    for (double p1 : ax.values()) {
      for (const auto& r : tm::iterate(make(p1).T, tm::default_initial(), cycles)) {
        t.add({name, p1, static_cast<long>(r.cycle), r.pol_H});
      }
    }
  }
  return t;
}

std::vector<Scenario> build_registry() {
  std::vector<Scenario> reg;

  {
    Scenario s{"fig1e", "Fig. 1e", "Single low-to-high and high-to-low sweeps from a pumped NV",
               {{"J_nv_p1_MHz", 0.5}, {"J_h_p1_MHz", 0.2}, {"beta_mT_per_ms", 0.26}, {"range_mT", 0.5},
                {"record_every_mT", 0.005}},
               {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      const auto cfg = model::make_cluster(cluster_params(p));
      const double c = model::crossing_center(cfg);
      Table t{with_series_columns({"direction"}), {}};
      for (bool up : {true, false}) {
        append_series(t,
                      single_sweep(cfg, c, get(p, "range_mT"), get(p, "beta_mT_per_ms"), up, get(p, "record_every_mT")),
                      {std::string(up ? "up" : "down")});
      }
      return make_result(s, p, std::move(t));
    };
    reg.push_back(s);
  }

  {
    Scenario s{"fig1f-hosts", "Fig. 1f / Fig. S1b",
               "Single up sweeps with both host nitrogens, one sweep per P1 nitrogen manifold",
               {{"J_nv_p1_MHz", 0.5}, {"J_h_p1_MHz", 0.2}, {"include_hosts", 1}, {"beta_plus_mT_per_ms", 0.365},
                {"beta_zero_mT_per_ms", 0.259}, {"beta_minus_mT_per_ms", 0.177}, {"range_mT", 0.5}},
               {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      const auto params = cluster_params(p);
      const auto cfg = model::make_cluster(params);
      const double c = model::crossing_center(cfg);
      const double a = params.host_p1.A(2, 2);
      const double ge = params.constants.gamma_e;
      Table t{{"manifold_mI", "beta_mT_per_ms", "center_mT", "pol_H"}, {}};
      const std::vector<std::pair<int, std::string>> manifolds{
          {1, "beta_plus_mT_per_ms"}, {0, "beta_zero_mT_per_ms"}, {-1, "beta_minus_mT_per_ms"}};
      for (const auto& [mI, key] : manifolds) {
        // P1 resonance moves by -A*mI/(2 gamma_e) for each host nuclear projection.
        const double center = params.include_hosts ? c - a * mI / (2.0 * ge) : c;
        const double beta = get(p, key);
        const auto ts = single_sweep(cfg, center, get(p, "range_mT"), beta, true, 0.0);
        t.add({static_cast<long>(mI), beta, center, ts.final_pol_H()});
      }
      return make_result(s, p, std::move(t));
    };
    reg.push_back(s);
  }

  reg.push_back(fig2("fig2a", "Fig. 2a", LP::LowEnd, "at the low-field end"));
  reg.push_back(fig2("fig2b", "Fig. 2b", LP::HighEnd, "at the high-field end"));
  reg.push_back(fig2("fig2c", "Fig. 2c", LP::BothEnds, "at both ends"));

  {
    Params d = ratchet_defaults();
    d["n_cycles"] = 100;
    Scenario s{"fig2e", "Fig. 2e", "Buildup of proton polarization per cycle, light at the low-field end", d, {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      const auto cfg = model::make_cluster(cluster_params(p));
      const auto pol = run_ratchet(cfg, ratchet_settings(p, LP::LowEnd)).cycle_end_pol_H();
      Table t{{"cycle_index", "pol_H", "increment"}, {}};
      double prev = 0.0;
      for (std::size_t c = 0; c < pol.size(); ++c) {
        t.add({static_cast<long>(c + 1), pol[c], pol[c] - prev});
        prev = pol[c];
      }
      return make_result(s, p, std::move(t));
    };
    reg.push_back(s);
  }

  reg.push_back(beta_map("fig3b", "Fig. 3b", LP::LowEnd, false, "no P1 relaxation"));
  reg.push_back(beta_map("fig3c", "Fig. 3c", LP::LowEnd, true, "P1 relaxation after each sweep, light at low field"));
  reg.push_back(beta_map("fig3d", "Fig. 3d", LP::HighEnd, true, "P1 relaxation after each sweep, light at high field"));
  reg.push_back(beta_map("fig3e", "Fig. 3e", LP::BothEnds, true, "P1 relaxation after each sweep, light at both ends"));

  {
    Scenario s{"fig3f", "Fig. 3f", "Strong-dephasing buildup from the transfer-matrix model, with and without P1 relaxation",
               {{"J_nv_p1_MHz", 0.5}, {"J_h_p1_MHz", 0.1}, {"beta_mT_per_ms", 3.0}, {"n_cycles", 100}}, {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      const auto cfg = model::make_cluster(cluster_params(p));
      const auto g = model::gap_estimates(cfg);
      const double beta = get(p, "beta_mT_per_ms");
      const auto lz = tm::lz_from_gaps(g, beta, beta, cfg.constants(), true);
      Table t{{"variant", "p0_up", "p1_up", "cycle_index", "pol_H"}, {}};
      for (bool t1 : {false, true}) {
        const auto T = tm::compose_cycle(lz, t1);
        for (const auto& r : tm::iterate(T.T, tm::default_initial(), get_int(p, "n_cycles"))) {
          t.add({std::string(t1 ? "sd_t1" : "sd_no_t1"), 0.5, lz.p1_up, static_cast<long>(r.cycle), r.pol_H});
        }
      }
      return make_result(s, p, std::move(t));
    };
    reg.push_back(s);
  }

  {
    Scenario s{"fig4a", "Fig. 4a", "Proton polarization over NV-P1 and P1-H coupling strengths",
               {{"J_nv_p1_min_MHz", 0.1}, {"J_nv_p1_max_MHz", 1.0}, {"J_h_p1_min_MHz", 0.05}, {"J_h_p1_max_MHz", 0.5},
                {"points", 10}, {"n_cycles", 56}, {"beta_up_mT_per_ms", 3.0}, {"beta_down_mT_per_ms", 3.0},
                {"range_mT", 0.5}, {"dephase", 1}, {"t1", 0}, {"workers", 1}},
               {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      const int n = get_int(p, "points");
      const Axis a1{"J_nv_p1_MHz", get(p, "J_nv_p1_min_MHz"), get(p, "J_nv_p1_max_MHz"), n, "linear"};
      const Axis a2{"J_h_p1_MHz", get(p, "J_h_p1_min_MHz"), get(p, "J_h_p1_max_MHz"), n, "linear"};
      auto fn = [&](double j1, double j2) {
        model::ClusterParams c;
        c.J_nv_p1 = j1;
        c.J_h_p1 = j2;
        const auto cfg = model::make_cluster(c);
        return std::vector<double>{run_ratchet(cfg, ratchet_settings(p, LP::LowEnd)).final_pol_H()};
      };
      GridOptions go;
      go.workers = get_int(p, "workers");
    go.checkpoint = ctx.checkpoint;
      return make_result(s, p, grid_run(a1, a2, {"pol_H"}, fn, go));
    };
    reg.push_back(s);
  }

  {
    Scenario s{"fig4c", "Fig. 4c", "Matching field versus polar angle of the field",
               {{"theta_min_deg", 0.0}, {"theta_max_deg", 60.0}, {"points", 25}}, {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      Table t{{"theta_deg", "B_m_mT", "status"}, {}};
      const Axis ax{"theta_deg", get(p, "theta_min_deg"), get(p, "theta_max_deg"), get_int(p, "points"), "linear"};
      for (double th : ax.values()) {
        model::ClusterParams c;
        c.field_theta = th * kDeg;
        try {
          t.add({th, model::matching_field(model::make_cluster(c)), std::string("ok")});
        } catch (const NoRootError& e) {
          t.add({th, std::numeric_limits<double>::quiet_NaN(), std::string("no root")});
        }
      }
      return make_result(s, p, std::move(t));
    };
    reg.push_back(s);
  }

  {
    Scenario s{"fig4d", "Fig. 4d", "Proton polarization over field orientation (polar map)",
               {{"J_nv_p1_MHz", 0.5}, {"J_h_p1_MHz", 0.1}, {"theta_max_deg", 40.0}, {"theta_points", 9},
                {"phi_max_deg", 90.0}, {"phi_points", 4}, {"beta_up_mT_per_ms", 3.25},
                {"beta_down_mT_per_ms", 20.0}, {"n_cycles", 56}, {"range_mT", 0.5}, {"eta_nv", 1.0},
                {"dephase", 1}, {"workers", 1}},
               {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      const Axis a1{"field_theta_deg", 0.0, get(p, "theta_max_deg"), get_int(p, "theta_points"), "linear"};
      const Axis a2{"field_phi_deg", 0.0, get(p, "phi_max_deg"), get_int(p, "phi_points"), "linear"};
      auto fn = [&](double th, double ph) {
        auto c = cluster_params(p);
        c.field_theta = th * kDeg;
        c.field_phi = ph * kDeg;
        const auto cfg = model::make_cluster(c);
        RatchetSettings rs;
        rs.beta_up = get(p, "beta_up_mT_per_ms");
        rs.beta_down = get(p, "beta_down_mT_per_ms");
        rs.n_cycles = get_int(p, "n_cycles");
        rs.range_mT = get(p, "range_mT");
        rs.eta_nv = get(p, "eta_nv");
        rs.dephase = get_flag(p, "dephase");
        return std::vector<double>{run_ratchet(cfg, rs).final_pol_H(), model::crossing_center(cfg)};
      };
      GridOptions go;
      go.workers = get_int(p, "workers");
    go.checkpoint = ctx.checkpoint;
      return make_result(s, p, grid_run(a1, a2, {"pol_H", "center_mT"}, fn, go));
    };
    reg.push_back(s);
  }

  {
    Scenario s{"figS1", "Fig. S1", "Single low-to-high sweeps versus sweep rate",
               {{"J_nv_p1_MHz", 0.5}, {"J_h_p1_MHz", 0.2}, {"beta_min_mT_per_ms", 0.05}, {"beta_max_mT_per_ms", 5.0},
                {"points", 12}, {"range_mT", 0.5}, {"include_hosts", 0}},
               {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      const auto cfg = model::make_cluster(cluster_params(p));
      const double c = model::crossing_center(cfg);
      Table t{{"beta_mT_per_ms", "pol_H"}, {}};
      const Axis ax{"beta", get(p, "beta_min_mT_per_ms"), get(p, "beta_max_mT_per_ms"), get_int(p, "points"), "log"};
      for (double b : ax.values()) t.add({b, single_sweep(cfg, c, get(p, "range_mT"), b, true, 0.0).final_pol_H()});
      return make_result(s, p, std::move(t));
    };
    reg.push_back(s);
  }

  {
    Params d = ratchet_defaults();
    d["n_cycles"] = 100;
    d["dephase"] = 0;
    Scenario s{"figS2", "Fig. S2", "NV repolarized only every l cycles (l = 1, 2, 5, 10)", d, {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      const auto cfg = model::make_cluster(cluster_params(p));
      Table t{{"l", "cycle_index", "pol_H"}, {}};
      for (int l : {1, 2, 5, 10}) {
        auto rs = ratchet_settings(p, LP::EveryLCycles);
        rs.light_every = l;
        const auto pol = run_ratchet(cfg, rs).cycle_end_pol_H();
        for (std::size_t c = 0; c < pol.size(); ++c) t.add({static_cast<long>(l), static_cast<long>(c + 1), pol[c]});
      }
      return make_result(s, p, std::move(t));
    };
    reg.push_back(s);
  }

  {
    Scenario s{"figS6", "Fig. S6", "Composed strong-dephasing cycles, with and without P1 relaxation",
               {{"p1_min", 0.9}, {"p1_max", 1.0}, {"points", 11}, {"n_cycles", 100}}, {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      auto make = [](bool t1) {
        return [t1](double p1) {
          tm::LZParams lz{0.5, p1, 0.5, p1, true};
          return tm::compose_cycle(lz, t1);
        };
      };
      return make_result(s, p,
                         tm_curves({{"t1", make(true)}, {"no_t1", make(false)}}, get(p, "p1_min"), get(p, "p1_max"),
                                   get_int(p, "points"), get_int(p, "n_cycles")));
    };
    reg.push_back(s);
  }

  {
    Scenario s{"figS7", "Fig. S7", "Closed-form cycles: relaxed versus unrelaxed with a fast down sweep",
               {{"p1_min", 0.9}, {"p1_max", 1.0}, {"points", 11}, {"n_cycles", 100}}, {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      return make_result(s, p,
                         tm_curves({{"relaxed", tm::analytic_relaxed_cycle}, {"unrelaxed", tm::analytic_unrelaxed_cycle}},
                                   get(p, "p1_min"), get(p, "p1_max"), get_int(p, "points"), get_int(p, "n_cycles")));
    };
    reg.push_back(s);
  }

  {
    Scenario s{"figS8", "Fig. S8", "Bystander P1 strongly coupled to the NV: single sweep and multi-cycle buildup",
               {{"J_nv_p1_MHz", 0.3}, {"J_h_p1_MHz", 0.2}, {"J_nv_b1_MHz", 1.0}, {"theta_nv_b1_deg", 45.0},
                {"single_beta_mT_per_ms", 0.25}, {"beta_up_mT_per_ms", 6.0}, {"beta_down_mT_per_ms", 10.0},
                {"n_cycles", 50}, {"range_mT", 0.5}},
               {}};
    s.run = [s](const Params& p, [[maybe_unused]] const RunContext& ctx) {
      auto base = cluster_params(p);
      auto with_b1 = base;
      with_b1.include_bystander = true;
      const auto free_cfg = model::make_cluster(base);
      const auto b1_cfg = model::make_cluster(with_b1);
      Table t{{"part", "variant", "cycle_index", "pol_H"}, {}};

      const double range = get(p, "range_mT");
      const double sb = get(p, "single_beta_mT_per_ms");
      for (const auto* cfg : {&free_cfg, &b1_cfg}) {
        const std::string v = cfg == &free_cfg ? "free" : "bystander";
        const double c = model::crossing_center(*cfg);
        t.add({std::string("single_sweep"), v, 0L, single_sweep(*cfg, c, range, sb, true, 0.0).final_pol_H()});
      }

      struct Variant {
        std::string name;
        const model::ClusterConfig* cfg;
        bool t1;
        std::vector<std::string> sites;
      };
      const std::vector<Variant> variants{{"free_t1", &free_cfg, true, {"P1"}},
                                          {"bystander_t1_p1_b1", &b1_cfg, true, {"P1", "B1"}},
                                          {"bystander_t1_p1", &b1_cfg, true, {"P1"}},
                                          {"bystander_no_t1", &b1_cfg, false, {"P1"}}};
      for (const auto& v : variants) {
        RatchetSettings rs;
        rs.beta_up = get(p, "beta_up_mT_per_ms");
        rs.beta_down = get(p, "beta_down_mT_per_ms");
        rs.n_cycles = get_int(p, "n_cycles");
        rs.range_mT = range;
        rs.t1 = v.t1;
        rs.t1_sites = v.sites;
        const auto pol = run_ratchet(*v.cfg, rs).cycle_end_pol_H();
        for (std::size_t c = 0; c < pol.size(); ++c) {
          t.add({std::string("cycles"), v.name, static_cast<long>(c + 1), pol[c]});
        }
      }
      return make_result(s, p, std::move(t));
    };
    reg.push_back(s);
  }

  return reg;
}

}  // namespace

const std::vector<Scenario>& registry() {
  static const std::vector<Scenario> reg = build_registry();
  return reg;
}

const Scenario& find_scenario(const std::string& name) {
  for (const auto& s : registry()) {
    if (s.name == name) return s;
  }
  std::string names;
  for (const auto& s : registry()) names += (names.empty() ? "" : ", ") + s.name;
  throw ConfigError("unknown scenario '" + name + "' (registered: " + names + ")");
}

Params resolve_params(const Scenario& s, const std::map<std::string, std::string>& overrides) {
  Params p = s.defaults;
  for (const auto& [k, v] : overrides) {
    auto it = p.find(k);
    if (it == p.end()) {
      std::string keys;
      for (const auto& [dk, dv] : s.defaults) keys += (keys.empty() ? "" : ", ") + dk;
      throw ConfigError("scenario " + s.name + ": unknown parameter '" + k + "' (accepted: " + keys + ")");
    }
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v.size() || !std::isfinite(x)) {
      throw ConfigError("scenario " + s.name + ": parameter '" + k + "' expects a number, got '" + v + "'");
    }
    it->second = x;
  }
  return p;
}

ScenarioResult run_scenario(const std::string& name, const std::map<std::string, std::string>& overrides,
                            const RunContext& ctx) {
  const auto& s = find_scenario(name);
  return s.run(resolve_params(s, overrides), ctx);
}

}  // namespace ratchet::experiments
