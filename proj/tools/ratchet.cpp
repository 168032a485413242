#include "ratchet/config.hpp"
#include "ratchet/errors.hpp"
#include "ratchet/experiments.hpp"
#include "ratchet/transfer_matrix.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace ex = ratchet::experiments;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> split_sets(const std::vector<std::string>& sets) {
  std::map<std::string, std::string> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ratchet::ConfigError("--set '" + s + "': expected key=value");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

fs::path pick_dir(const std::string& requested, const std::string& scenario) {
  if (requested.empty()) return ex::new_run_dir(scenario);
  fs::create_directories(requested);
  return requested;
}

void write_table(const fs::path& file, const ex::Table& t) {
  std::ofstream out(file);
  out << t.to_csv();
  if (!out) throw std::runtime_error("cannot write " + file.string());
}

int cmd_simulate(const std::string& path, const std::vector<std::string>& sets, const std::string& out_dir) {
  auto cfg = ratchet::config::load_file(path);
  for (const auto& s : sets) ratchet::config::apply_override(cfg, s);
  const auto cluster = ratchet::model::make_cluster(cfg.cluster.params());
  const auto proto = ratchet::config::resolve_protocol(cfg.protocol, cluster);
  const auto ts = ratchet::dynamics::run_protocol(cluster, proto);

  ex::ScenarioResult r{"simulate", "", nlohmann::json::object(), ex::time_series_table(ts)};
  const auto resolved = ratchet::config::to_json(cfg);
  r.meta["config"] = resolved;
  r.meta["config_hash"] = ratchet::config::content_hash(resolved.dump());
  r.meta["source"] = path;
  r.meta["final_pol_H"] = ts.final_pol_H();
  const auto dir = pick_dir(out_dir.empty() ? cfg.output : out_dir, "simulate");
  ex::write_result(dir, r);
  if (cfg.verbosity > 0) std::cerr << "records: " << ts.records.size() << "\n";
  std::cout << "final pol_H " << ts.final_pol_H() << "\n" << dir.string() << "\n";
  return 0;
}

int cmd_diagram(const std::string& path, const std::vector<std::string>& sets, double from, double to, int points,
                const std::string& out_dir) {
  auto cfg = ratchet::config::load_file(path);
  for (const auto& s : sets) ratchet::config::apply_override(cfg, s);
  const auto cluster = ratchet::model::make_cluster(cfg.cluster.params());
  if (std::isnan(from) || std::isnan(to)) {
    const double c = ratchet::model::crossing_center(cluster);
    if (std::isnan(from)) from = c - 0.5;
    if (std::isnan(to)) to = c + 0.5;
  }
  if (!(to > from) || points < 2) throw ratchet::ConfigError("diagram: need --to > --from and --points >= 2");
  const auto grid = ex::Axis{"B_mT", from, to, points, "linear"}.values();
  const auto d = ratchet::model::eigen_branches(cluster, grid);

  ex::ScenarioResult r{"diagram", "", nlohmann::json::object(), ex::branch_table(d)};
  r.meta["config"] = ratchet::config::to_json(cfg);
  r.meta["source"] = path;
  r.meta["crossings"] = d.crossings.size();
  const auto dir = pick_dir(out_dir, "diagram");
  ex::write_result(dir, r);
  write_table(dir / "crossings.csv", ex::crossing_table(d));
  for (const auto& c : d.crossings) {
    std::cout << c.B << " mT  gap " << c.gap << " MHz  " << c.lower_label << " / " << c.upper_label << "\n";
  }
  std::cout << dir.string() << "\n";
  return 0;
}

struct TmArgs {
  double p1_up = 0.95;
  double p0_up = 0.5;
  double p0_down = 0.5;
  double p1_down = 1.0;
  bool sd = false;
  bool t1 = false;
  int cycles = 100;
  std::string analytic;  // relaxed | unrelaxed
  std::string out;
};

int cmd_tm(const TmArgs& a) {
  namespace tm = ratchet::tm;
  tm::CycleMatrix T;
  if (a.analytic == "relaxed") {
    T = tm::analytic_relaxed_cycle(a.p1_up);
  } else if (a.analytic == "unrelaxed") {
    T = tm::analytic_unrelaxed_cycle(a.p1_up);
  } else if (a.analytic.empty()) {
    tm::LZParams lz{a.p0_up, a.p1_up, a.p0_down, a.p1_down, a.sd};
    lz.validate();
    T = tm::compose_cycle(lz, a.t1);
  } else {
    throw ratchet::ConfigError("--analytic: expected relaxed or unrelaxed");
  }
  const auto rows = tm::iterate(T.T, tm::default_initial(), a.cycles);
  ex::ScenarioResult r{"tm", "", nlohmann::json::object(), ex::tm_table(rows)};
  r.meta["provenance"] = T.provenance;
  r.meta["params"] = {{"p1_up", a.p1_up}, {"p0_up", a.p0_up},   {"p0_down", a.p0_down}, {"p1_down", a.p1_down},
                      {"sd", a.sd},       {"t1", a.t1},         {"cycles", a.cycles},   {"analytic", a.analytic}};
  r.meta["stochastic_defect"] = tm::stochastic_defect(T.T);
  const auto dir = pick_dir(a.out, "tm");
  ex::write_result(dir, r);
  std::cout << "pol_H after " << a.cycles << " cycles: " << rows.back().pol_H << "\n" << dir.string() << "\n";
  return 0;
}

int cmd_scan(const std::string& name, const std::vector<std::string>& sets, int points, int workers,
             const std::string& resume, const std::string& out_dir) {
  const auto& s = ex::find_scenario(name);
  auto overrides = split_sets(sets);
  if (points > 0) overrides["points"] = std::to_string(points);
  if (workers > 0) overrides["workers"] = std::to_string(workers);
  ex::resolve_params(s, overrides);  // fail on bad keys before creating a directory

  fs::path dir;
  if (!resume.empty()) {
    dir = resume;
    if (!fs::is_directory(dir)) throw ratchet::ConfigError("--resume: no such run directory " + resume);
  } else {
    dir = pick_dir(out_dir, name);
  }
  const auto r = ex::run_scenario(name, overrides, ex::RunContext{dir / "checkpoint.tsv"});
  ex::write_result(dir, r);
  std::cout << r.data.rows.size() << " rows\n" << dir.string() << "\n";
  return 0;
}

int cmd_list() {
  for (const auto& s : ex::registry()) {
    std::cout << s.name << "\t" << s.figure << "\t" << s.description << "\n";
    for (const auto& [k, v] : s.defaults) std::cout << "    " << k << " = " << v << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Field-sweep spin-ratchet simulator"};
  app.require_subcommand(1);

  std::string cfg_path;
  std::vector<std::string> sets;
  std::string out_dir;

  auto* sim = app.add_subcommand("simulate", "Run the protocol in a config file");
  sim->add_option("config", cfg_path, "YAML config (or a meta.json from an earlier run)")->required();
  sim->add_option("--set", sets, "Override, e.g. protocol.n_cycles=40");
  sim->add_option("--out", out_dir, "Output directory");

  double from = std::nan("");
  double to = std::nan("");
  int dia_points = 401;
  auto* dia = app.add_subcommand("diagram", "Energy branches and avoided crossings over a field window");
  dia->add_option("config", cfg_path)->required();
  dia->add_option("--set", sets);
  dia->add_option("--from", from, "mT");
  dia->add_option("--to", to, "mT");
  dia->add_option("--points", dia_points, "Field grid points")->capture_default_str();
  dia->add_option("--out", out_dir);

  TmArgs tm_args;
  auto* tm = app.add_subcommand("tm", "Iterate the strong-dephasing transfer matrix");
  tm->add_option("--p1", tm_args.p1_up, "Narrow-gap adiabatic probability on the up sweep");
  tm->add_option("--p0-up", tm_args.p0_up);
  tm->add_option("--p0-down", tm_args.p0_down);
  tm->add_option("--p1-down", tm_args.p1_down);
  tm->add_flag("--sd", tm_args.sd, "Force the wide-gap probabilities to 1/2");
  tm->add_flag("--t1", tm_args.t1, "Relax the P1 after each sweep");
  tm->add_option("--cycles", tm_args.cycles);
  tm->add_option("--analytic", tm_args.analytic, "relaxed | unrelaxed");
  tm->add_option("--out", tm_args.out);

  std::string scenario;
  int points = 0;
  int workers = 0;
  std::string resume;
  auto* scan = app.add_subcommand("scan", "Run a registered scenario");
  scan->add_option("scenario", scenario)->required();
  scan->add_option("--set", sets, "Scenario parameter, key=value");
  scan->add_option("--points", points, "Grid points per axis");
  scan->add_option("--workers", workers);
  scan->add_option("--resume", resume, "Run directory of an interrupted scan");
  scan->add_option("--out", out_dir);

  auto* sc = app.add_subcommand("scenario", "Scenario registry");
  auto* list = sc->add_subcommand("list", "List registered scenarios and their parameters");
  sc->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return cmd_simulate(cfg_path, sets, out_dir);
    if (*dia) return cmd_diagram(cfg_path, sets, from, to, dia_points, out_dir);
    if (*tm) return cmd_tm(tm_args);
    if (*scan) return cmd_scan(scenario, sets, points, workers, resume, out_dir);
    if (*list) return cmd_list();
  } catch (const ratchet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ratchet::PhysicsError& e) {
    std::cerr << "physics error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
