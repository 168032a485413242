#pragma once

#include "ratchet/config.hpp"
#include "ratchet/dynamics.hpp"
#include "ratchet/transfer_matrix.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace ratchet::experiments {

using Cell = std::variant<double, long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
  std::string to_csv() const;
};

Table time_series_table(const dynamics::TimeSeries& ts);
Table tm_table(const std::vector<tm::IterateRow>& rows);
Table branch_table(const model::BranchDiagram& d);
Table crossing_table(const model::BranchDiagram& d);

struct ScenarioResult {
  std::string name;
  std::string figure;
  nlohmann::json meta;
  Table data;
};

// Scenario knobs are plain numbers; booleans are 0/1.
using Params = std::map<std::string, double>;

struct RunContext {
  std::filesystem::path checkpoint;  // grid scenarios append finished points here
};

struct Scenario {
  std::string name;
  std::string figure;
  std::string description;
  Params defaults;
  std::function<ScenarioResult(const Params&, const RunContext&)> run;
};

const std::vector<Scenario>& registry();
const Scenario& find_scenario(const std::string& name);

// Unknown keys raise ConfigError listing the accepted ones.
Params resolve_params(const Scenario& s, const std::map<std::string, std::string>& overrides);

ScenarioResult run_scenario(const std::string& name, const std::map<std::string, std::string>& overrides = {},
                            const RunContext& ctx = {});

// ---------------------------------------------------------------------------
// Parallel 2-D grid

struct Axis {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  int points = 2;
  std::string scale = "linear";  // linear | log

  std::vector<double> values() const;
};

struct GridOptions {
  int workers = 1;
  std::filesystem::path checkpoint;  // empty: no checkpointing
};

using PointFn = std::function<std::vector<double>(double x, double y)>;

// Rows sorted by (axis1 index, axis2 index): axis1, axis2, value columns, status.
// A point that throws is reported in the status column and the run carries on.
Table grid_run(const Axis& a1, const Axis& a2, const std::vector<std::string>& value_columns, const PointFn& fn,
               const GridOptions& opt = {});

// ---------------------------------------------------------------------------
// Shared building blocks

struct RatchetSettings {
  double beta_up = 3.0;
  double beta_down = 3.0;
  int n_cycles = 20;
  dynamics::LightPlacement light = dynamics::LightPlacement::LowEnd;
  int light_every = 1;
  bool dephase = true;
  bool t1 = false;
  std::vector<std::string> t1_sites{"P1"};
  double range_mT = 0.5;
  double eta_nv = 1.0;
};

dynamics::TimeSeries run_ratchet(const model::ClusterConfig& cfg, const RatchetSettings& s,
                                 const dynamics::RunOptions& opt = {});

// Whole cycles that fit a fixed time budget.
int cycles_in_budget(double budget_ms, double range_mT, double beta_up, double beta_down);

// ---------------------------------------------------------------------------
// Output

std::filesystem::path output_root();  // $RATCHET_OUT_ROOT or ./out
std::filesystem::path new_run_dir(const std::string& scenario);
void write_result(const std::filesystem::path& dir, const ScenarioResult& r);

}  // namespace ratchet::experiments
