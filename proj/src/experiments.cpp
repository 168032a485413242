#include "ratchet/experiments.hpp"

#include "ratchet/errors.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace ratchet::experiments {

namespace {

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (std::isnan(*d)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", *d);
    return buf;
  }
  if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("row width does not match the header");
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("no column " + name);
}

double Table::number(std::size_t row, const std::string& name) const {
  const auto& c = rows.at(row).at(column(name));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* l = std::get_if<long>(&c)) return static_cast<double>(*l);
  throw std::invalid_argument("column " + name + " is not numeric");
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_cell(r[i]);
    out += "\n";
  }
  return out;
}

Table time_series_table(const dynamics::TimeSeries& ts) {
  Table t{{"t_ms", "B_mT", "pol_H", "pol_NV", "pol_P1", "cycle_index", "event_tag"}, {}};
  for (const auto& r : ts.records) {
    t.add({r.t_ms, r.B_mT, r.pol_H, r.pol_NV, r.pol_P1, static_cast<long>(r.cycle), r.tag});
  }
  return t;
}

Table tm_table(const std::vector<tm::IterateRow>& rows) {
  Table t{{"cycle_index", "pol_H", "v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8"}, {}};
  for (const auto& r : rows) {
    std::vector<Cell> row{static_cast<long>(r.cycle), r.pol_H};
    for (int i = 0; i < 8; ++i) row.emplace_back(r.v(i));
    t.add(std::move(row));
  }
  return t;
}

Table branch_table(const model::BranchDiagram& d) {
  Table t{{"B_mT", "branch_index", "energy_MHz", "label"}, {}};
  for (std::size_t i = 0; i < d.B.size(); ++i) {
    for (std::size_t k = 0; k < d.labels.size(); ++k) {
      t.add({d.B[i], static_cast<long>(k), d.energy[i][k], d.labels[k]});
    }
  }
  return t;
}

Table crossing_table(const model::BranchDiagram& d) {
  Table t{{"B_mT", "gap_MHz", "lower_rank", "lower_label", "upper_label"}, {}};
  for (const auto& c : d.crossings) {
    t.add({c.B, c.gap, static_cast<long>(c.lower_rank), c.lower_label, c.upper_label});
  }
  return t;
}

// ---------------------------------------------------------------------------

std::vector<double> Axis::values() const {
  if (points < 2) throw ConfigError("axis " + name + ": needs at least two points");
  if (!std::isfinite(min) || !std::isfinite(max)) throw ConfigError("axis " + name + ": bounds must be finite");
  if (scale != "linear" && scale != "log") throw ConfigError("axis " + name + ": scale must be linear or log");
  if (scale == "log" && !(min > 0.0 && max > 0.0)) throw ConfigError("axis " + name + ": log scale needs positive bounds");
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    v[static_cast<std::size_t>(i)] =
        scale == "log" ? std::exp(std::log(min) + f * (std::log(max) - std::log(min))) : min + f * (max - min);
  }
  return v;
}

namespace {

struct PointResult {
  std::vector<double> values;
  std::string status = "ok";
};

std::map<std::pair<int, int>, PointResult> read_checkpoint(const std::filesystem::path& path, std::size_t nvalues) {
  std::map<std::pair<int, int>, PointResult> done;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    if (cells.size() != nvalues + 3) continue;  // torn write from an interrupted run
    PointResult r;
    try {
      for (std::size_t k = 0; k < nvalues; ++k) r.values.push_back(std::stod(cells[2 + k]));
      r.status = cells.back();
      done[{std::stoi(cells[0]), std::stoi(cells[1])}] = r;
    } catch (const std::exception&) {
    }
  }
  return done;
}

}  // namespace

Table grid_run(const Axis& a1, const Axis& a2, const std::vector<std::string>& value_columns, const PointFn& fn,
               const GridOptions& opt) {
  const auto xs = a1.values();
  const auto ys = a2.values();
  const int nx = static_cast<int>(xs.size());
  const int ny = static_cast<int>(ys.size());
  const std::size_t nv = value_columns.size();

  std::map<std::pair<int, int>, PointResult> results;
  if (!opt.checkpoint.empty() && std::filesystem::exists(opt.checkpoint)) {
    results = read_checkpoint(opt.checkpoint, nv);
  }
  std::vector<std::pair<int, int>> todo;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (!results.count({i, j})) todo.emplace_back(i, j);
    }
  }

  std::mutex mu;
  std::ofstream ckpt;
  if (!opt.checkpoint.empty()) {
    if (opt.checkpoint.has_parent_path()) std::filesystem::create_directories(opt.checkpoint.parent_path());
    ckpt.open(opt.checkpoint, std::ios::app);
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      const auto [i, j] = todo[k];
      PointResult r;
      try {
        r.values = fn(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]);
        if (r.values.size() != nv) throw std::logic_error("point function returned the wrong number of values");
      } catch (const std::exception& e) {
        r.values.assign(nv, std::numeric_limits<double>::quiet_NaN());
        r.status = std::string("error: ") + e.what();
      }
      std::lock_guard lock(mu);
      if (ckpt.is_open()) {
        ckpt << i << '\t' << j;
        ckpt << std::setprecision(17);
        for (double v : r.values) ckpt << '\t' << v;
        std::string status = r.status;
        for (auto& ch : status) {
          if (ch == '\t' || ch == '\n') ch = ' ';
        }
        ckpt << '\t' << status << '\n';
        ckpt.flush();
      }
      results[{i, j}] = std::move(r);
    }
  };
  const int nworkers = std::max(1, std::min<int>(opt.workers, static_cast<int>(todo.size())));
  if (nworkers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  Table t;
  t.columns = {a1.name, a2.name};
  t.columns.insert(t.columns.end(), value_columns.begin(), value_columns.end());
  t.columns.push_back("status");
  for (const auto& [ij, r] : results) {
    if (ij.first >= nx || ij.second >= ny) continue;
    std::vector<Cell> row{xs[static_cast<std::size_t>(ij.first)], ys[static_cast<std::size_t>(ij.second)]};
    for (double v : r.values) row.emplace_back(v);
    row.emplace_back(r.status);
    t.add(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------

dynamics::TimeSeries run_ratchet(const model::ClusterConfig& cfg, const RatchetSettings& s,
                                 const dynamics::RunOptions& opt) {
  const double c = model::crossing_center(cfg);
  auto proto = dynamics::ratchet_protocol(c - 0.5 * s.range_mT, c + 0.5 * s.range_mT, s.beta_up, s.beta_down,
                                          s.n_cycles, s.light, s.dephase, s.t1);
  proto.light_every = s.light_every;
  proto.t1_sites = s.t1_sites;
  proto.eta_nv = s.eta_nv;
  return dynamics::run_protocol(cfg, proto, opt);
}

int cycles_in_budget(double budget_ms, double range_mT, double beta_up, double beta_down) {
  const double Tc = range_mT / beta_up + range_mT / beta_down;
  return std::max(1, static_cast<int>(std::floor(budget_ms / Tc + 1e-9)));
}

// ---------------------------------------------------------------------------

std::filesystem::path output_root() {
  if (const char* env = std::getenv("RATCHET_OUT_ROOT"); env && *env) return env;
  return "out";
}

std::filesystem::path new_run_dir(const std::string& scenario) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  const auto base = output_root() / scenario;
  auto dir = base / buf;
  for (int k = 1; std::filesystem::exists(dir); ++k) dir = base / (std::string(buf) + "-" + std::to_string(k));
  std::filesystem::create_directories(dir);
  return dir;
}

void write_result(const std::filesystem::path& dir, const ScenarioResult& r) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "data.csv");
    out << r.data.to_csv();
    if (!out) throw std::runtime_error("cannot write " + (dir / "data.csv").string());
  }
  nlohmann::json meta = r.meta;
  meta["scenario"] = r.name;
  meta["figure"] = r.figure;
  meta["columns"] = r.data.columns;
  meta["rows"] = r.data.rows.size();
  std::ofstream out(dir / "meta.json");
  out << meta.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + (dir / "meta.json").string());
}

}  // namespace ratchet::experiments
