#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ratchet/errors.hpp"
#include "ratchet/experiments.hpp"

#include <atomic>
#include <fstream>
#include <set>

using namespace ratchet;
namespace ex = ratchet::experiments;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ratchet_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("csv output") {
  ex::Table t{{"a", "b", "c"}, {}};
  t.add({1.5, 2L, std::string("x,y")});
  t.add({std::nan(""), -3L, std::string("plain")});
  CHECK(t.to_csv() == "a,b,c\n1.5,2,\"x,y\"\nnan,-3,plain\n");
  CHECK(t.number(0, "b") == 2.0);
  CHECK_THROWS(t.add({1.0}));
  CHECK_THROWS(t.number(0, "c"));
}

TEST_CASE("axes") {
  const auto lin = ex::Axis{"x", 0.0, 1.0, 5, "linear"}.values();
  CHECK(lin == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const auto lg = ex::Axis{"x", 1.0, 100.0, 3, "log"}.values();
  CHECK(lg[1] == doctest::Approx(10.0));
  CHECK_THROWS_AS((ex::Axis{"x", -1.0, 1.0, 3, "log"}.values()), ConfigError);
  CHECK_THROWS_AS((ex::Axis{"x", 0.0, 1.0, 1, "linear"}.values()), ConfigError);
}

TEST_CASE("grid runs in parallel, records failures, and resumes") {
  const ex::Axis a{"x", 0.0, 3.0, 4, "linear"};
  const ex::Axis b{"y", 0.0, 2.0, 3, "linear"};
  std::atomic<int> calls{0};
  auto fn = [&](double x, double y) -> std::vector<double> {
    ++calls;
    if (x == 3.0 && y == 2.0) throw PhysicsError("boom");
    return {x * 10 + y};
  };
  ex::GridOptions opt;
  opt.workers = 3;
  opt.checkpoint = scratch("grid") / "ckpt.tsv";
  const auto t = ex::grid_run(a, b, {"v"}, fn, opt);
  CHECK(calls == 12);
  REQUIRE(t.rows.size() == 12);
  for (std::size_t i = 0; i + 1 < t.rows.size(); ++i) {
    const bool ordered = t.number(i, "x") < t.number(i + 1, "x") ||
                         (t.number(i, "x") == t.number(i + 1, "x") && t.number(i, "y") < t.number(i + 1, "y"));
    CHECK(ordered);
  }
  CHECK(t.number(5, "v") == doctest::Approx(12.0));
  CHECK(std::isnan(t.number(11, "v")));
  CHECK(std::get<std::string>(t.rows[11].back()) == "error: boom");

  // Everything is in the checkpoint, so a rerun does no work and gives the same table.
  calls = 0;
  const auto again = ex::grid_run(a, b, {"v"}, fn, opt);
  CHECK(calls == 0);
  CHECK(again.to_csv() == t.to_csv());

  // A partially written checkpoint only redoes the missing points.
  {
    std::ifstream in(opt.checkpoint);
    std::string line, keep;
    for (int k = 0; k < 5 && std::getline(in, line); ++k) keep += line + "\n";
    in.close();
    std::ofstream out(opt.checkpoint, std::ios::trunc);
    out << keep << "3\t1\t3";  // torn final line
  }
  calls = 0;
  const auto resumed = ex::grid_run(a, b, {"v"}, fn, opt);
  CHECK(calls == 7);
  CHECK(resumed.to_csv() == t.to_csv());
}

TEST_CASE("grid results do not depend on the worker count") {
  const ex::Axis a{"x", 0.1, 0.9, 5, "linear"};
  const ex::Axis b{"y", 1.0, 4.0, 4, "log"};
  auto fn = [](double x, double y) { return std::vector<double>{std::sin(x * y), x - y}; };
  ex::GridOptions one, many;
  many.workers = 4;
  CHECK(ex::grid_run(a, b, {"s", "d"}, fn, one).to_csv() == ex::grid_run(a, b, {"s", "d"}, fn, many).to_csv());
}

TEST_CASE("time budget") {
  CHECK(ex::cycles_in_budget(10.0, 0.5, 3.0, 30.0) == 54);
  CHECK(ex::cycles_in_budget(10.0, 0.5, 1.0, 1.0) == 10);
  CHECK(ex::cycles_in_budget(0.1, 0.5, 1.0, 1.0) == 1);
}

TEST_CASE("scenario registry") {
  std::set<std::string> names;
  for (const auto& s : ex::registry()) {
    CHECK(names.insert(s.name).second);
    CHECK_FALSE(s.figure.empty());
    CHECK(static_cast<bool>(s.run));
  }
  for (const char* n : {"fig1e", "fig2a", "fig2b", "fig2c", "fig2e", "fig3b", "fig3c", "fig3f", "fig4a", "fig4c",
                        "fig4d", "figS1", "figS2", "figS6", "figS7", "figS8", "fig1f-hosts"}) {
    CHECK(names.count(n) == 1);
  }
  try {
    ex::find_scenario("fig9z");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("fig2a") != std::string::npos);
  }
  CHECK_THROWS_AS(ex::resolve_params(ex::find_scenario("fig2a"), {{"bogus", "1"}}), ConfigError);
  CHECK_THROWS_AS(ex::resolve_params(ex::find_scenario("fig2a"), {{"n_cycles", "many"}}), ConfigError);
  CHECK(ex::resolve_params(ex::find_scenario("fig2a"), {{"n_cycles", "7"}}).at("n_cycles") == 7.0);
}

TEST_CASE("scenario output is deterministic and self-describing") {
  const auto a = ex::run_scenario("fig4c", {{"points", "5"}});
  const auto b = ex::run_scenario("fig4c", {{"points", "5"}});
  CHECK(a.data.to_csv() == b.data.to_csv());
  CHECK(a.meta == b.meta);
  CHECK(a.data.rows.size() == 5);
  CHECK(a.meta["params"]["points"] == 5.0);

  const auto dir = scratch("out");
  ex::write_result(dir, a);
  CHECK(fs::exists(dir / "data.csv"));
  std::ifstream in(dir / "meta.json");
  const auto meta = nlohmann::json::parse(in);
  CHECK(meta["scenario"] == "fig4c");
  CHECK(meta["figure"] == "Fig. 4c");
  CHECK(meta["rows"] == 5);
}

TEST_CASE("small dynamics scenarios run") {
  const auto r = ex::run_scenario("fig2a", {{"n_cycles", "2"}});
  CHECK(r.data.columns == std::vector<std::string>{"t_ms", "B_mT", "pol_H", "pol_NV", "pol_P1", "cycle_index",
                                                   "event_tag"});
  CHECK(r.data.number(r.data.rows.size() - 1, "pol_H") > 0.0);

  const auto tmr = ex::run_scenario("figS7", {{"points", "2"}, {"n_cycles", "10"}});
  CHECK(tmr.data.rows.size() == 2 * 2 * 11);
}
