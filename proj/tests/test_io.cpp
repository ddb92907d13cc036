#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "evogrid/runner.hpp"
#include "evogrid/snapshot.hpp"

using namespace evogrid;
namespace fs = std::filesystem;

namespace {
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("ascii and pgm renderings are byte-exact") {
  const TorusDims d(3, 3);
  CHECK(render_ascii(StrategyGrid::all_c(d)) == "...\n...\n...\n");
  CHECK(render_ascii(StrategyGrid::all_d(d)) == "###\n###\n###\n");
  const StrategyGrid g = StrategyGrid::from_rows({".#.", "##.", "..."});
  CHECK(render_ascii(g) == ".#.\n##.\n...\n");
  CHECK(render_pgm(g) == "P2\n3 3\n255\n0 255 0\n255 255 0\n0 0 0\n");
  CHECK(render_pgm(StrategyGrid::all_c(TorusDims(3, 4))).substr(0, 9) == "P2\n4 3\n25");
}

TEST_CASE("experiment config parses, hashes, and round-trips") {
  const std::string text = R"({
    "dims": {"rows": 3, "cols": 3},
    "payoff": {"matrix": ["3", "0", "5", "1"]},
    "rule": {"kind": "deterministic"},
    "seeds": {"from": 1, "to": 5},
    "max_steps": 1000,
    "snapshots": {"every": 2, "format": "both"},
    "out": "tmp_cfg_out"
  })";
  const ExperimentConfig c = ExperimentConfig::from_json_text(text);
  CHECK(c.dims == TorusDims(3, 3));
  CHECK(c.seeds == std::vector<uint64_t>{1, 2, 3, 4, 5});
  CHECK(c.max_steps == 1000);
  CHECK(c.snapshot_every == 2);
  CHECK(c.payoff.build() == PayoffMatrix::from_strings("3", "0", "5", "1"));
  // canonical form re-parses to the same hash
  const ExperimentConfig c2 = ExperimentConfig::from_json_text(c.canonical_json());
  CHECK(c.hash() == c2.hash());

  CHECK_THROWS(ExperimentConfig::from_json_text(R"({"dims": {"rows": 3, "cols": 3}})"));
  CHECK_THROWS(ExperimentConfig::from_json_text(R"({
    "dims": {"rows": 3, "cols": 3},
    "payoff": {"family": "nosuch", "param": "0.5"},
    "seeds": [1]})"));
}

TEST_CASE("configs load from disk") {
  const fs::path p = fs::temp_directory_path() / "evogrid_cfg_test.json";
  {
    std::ofstream out(p);
    out << R"({"dims": {"rows": 4, "cols": 6},
               "payoff": {"family": "stag_hunt", "param": "0.3"},
               "seeds": [9]})";
  }
  const ExperimentConfig c = ExperimentConfig::from_file(p.string());
  CHECK(c.dims == TorusDims(4, 6));
  CHECK(c.max_steps == 1000000);  // the default budget
  fs::remove(p);
  CHECK_THROWS(ExperimentConfig::from_file("/nonexistent/evogrid.json"));
}

TEST_CASE("sweep specs validate their inputs") {
  const std::string text = R"({
    "dims": {"rows": 10, "cols": 10},
    "family": "snowdrift_classic",
    "points": [{"param": "0.74", "max_steps": 100}, "0.76"],
    "replications": 3,
    "seed_base": 7
  })";
  const SweepSpec s = SweepSpec::from_json_text(text);
  CHECK(s.points.size() == 2);
  CHECK(s.points[0].max_steps == 100);
  CHECK(s.points[1].max_steps == 10000);
  CHECK(s.replications == 3);

  CHECK_THROWS(SweepSpec::from_json_text(R"({
    "dims": {"rows": 10, "cols": 10},
    "family": "snowdrift_classic",
    "points": ["0.74"],
    "replications": 0})"));
  CHECK_THROWS(SweepSpec::from_json_text(R"({
    "dims": {"rows": 10, "cols": 10},
    "family": "snowdrift_classic",
    "points": []})"));
}

TEST_CASE("presets cover the simulation section") {
  for (const std::string& name : preset_names()) {
    const SweepSpec s = preset(name);
    CHECK(!s.points.empty());
    CHECK(s.dims == TorusDims(10, 10));
    CHECK(s.rule.kind == RuleKind::Deterministic);
  }
  CHECK(preset("staghunt").init == InitKind::RandomWithCSquare);
  CHECK(preset("snowdrift-critical").points[0].max_steps == 1000000);
  CHECK(preset("snowdrift-critical").points[1].max_steps == 10000);
  CHECK_THROWS_AS(preset("nosuch"), std::invalid_argument);
}

TEST_CASE("reruns are byte-identical for any worker count") {
  const fs::path base = fs::temp_directory_path() / "evogrid_io_test";
  fs::remove_all(base);

  ExperimentConfig c;
  c.dims = TorusDims(3, 3);
  c.payoff.entries = {"3", "0", "5", "1"};
  c.seeds = {1, 2, 3, 4, 5, 6, 7, 8};
  c.max_steps = 1000;
  c.snapshot_every = 1;
  c.snapshot_format = SnapshotFormat::Both;

  std::vector<std::string> outputs;
  for (int workers : {1, 4}) {
    const fs::path dir = base / ("w" + std::to_string(workers));
    c.out_dir = dir.string();
    run_experiment(c, workers);
    std::string all;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) all += f.filename().string() + "\n" + slurp(f) + "\n";
    outputs.push_back(all);
  }
  CHECK(outputs[0] == outputs[1]);
  CHECK(outputs[0].find("runs.csv") != std::string::npos);
  CHECK(outputs[0].find("snap_seed1_t0.pgm") != std::string::npos);
  fs::remove_all(base);
}

TEST_CASE("csv layouts") {
  RunRecord r;
  r.seed = 5;
  r.steps = 42;
  r.terminal = TerminalClass::AllD;
  r.n_c_final = 0;
  CHECK(run_records_csv(99, {r}) ==
        "config_hash,seed,T,terminal_class,n_C_final\n99,5,42,AllD,0\n");

  SweepRow row;
  row.param = "0.76";
  row.runs = 10;
  row.converged = 9;
  row.fraction = 0.9;
  row.median_steps = 101;
  CHECK(sweep_csv(7, {row}) ==
        "config_hash,param,runs,converged,fraction,median_T_converged\n7,0.76,10,9,0.9,101\n");
}

TEST_CASE("a single-point sweep matches the matching run aggregation") {
  SweepSpec s;
  s.dims = TorusDims(3, 3);
  s.family = "snowdrift_classic";
  s.points = {{"0.76", 2000}};
  s.replications = 20;
  s.seed_base = 1;
  const SweepOutputs sweep = run_sweep(s, 2, false);
  REQUIRE(sweep.rows.size() == 1);

  ExperimentConfig c;
  c.dims = s.dims;
  c.payoff.family = "snowdrift_classic";
  c.payoff.param = "0.76";
  c.max_steps = 2000;
  for (int r = 0; r < 20; ++r) c.seeds.push_back(1 + r);
  const RunOutputs runs = run_experiment(c, 2, false);
  int converged = 0;
  for (const RunRecord& rec : runs.records)
    if (rec.terminal != TerminalClass::Timeout) ++converged;
  CHECK(sweep.rows[0].converged == converged);
}
