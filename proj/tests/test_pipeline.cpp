#include <doctest.h>

#include "txa/pipeline.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace txa;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& leaf) {
  auto dir = fs::temp_directory_path() / "txa_pipe_test" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

// Scenario small enough to run every stage in well under a second.
fs::path scenario_file() {
  static const fs::path path = [] {
    const auto p = temp_dir("scenario") / "tiny.cfg";
    write_file(p,
               "agents = 60\n"
               "merchants = 30\n"
               "districts = 3\n"
               "regions = 1\n"
               "start = 2017-01-01\n"
               "end = 2017-03-01\n"
               "daily_rate = 2.0\n");
    return p;
  }();
  return path;
}

PipelineConfig full_config(const fs::path& out_dir) {
  PipelineConfig cfg;
  cfg.scenario = scenario_file();
  cfg.out_dir = out_dir;
  cfg.seed = 5;
  cfg.workers = 2;
  cfg.event_date = parse_date("2017-02-14");
  cfg.n_bootstrap = 200;
  cfg.n_clusters = 4;
  cfg.grid_k = {2, 3, 4};
  cfg.grid_len = {7, 15};
  cfg.events = {parse_date("2017-02-14")};
  return cfg;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const StageReport& stage_named(const RunReport& report, const std::string& name) {
  for (const auto& s : report.stages)
    if (s.name == name) return s;
  REQUIRE_MESSAGE(false, "missing stage ", name);
  return report.stages.front();
}

}  // namespace

TEST_CASE("pipeline config loads every key from file") {
  const auto dir = temp_dir("cfg");
  write_file(dir / "in.csv", "x\n");
  write_file(dir / "mcc.csv", "5411,1\n");
  write_file(dir / "pipe.cfg",
             "input = " + (dir / "in.csv").string() + "\n" +
             "out_dir = results\n"
             "seed = 42\n"
             "workers = 3\n"
             "window_days = 14\n"
             "basis = count\n"
             "event_date = 2017-06-01\n"
             "post_end = 2017-08-01\n"
             "confidence = 0.9\n"
             "n_bootstrap = 500\n"
             "behavior_window = 10\n"
             "behavior_step = 5\n"
             "halfwidth = 3\n"
             "alpha = 0.9\n"
             "pagerank_tol = 1e-8\n"
             "segment_len = 10\n"
             "mean_levels = 5\n"
             "slope_levels = 2\n"
             "k = 7\n"
             "grid_k = 3, 5, 7\n"
             "grid_len = 10, 20\n"
             "min_coverage = 0.4\n"
             "events = 2017-06-01, 2017-07-01\n"
             "core_weighting = count\n"
             "min_monthly = 25\n"
             "amp_mode = total\n"
             "mcc_table = " + (dir / "mcc.csv").string() + "\n");

  const auto cfg = PipelineConfig::load(dir / "pipe.cfg");
  CHECK(cfg.input == dir / "in.csv");
  CHECK(cfg.scenario.empty());
  CHECK(cfg.out_dir == "results");
  CHECK(cfg.seed == 42);
  CHECK(cfg.workers == 3);
  CHECK(cfg.window_days == 14);
  CHECK(cfg.basis == ShareBasis::Count);
  REQUIRE(cfg.event_date.has_value());
  CHECK(*cfg.event_date == parse_date("2017-06-01"));
  REQUIRE(cfg.post_end.has_value());
  CHECK(*cfg.post_end == parse_date("2017-08-01"));
  CHECK(cfg.confidence == 0.9);
  CHECK(cfg.n_bootstrap == 500);
  CHECK(cfg.behavior.window_days == 10);
  CHECK(cfg.behavior.step_days == 5);
  CHECK(cfg.halfwidth == 3);
  CHECK(cfg.alpha == 0.9);
  CHECK(cfg.pagerank_tol == 1e-8);
  CHECK(cfg.sax.segment_len == 10);
  CHECK(cfg.sax.mean_levels == 5);
  CHECK(cfg.sax.slope_levels == 2);
  CHECK(cfg.n_clusters == 7);
  CHECK(cfg.grid_k == std::vector<int>{3, 5, 7});
  CHECK(cfg.grid_len == std::vector<int>{10, 20});
  CHECK(cfg.min_coverage == 0.4);
  CHECK(cfg.events == std::vector<Day>{parse_date("2017-06-01"), parse_date("2017-07-01")});
  CHECK(cfg.core_weighting == CoreWeighting::UnweightedCount);
  CHECK(cfg.amp.min_monthly == 25);
  CHECK(cfg.amp.mode == AmpOptions::Threshold::Total);
  CHECK(cfg.mcc_table == dir / "mcc.csv");
  CHECK_NOTHROW(cfg.validate());

  write_file(dir / "bad.cfg", "input = x\nbasis = median\n");
  CHECK_THROWS_AS(PipelineConfig::load(dir / "bad.cfg"), ConfigError);
}

TEST_CASE("pipeline config validation rejects bad parameters") {
  const auto dir = temp_dir("val");
  auto cfg = full_config(dir / "out");
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("input and scenario are exclusive") {
    cfg.input = scenario_file();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.input.clear();
    cfg.scenario.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("missing input path") {
    cfg.scenario.clear();
    cfg.input = dir / "absent.csv";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("parameter ranges") {
    auto expect_reject = [&](auto&& mutate) {
      auto bad = full_config(dir / "out");
      mutate(bad);
      CHECK_THROWS_AS(bad.validate(), ConfigError);
    };
    expect_reject([](PipelineConfig& c) { c.window_days = 0; });
    expect_reject([](PipelineConfig& c) { c.confidence = 1.0; });
    expect_reject([](PipelineConfig& c) { c.n_bootstrap = 99; });
    expect_reject([](PipelineConfig& c) { c.behavior.step_days = 0; });
    expect_reject([](PipelineConfig& c) { c.halfwidth = -1; });
    expect_reject([](PipelineConfig& c) { c.alpha = 1.0; });
    expect_reject([](PipelineConfig& c) { c.sax.segment_len = 1; });
    expect_reject([](PipelineConfig& c) { c.n_clusters = 0; });
    expect_reject([](PipelineConfig& c) { c.grid_k.clear(); });
    expect_reject([](PipelineConfig& c) { c.min_coverage = 1.5; });
    expect_reject([](PipelineConfig& c) { c.workers = 0; });
  }
}

TEST_CASE("TXA_OUT_DIR overrides the configured output directory") {
  auto cfg = full_config("configured");
  ::setenv("TXA_OUT_DIR", "/tmp/txa_env_override", 1);
  cfg.apply_environment();
  CHECK(cfg.out_dir == "/tmp/txa_env_override");

  cfg.out_dir = "configured";
  ::setenv("TXA_OUT_DIR", "", 1);
  cfg.apply_environment();
  CHECK(cfg.out_dir == "configured");

  ::unsetenv("TXA_OUT_DIR");
  cfg.apply_environment();
  CHECK(cfg.out_dir == "configured");
}

TEST_CASE("full pipeline run emits every table and a consistent report") {
  const auto out = temp_dir("full");
  const auto report = run_pipeline(full_config(out));

  CHECK(report.all_ok());
  const std::vector<std::string> order = {"data",     "demographics", "divergence", "causal",
                                          "behavior", "graph",        "cluster",    "core"};
  REQUIRE(report.stages.size() == order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(report.stages[i].name == order[i]);
    CHECK(report.stages[i].status == StageStatus::Ok);
  }
  CHECK(stage_named(report, "data").rows > 1000);

  const std::set<std::string> expected = {
      "assignments.csv",     "causal.csv",          "centroids.csv",
      "composition.csv",     "core_events.csv",     "core_fraction.csv",
      "core_sizes.csv",      "core_z.csv",          "demographics.csv",
      "divergence_d1.csv",   "divergence_d2.csv",   "divergence_panel_d1.csv",
      "divergence_panel_d2.csv", "ndcg.csv",        "rank_panel.csv",
      "shell_mass.csv",      "shell_transitions.csv", "silhouette.csv",
      "snapshot_stats.csv",  "transactions.csv"};
  std::set<std::string> emitted;
  for (const auto& [name, hash] : report.manifest) {
    emitted.insert(name);
    CHECK(hash.size() == 16);
    CHECK(fs::exists(out / name));
  }
  CHECK(emitted == expected);

  // manifest.txt mirrors the in-memory manifest, one "hash  name" per line.
  std::string expected_txt;
  for (const auto& [name, hash] : report.manifest) expected_txt += hash + "  " + name + '\n';
  CHECK(slurp(out / "manifest.txt") == expected_txt);

  const auto doc = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(doc["seed"] == 5);
  REQUIRE(doc["stages"].size() == order.size());
  for (const auto& s : doc["stages"]) CHECK(s["status"] == "ok");
  CHECK(doc["manifest"].size() == expected.size());
  // The report and manifest files describe the run, they are not data outputs.
  CHECK(doc["manifest"].find("report.json") == doc["manifest"].end());
  CHECK(doc["manifest"].find("manifest.txt") == doc["manifest"].end());
}

TEST_CASE("a failing stage is isolated and its dependents are skipped") {
  const auto out = temp_dir("isolate");
  auto cfg = full_config(out);
  cfg.event_date = parse_date("2016-01-01");  // before the scenario range

  const auto report = run_pipeline(cfg);
  CHECK_FALSE(report.all_ok());
  const auto& causal = stage_named(report, "causal");
  CHECK(causal.status == StageStatus::Failed);
  CHECK(causal.detail.find("event_date") != std::string::npos);
  for (const auto& name : {"data", "demographics", "divergence", "behavior", "graph", "cluster",
                           "core"})
    CHECK(stage_named(report, name).status == StageStatus::Ok);
}

TEST_CASE("causal stage is skipped when no event date is configured") {
  const auto out = temp_dir("noevent");
  auto cfg = full_config(out);
  cfg.event_date.reset();

  const auto report = run_pipeline(cfg);
  CHECK(report.all_ok());
  const auto& causal = stage_named(report, "causal");
  CHECK(causal.status == StageStatus::Skipped);
  CHECK(causal.detail == "no event_date configured");
  for (const auto& [name, hash] : report.manifest) CHECK(name != "causal.csv");
}

TEST_CASE("pipeline slices run only the requested stages") {
  const auto out = temp_dir("slice");
  auto cfg = full_config(out);

  const auto report = run_pipeline_slice(cfg, {"data", "divergence"});
  CHECK(report.all_ok());
  CHECK(stage_named(report, "data").status == StageStatus::Ok);
  CHECK(stage_named(report, "divergence").status == StageStatus::Ok);
  for (const auto& name : {"demographics", "causal", "behavior", "graph", "cluster", "core"}) {
    CHECK(stage_named(report, name).status == StageStatus::Skipped);
    CHECK(stage_named(report, name).detail == "not selected");
  }

  // A slice that names a stage without its dependency reports why it idled.
  const auto orphan = run_pipeline_slice(cfg, {"cluster"});
  CHECK(stage_named(orphan, "cluster").status == StageStatus::Skipped);
  CHECK(stage_named(orphan, "cluster").detail == "graph stage unavailable");
}

TEST_CASE("pipeline reruns are byte-identical across worker counts") {
  auto run_manifest = [&](const std::string& leaf, int workers) {
    const auto out = temp_dir(leaf);
    auto cfg = full_config(out);
    cfg.workers = workers;
    const auto report = run_pipeline(cfg);
    REQUIRE(report.all_ok());
    return slurp(out / "manifest.txt");
  };
  const auto first = run_manifest("rerun_a", 2);
  CHECK(run_manifest("rerun_b", 2) == first);
  CHECK(run_manifest("rerun_w1", 1) == first);
  CHECK(run_manifest("rerun_w4", 4) == first);
  CHECK(first.find("transactions.csv") != std::string::npos);
}
