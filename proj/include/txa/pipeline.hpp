#pragma once

#include "txa/behavior.hpp"
#include "txa/causal.hpp"
#include "txa/corestruct.hpp"
#include "txa/demographics.hpp"
#include "txa/sax.hpp"
#include "txa/shares.hpp"
#include "txa/synthgen.hpp"
#include "txa/txgraph.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace txa {

/// One-shot run configuration. Loaded from a flat key=value file; the
/// TXA_OUT_DIR environment variable overrides the configured output
/// directory, and an explicit CLI flag overrides both.
struct PipelineConfig {
  std::filesystem::path input;     // raw transaction CSV
  std::filesystem::path scenario;  // synthetic scenario (exclusive with input)
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 1;
  int workers = 1;

  // divergence
  int window_days = 7;
  ShareBasis basis = ShareBasis::Amount;

  // causal
  std::optional<Day> event_date;  // stage is skipped when unset
  std::optional<Day> post_end;    // defaults to the table's last day
  double confidence = 0.95;
  int n_bootstrap = 1000;

  // behavior
  BehaviorOptions behavior;

  // graph
  int halfwidth = kSnapshotHalfWidth;
  double alpha = kPagerankAlpha;
  double pagerank_tol = kPagerankTol;

  // clustering
  SaxConfig sax;
  int n_clusters = 6;
  std::vector<int> grid_k = {4, 5, 6, 7, 8};
  std::vector<int> grid_len = {7, 15, 30};
  double min_coverage = 0.5;

  // core structure
  std::vector<Day> events;  // dates reported in core_events.csv
  CoreWeighting core_weighting = CoreWeighting::Weighted;

  // demographics
  AmpOptions amp;

  // optional mcc table override (builtin otherwise)
  std::filesystem::path mcc_table;

  static PipelineConfig load(const std::filesystem::path& path);
  /// Applies the TXA_OUT_DIR override when the variable is set.
  void apply_environment();
  void validate() const;  // throws ConfigError
};

enum class StageStatus { Ok, Failed, Skipped };
std::string_view to_string(StageStatus status);

struct StageReport {
  std::string name;
  StageStatus status = StageStatus::Skipped;
  std::string detail;       // free-form summary or error text
  std::uint64_t rows = 0;   // emitted data rows
  double seconds = 0.0;
};

struct RunReport {
  std::vector<StageReport> stages;
  // (relative filename, content hash), sorted by filename; every emitted
  // data file appears here. report.json itself is excluded so the manifest
  // is byte-stable across runs.
  std::vector<std::pair<std::string, std::string>> manifest;
  std::filesystem::path out_dir;

  bool all_ok() const;  // no stage failed (skips allowed)
};

/// Runs data -> demographics -> divergence -> causal -> behavior -> graph ->
/// cluster -> core in dependency order. A failed stage is recorded and its
/// dependents are skipped; independent stages still run. Emits plot-ready
/// delimited tables plus manifest.txt and report.json into out_dir.
RunReport run_pipeline(const PipelineConfig& config);

/// Same, but only the named stages execute (dependencies must be listed
/// too); everything else is reported as skipped.
RunReport run_pipeline_slice(const PipelineConfig& config,
                             const std::vector<std::string>& stages);

}  // namespace txa
