#include "txa/pipeline.hpp"

#include "txa/behavior.hpp"
#include "txa/corestruct.hpp"
#include "txa/divergence.hpp"
#include "txa/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace txa {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

ShareBasis basis_from(const std::string& text) {
  if (text == "amount") return ShareBasis::Amount;
  if (text == "count") return ShareBasis::Count;
  throw ConfigError("pipeline: basis must be amount or count: " + text);
}

/// Buffers one output table and registers its content hash on commit.
class Emitter {
 public:
  Emitter(std::filesystem::path dir, std::vector<std::pair<std::string, std::string>>& manifest)
      : dir_(std::move(dir)), manifest_(&manifest) {}

  void emit(const std::string& name, const std::string& content) {
    AtomicWriter writer(dir_ / name);
    writer.append(content);
    writer.commit();
    manifest_->push_back({name, hash_file(dir_ / name)});
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>>* manifest_;
};

}  // namespace

std::string_view to_string(StageStatus status) {
  switch (status) {
    case StageStatus::Ok: return "ok";
    case StageStatus::Failed: return "failed";
    case StageStatus::Skipped: return "skipped";
  }
  return "failed";
}

bool RunReport::all_ok() const {
  for (const auto& s : stages)
    if (s.status == StageStatus::Failed) return false;
  return true;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  const auto kv = KeyValueFile::load(path);
  PipelineConfig cfg;
  if (kv.has("input")) cfg.input = kv.get("input");
  if (kv.has("scenario")) cfg.scenario = kv.get("scenario");
  if (kv.has("out_dir")) cfg.out_dir = kv.get("out_dir");
  cfg.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 1));
  cfg.workers = static_cast<int>(kv.get_int_or("workers", 1));
  cfg.window_days = static_cast<int>(kv.get_int_or("window_days", cfg.window_days));
  cfg.basis = basis_from(kv.get_or("basis", "amount"));
  if (kv.has("event_date")) cfg.event_date = parse_date(kv.get("event_date"));
  if (kv.has("post_end")) cfg.post_end = parse_date(kv.get("post_end"));
  cfg.confidence = kv.get_double_or("confidence", cfg.confidence);
  cfg.n_bootstrap = static_cast<int>(kv.get_int_or("n_bootstrap", cfg.n_bootstrap));
  cfg.behavior.window_days =
      static_cast<int>(kv.get_int_or("behavior_window", cfg.behavior.window_days));
  cfg.behavior.step_days = static_cast<int>(kv.get_int_or("behavior_step", cfg.behavior.step_days));
  cfg.halfwidth = static_cast<int>(kv.get_int_or("halfwidth", cfg.halfwidth));
  cfg.alpha = kv.get_double_or("alpha", cfg.alpha);
  cfg.pagerank_tol = kv.get_double_or("pagerank_tol", cfg.pagerank_tol);
  cfg.sax.segment_len = static_cast<int>(kv.get_int_or("segment_len", cfg.sax.segment_len));
  cfg.sax.mean_levels = static_cast<int>(kv.get_int_or("mean_levels", cfg.sax.mean_levels));
  cfg.sax.slope_levels = static_cast<int>(kv.get_int_or("slope_levels", cfg.sax.slope_levels));
  cfg.n_clusters = static_cast<int>(kv.get_int_or("k", cfg.n_clusters));
  if (kv.has("grid_k")) {
    cfg.grid_k.clear();
    for (const auto& t : split_list(kv.get("grid_k"))) cfg.grid_k.push_back(std::stoi(t));
  }
  if (kv.has("grid_len")) {
    cfg.grid_len.clear();
    for (const auto& t : split_list(kv.get("grid_len"))) cfg.grid_len.push_back(std::stoi(t));
  }
  cfg.min_coverage = kv.get_double_or("min_coverage", cfg.min_coverage);
  if (kv.has("events")) {
    for (const auto& t : split_list(kv.get("events"))) cfg.events.push_back(parse_date(t));
  }
  if (kv.get_or("core_weighting", "weighted") == "count")
    cfg.core_weighting = CoreWeighting::UnweightedCount;
  cfg.amp.min_monthly = kv.get_double_or("min_monthly", cfg.amp.min_monthly);
  if (kv.get_or("amp_mode", "per_month") == "total") cfg.amp.mode = AmpOptions::Threshold::Total;
  if (kv.has("mcc_table")) cfg.mcc_table = kv.get("mcc_table");
  return cfg;
}

void PipelineConfig::apply_environment() {
  if (const char* dir = std::getenv("TXA_OUT_DIR"); dir && *dir) out_dir = dir;
}

void PipelineConfig::validate() const {
  const bool has_input = !input.empty();
  const bool has_scenario = !scenario.empty();
  if (has_input == has_scenario)
    throw ConfigError("pipeline: exactly one of input/scenario must be set");
  if (has_input && !std::filesystem::exists(input))
    throw ConfigError("pipeline: input path not readable: " + input.string());
  if (has_scenario && !std::filesystem::exists(scenario))
    throw ConfigError("pipeline: scenario path not readable: " + scenario.string());
  if (!mcc_table.empty() && !std::filesystem::exists(mcc_table))
    throw ConfigError("pipeline: mcc table not readable: " + mcc_table.string());
  if (window_days < 1) throw ConfigError("pipeline: window_days must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ConfigError("pipeline: confidence outside (0,1)");
  if (n_bootstrap < 100) throw ConfigError("pipeline: n_bootstrap must be >= 100");
  if (behavior.window_days < 1 || behavior.step_days < 1)
    throw ConfigError("pipeline: behavior window/step must be >= 1");
  if (halfwidth < 0) throw ConfigError("pipeline: halfwidth must be >= 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("pipeline: alpha outside (0,1)");
  if (sax.segment_len < 2 || sax.mean_levels < 2 || sax.slope_levels < 1)
    throw ConfigError("pipeline: sax parameters out of range");
  if (n_clusters < 1) throw ConfigError("pipeline: k must be >= 1");
  if (grid_k.empty() || grid_len.empty()) throw ConfigError("pipeline: empty silhouette grid");
  if (!(min_coverage >= 0.0 && min_coverage <= 1.0))
    throw ConfigError("pipeline: min_coverage outside [0,1]");
  if (workers < 1) throw ConfigError("pipeline: workers must be >= 1");
}

namespace {

RunReport run_impl(const PipelineConfig& cfg, const std::vector<std::string>& filter) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);

  RunReport report;
  report.out_dir = cfg.out_dir;
  Emitter out(cfg.out_dir, report.manifest);

  auto want = [&](std::string_view name) {
    if (filter.empty()) return true;
    for (const auto& f : filter)
      if (f == name) return true;
    return false;
  };

  const auto mapper =
      cfg.mcc_table.empty() ? CoicopMapper::builtin() : CoicopMapper::load(cfg.mcc_table);

  TransactionTable table;
  std::vector<GraphSnapshot> snapshots;
  RankPanel panel;

  auto run_stage = [&](const std::string& name, bool ready, const std::string& skip_reason,
                       auto&& body) -> bool {
    StageReport stage;
    stage.name = name;
    if (!ready) {
      stage.detail = skip_reason;
      std::fprintf(stderr, "[pipeline] %-12s skipped (%s)\n", name.c_str(), skip_reason.c_str());
      report.stages.push_back(std::move(stage));
      return false;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(stage);
      stage.status = StageStatus::Ok;
    } catch (const std::exception& e) {
      stage.status = StageStatus::Failed;
      stage.detail = e.what();
    }
    stage.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "[pipeline] %-12s %s rows=%llu %.2fs %s\n", name.c_str(),
                 std::string(to_string(stage.status)).c_str(),
                 static_cast<unsigned long long>(stage.rows), stage.seconds,
                 stage.detail.c_str());
    const bool ok = stage.status == StageStatus::Ok;
    report.stages.push_back(std::move(stage));
    return ok;
  };

  auto dep_reason = [&](std::string_view name, const char* dep) {
    return want(name) ? std::string(dep) + " stage unavailable" : std::string("not selected");
  };

  // ----- data -----
  const bool data_ok = run_stage("data", want("data"), "not selected", [&](StageReport& stage) {
    if (!cfg.scenario.empty()) {
      const auto scenario = ScenarioConfig::load(cfg.scenario);
      table = generate(scenario, cfg.seed, cfg.workers);
      std::ostringstream csv;
      write_transactions(csv, table);
      out.emit("transactions.csv", csv.str());
      stage.detail = "generated from scenario";
    } else {
      auto ingest = ingest_transactions(cfg.input);
      table = std::move(ingest.table);
      char buf[96];
      std::snprintf(buf, sizeof buf, "accepted=%llu rejected=%llu",
                    static_cast<unsigned long long>(ingest.accepted),
                    static_cast<unsigned long long>(ingest.rejected));
      stage.detail = buf;
    }
    if (table.rows() == 0) throw Error("no usable rows");
    stage.rows = table.rows();
  });

  // ----- demographics -----
  run_stage("demographics", want("demographics") && data_ok, dep_reason("demographics", "data"),
            [&](StageReport& stage) {
    const auto summary = demographics(table, cfg.amp);
    std::string csv = "client,amp,class\n";
    for (std::size_t i = 0; i < summary.amp.client.size(); ++i) {
      csv += std::string(table.clients.name(summary.amp.client[i])) + ',' +
             num(summary.amp.amp[i]) + ',' + std::to_string(summary.classes[i]) + '\n';
    }
    out.emit("demographics.csv", csv);
    stage.rows = summary.amp.client.size();
    char buf[96];
    std::snprintf(buf, sizeof buf, "gini=%.6f excluded=%llu", summary.gini,
                  static_cast<unsigned long long>(summary.amp.excluded));
    stage.detail = buf;
  });

  // ----- divergence -----
  run_stage("divergence", want("divergence") && data_ok, dep_reason("divergence", "data"),
            [&](StageReport& stage) {
    const SharePanel shares(table, mapper, cfg.basis);
    std::vector<DivergenceSeries> all_d1, all_d2;
    for (std::size_t d = 0; d < table.districts.size(); ++d) {
      all_d1.push_back(d1_series(shares, static_cast<std::uint16_t>(d), cfg.window_days));
      all_d2.push_back(d2_series(shares, static_cast<std::uint16_t>(d), cfg.window_days));
    }
    auto series_csv = [&](const std::vector<DivergenceSeries>& all) {
      std::string csv = "district,date,value\n";
      for (const auto& s : all)
        for (std::size_t i = 0; i < s.dates.size(); ++i) {
          csv += std::string(table.districts.name(s.district)) + ',' + format_date(s.dates[i]) +
                 ',' + num(s.values(static_cast<Eigen::Index>(i))) + '\n';
          ++stage.rows;
        }
      return csv;
    };
    auto panel_csv = [&](const std::vector<DivergenceSeries>& all) {
      const auto agg = divergence_panel(all);
      std::string csv = "date,mean,q25,q50,q75,n_districts\n";
      for (std::size_t i = 0; i < agg.dates.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        csv += format_date(agg.dates[i]) + ',' + num(agg.mean(j)) + ',' + num(agg.q25(j)) + ',' +
               num(agg.q50(j)) + ',' + num(agg.q75(j)) + ',' + std::to_string(agg.n_districts[i]) +
               '\n';
      }
      return csv;
    };
    out.emit("divergence_d1.csv", series_csv(all_d1));
    out.emit("divergence_d2.csv", series_csv(all_d2));
    out.emit("divergence_panel_d1.csv", panel_csv(all_d1));
    out.emit("divergence_panel_d2.csv", panel_csv(all_d2));
    char buf[64];
    std::snprintf(buf, sizeof buf, "districts=%zu w=%d", table.districts.size(), cfg.window_days);
    stage.detail = buf;
  });

  // ----- causal -----
  run_stage("causal", want("causal") && data_ok && cfg.event_date.has_value(),
            !want("causal")  ? "not selected"
            : data_ok        ? "no event_date configured"
                             : "data stage unavailable",
            [&](StageReport& stage) {
              const Day from = table.min_date();
              const Day event = *cfg.event_date;
              const Day until = cfg.post_end.value_or(table.max_date());
              if (event <= from || event > until)
                throw ConfigError("causal: event_date outside the data range");
              const auto n_pre = static_cast<Eigen::Index>(event - from);
              const auto n_post = static_cast<Eigen::Index>(until - event + 1);

              const auto n_districts = table.districts.size();
              std::vector<Vector> daily(n_districts);
              Vector country = Vector::Zero(n_pre + n_post);
              for (std::size_t d = 0; d < n_districts; ++d) {
                daily[d] = daily_amount_series(table, static_cast<std::uint16_t>(d), from, until);
                country += daily[d];
              }

              std::vector<DistrictImpact> impacts;
              for (std::size_t d = 0; d < n_districts; ++d) {
                const Vector control = country - daily[d];
                const auto model = fit_counterfactual(daily[d].head(n_pre), control.head(n_pre));
                auto estimate = estimate_impact(model, daily[d].tail(n_post),
                                                control.tail(n_post), cfg.n_bootstrap,
                                                cfg.confidence, derive_seed(cfg.seed, "causal", d));
                impacts.push_back({std::string(table.districts.name(
                                       static_cast<std::uint32_t>(d))),
                                   std::move(estimate)});
              }
              const auto classified = classify_districts(std::move(impacts));
              std::string csv = "district,cumulative,lo,hi,confidence,label\n";
              for (const auto& row : classified.rows) {
                csv += row.district + ',' + num(row.estimate.cumulative) + ',' +
                       num(row.estimate.lo) + ',' + num(row.estimate.hi) + ',' +
                       num(row.estimate.confidence) + ',' +
                       std::string(to_string(row.estimate.label)) + '\n';
              }
              out.emit("causal.csv", csv);
              stage.rows = classified.rows.size();
              char buf[96];
              std::snprintf(buf, sizeof buf, "negative=%d positive=%d neutral=%d",
                            classified.n_negative, classified.n_positive, classified.n_neutral);
              stage.detail = buf;
            });

  // ----- behavior -----
  run_stage("behavior", want("behavior") && data_ok, dep_reason("behavior", "data"),
            [&](StageReport& stage) {
    BehaviorOptions opts = cfg.behavior;
    opts.workers = cfg.workers;
    const auto panel_b = behavior_panel(table, mapper, opts);
    std::string csv = "district,window_end,mean_ndcg,users\n";
    for (Eigen::Index d = 0; d < panel_b.mean_ndcg.rows(); ++d)
      for (Eigen::Index j = 0; j < panel_b.mean_ndcg.cols(); ++j) {
        if (panel_b.user_counts(d, j) == 0) continue;
        csv += std::string(table.districts.name(static_cast<std::uint32_t>(d))) + ',' +
               format_date(panel_b.labels[static_cast<std::size_t>(j)]) + ',' +
               num(panel_b.mean_ndcg(d, j)) + ',' + std::to_string(panel_b.user_counts(d, j)) +
               '\n';
        ++stage.rows;
      }
    out.emit("ndcg.csv", csv);
    char buf[64];
    std::snprintf(buf, sizeof buf, "labels=%zu", panel_b.labels.size());
    stage.detail = buf;
  });

  // ----- graph -----
  const bool graph_ok =
      run_stage("graph", want("graph") && data_ok, dep_reason("graph", "data"),
                [&](StageReport& stage) {
        snapshots =
            build_snapshots(table, table.min_date(), table.max_date(), cfg.halfwidth, cfg.workers);
        std::string stats = "date,vertices,edges,total_weight\n";
        for (const auto& g : snapshots) {
          double mass = 0.0;
          for (double w : g.weight) mass += w;
          stats += format_date(g.date) + ',' + std::to_string(g.size()) + ',' +
                   std::to_string(g.edge_count()) + ',' + num(mass) + '\n';
        }
        out.emit("snapshot_stats.csv", stats);

        panel = rank_panel(snapshots, cfg.alpha, cfg.pagerank_tol, cfg.workers);
        std::string ranks = "date,merchant,rank\n";
        for (Eigen::Index m = 0; m < panel.rank.rows(); ++m)
          for (Eigen::Index j = 0; j < panel.rank.cols(); ++j) {
            if (std::isnan(panel.rank(m, j))) continue;
            ranks += std::string(table.merchants.name(
                         panel.merchants[static_cast<std::size_t>(m)])) +
                     ',' + format_date(panel.dates[static_cast<std::size_t>(j)]) + ',' +
                     num(panel.rank(m, j)) + '\n';
            ++stage.rows;
          }
        out.emit("rank_panel.csv", ranks);
        char buf[64];
        std::snprintf(buf, sizeof buf, "snapshots=%zu merchants=%zu", snapshots.size(),
                      panel.merchants.size());
        stage.detail = buf;
      });

  // ----- cluster -----
  run_stage("cluster", want("cluster") && graph_ok, dep_reason("cluster", "graph"),
            [&](StageReport& stage) {
    std::vector<std::uint32_t> kept;  // global merchant ids, panel row order
    std::vector<Vector> rows;
    std::size_t below_coverage = 0, constant = 0;
    for (Eigen::Index m = 0; m < panel.rank.rows(); ++m) {
      const Vector raw = panel.rank.row(m).transpose();
      if (coverage(raw) < cfg.min_coverage) {
        ++below_coverage;
        continue;
      }
      Vector filled = impute_locf(raw);
      const double mean = filled.mean();
      if ((filled.array() - mean).square().sum() <= 1e-24) {
        ++constant;
        continue;
      }
      kept.push_back(panel.merchants[static_cast<std::size_t>(m)]);
      rows.push_back(std::move(filled));
    }
    if (static_cast<int>(rows.size()) < std::max(cfg.n_clusters, 2))
      throw Error("cluster: not enough usable trajectories");

    Matrix series(static_cast<Eigen::Index>(rows.size()), panel.rank.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      series.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();

    const auto grid =
        silhouette_grid(series, cfg.sax, cfg.grid_k, cfg.grid_len, derive_seed(cfg.seed, "grid"));
    std::string grid_csv = "k,segment_len,score\n";
    for (std::size_t ki = 0; ki < grid.ks.size(); ++ki)
      for (std::size_t li = 0; li < grid.segment_lens.size(); ++li)
        grid_csv += std::to_string(grid.ks[ki]) + ',' + std::to_string(grid.segment_lens[li]) +
                    ',' +
                    num(grid.score(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(li))) +
                    '\n';
    out.emit("silhouette.csv", grid_csv);

    Matrix embedded;
    for (Eigen::Index r = 0; r < series.rows(); ++r) {
      const auto word = sax_encode(standardize(series.row(r).transpose()), cfg.sax);
      const Vector v = sax_embed(word);
      if (r == 0) embedded.resize(series.rows(), v.size());
      embedded.row(r) = v.transpose();
    }
    const auto model = kmeans(embedded, cfg.n_clusters, derive_seed(cfg.seed, "kmeans"));

    std::string assign_csv = "merchant,cluster\n";
    for (std::size_t i = 0; i < kept.size(); ++i)
      assign_csv += std::string(table.merchants.name(kept[i])) + ',' +
                    std::to_string(model.assignment[i]) + '\n';
    out.emit("assignments.csv", assign_csv);
    stage.rows = kept.size();

    std::string centroid_csv = "cluster,segment,mean_level,slope_level\n";
    for (int c = 0; c < model.k; ++c)
      for (Eigen::Index s = 0; 2 * s + 1 < model.centroids.cols(); ++s)
        centroid_csv += std::to_string(c) + ',' + std::to_string(s) + ',' +
                        num(model.centroids(c, 2 * s)) + ',' +
                        num(model.centroids(c, 2 * s + 1)) + '\n';
    out.emit("centroids.csv", centroid_csv);

    const auto merchant_mcc = table.merchant_mode_mcc();
    const auto merchant_dist = table.merchant_mode_district();
    std::vector<std::string> cat_labels, dist_labels;
    for (std::uint32_t m : kept) {
      cat_labels.emplace_back(kCategoryNames[static_cast<std::size_t>(
          mapper.map(merchant_mcc[m]) - 1)]);
      dist_labels.emplace_back(table.districts.name(merchant_dist[m]));
    }
    const auto by_cat = composition(model.assignment, model.k, cat_labels, "category");
    const auto by_dist = composition(model.assignment, model.k, dist_labels, "district");
    std::string comp_csv = "dimension,cluster,key,cluster_share,dataset_share,relative_diff\n";
    for (const auto* comp : {&by_cat, &by_dist})
      for (const auto& row : comp->rows)
        comp_csv += row.dimension + ',' + std::to_string(row.cluster) + ',' + row.key + ',' +
                    num(row.cluster_share) + ',' + num(row.dataset_share) + ',' +
                    num(row.relative_diff) + '\n';
    out.emit("composition.csv", comp_csv);

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "kept=%zu low_coverage=%zu constant=%zu best_k=%d best_len=%d inertia=%.4f",
                  kept.size(), below_coverage, constant, grid.best_k, grid.best_segment_len,
                  model.inertia());
    stage.detail = buf;
  });

  // ----- core -----
  run_stage("core", want("core") && graph_ok, dep_reason("core", "graph"),
            [&](StageReport& stage) {
    const auto sizes = core_size_series(snapshots, cfg.core_weighting, cfg.workers);
    std::string size_csv = "date,size\n";
    for (std::size_t i = 0; i < sizes.dates.size(); ++i)
      size_csv +=
          format_date(sizes.dates[i]) + ',' + num(sizes.sizes(static_cast<Eigen::Index>(i))) + '\n';
    out.emit("core_sizes.csv", size_csv);
    stage.rows = sizes.dates.size();

    double ks_p = std::numeric_limits<double>::quiet_NaN();
    if (sizes.stddev > 0.0) {
      const auto zs = zscore_events(sizes, sizes.dates);
      std::string z_csv = "date,size,z\n";
      for (const auto& e : zs)
        z_csv += format_date(e.date) + ',' + num(e.size) + ',' + num(e.z) + '\n';
      out.emit("core_z.csv", z_csv);
      if (!cfg.events.empty()) {
        const auto ev = zscore_events(sizes, cfg.events);
        std::string ev_csv = "date,size,z\n";
        for (const auto& e : ev)
          ev_csv += format_date(e.date) + ',' + num(e.size) + ',' + num(e.z) + '\n';
        out.emit("core_events.csv", ev_csv);
      }
      std::vector<double> vals(sizes.sizes.data(), sizes.sizes.data() + sizes.sizes.size());
      ks_p = ks_normal(vals).p_value;
    }

    const auto merchant_mcc = table.merchant_mode_mcc();
    std::vector<int> categories(merchant_mcc.size());
    for (std::size_t m = 0; m < merchant_mcc.size(); ++m)
      categories[m] = mapper.map(merchant_mcc[m]);
    std::string frac_csv = "date,category,fraction\n";
    for (const auto& g : snapshots) {
      if (g.size() == 0) continue;
      const auto part = rich_core(g, cfg.core_weighting);
      const Vector frac = core_category_fraction(part, categories);
      for (int c = 0; c < kCategoryCount; ++c)
        frac_csv += format_date(g.date) + ',' + std::string(kCategoryNames[c]) + ',' +
                    num(frac(c)) + '\n';
    }
    out.emit("core_fraction.csv", frac_csv);

    const auto dynamics = shell_dynamics(snapshots, 1, cfg.workers);
    std::string trans_csv = "from_shell,to_shell,count\n";
    for (Eigen::Index i = 0; i < dynamics.transitions.rows(); ++i)
      for (Eigen::Index j = 0; j < dynamics.transitions.cols(); ++j)
        trans_csv += std::to_string(i) + ',' + std::to_string(j) + ',' +
                     num(dynamics.transitions(i, j)) + '\n';
    out.emit("shell_transitions.csv", trans_csv);
    std::string mass_csv = "shell,mass\n";
    for (Eigen::Index s = 0; s < dynamics.shell_mass.size(); ++s)
      mass_csv += std::to_string(s) + ',' + num(dynamics.shell_mass(s)) + '\n';
    out.emit("shell_mass.csv", mass_csv);

    char buf[96];
    std::snprintf(buf, sizeof buf, "mean=%.3f sd=%.3f ks_p=%.4f", sizes.mean, sizes.stddev, ks_p);
    stage.detail = buf;
  });

  // ----- manifest + report -----
  std::sort(report.manifest.begin(), report.manifest.end());
  std::string manifest_txt;
  for (const auto& [name, hash] : report.manifest) manifest_txt += hash + "  " + name + '\n';
  {
    AtomicWriter writer(cfg.out_dir / "manifest.txt");
    writer.append(manifest_txt);
    writer.commit();
  }

  nlohmann::json doc;
  doc["out_dir"] = cfg.out_dir.string();
  doc["seed"] = cfg.seed;
  doc["stages"] = nlohmann::json::array();
  for (const auto& s : report.stages) {
    doc["stages"].push_back({{"name", s.name},
                             {"status", std::string(to_string(s.status))},
                             {"detail", s.detail},
                             {"rows", s.rows},
                             {"seconds", s.seconds}});
  }
  doc["manifest"] = nlohmann::json::object();
  for (const auto& [name, hash] : report.manifest) doc["manifest"][name] = hash;
  {
    AtomicWriter writer(cfg.out_dir / "report.json");
    writer.append(doc.dump(2));
    writer.append("\n");
    writer.commit();
  }
  return report;
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& config) { return run_impl(config, {}); }

RunReport run_pipeline_slice(const PipelineConfig& config, const std::vector<std::string>& stages) {
  return run_impl(config, stages);
}

}  // namespace txa
