// Command-line front end: one subcommand per pipeline slice plus a one-shot
// runner. Logs go to stderr; tables go to --out files (atomic) or stdout.

#include "txa/behavior.hpp"
#include "txa/corestruct.hpp"
#include "txa/demographics.hpp"
#include "txa/divergence.hpp"
#include "txa/io.hpp"
#include "txa/pipeline.hpp"
#include "txa/sax.hpp"
#include "txa/synthgen.hpp"
#include "txa/txgraph.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace {

using namespace txa;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

TransactionTable load_table(const std::string& path) {
  auto result = ingest_transactions(path);
  std::fprintf(stderr, "[ingest] %s: accepted=%llu rejected=%llu\n", path.c_str(),
               static_cast<unsigned long long>(result.accepted),
               static_cast<unsigned long long>(result.rejected));
  for (const auto& bad : result.reject_sample)
    std::fprintf(stderr, "[ingest]   line %llu: %s\n",
                 static_cast<unsigned long long>(bad.line), bad.reason.c_str());
  if (result.table.rows() == 0) throw Error("no usable rows in " + path);
  return std::move(result.table);
}

void write_table(const std::string& out, const std::string& content) {
  if (out.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  AtomicWriter writer(out);
  writer.append(content);
  writer.commit();
  std::fprintf(stderr, "[write] %s (%zu bytes)\n", out.c_str(), content.size());
}

std::vector<Day> load_event_dates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read event file: " + path);
  std::vector<Day> events;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    std::size_t at = line.find_first_not_of(" \t");
    if (at == std::string::npos || line[at] == '#') continue;
    events.push_back(parse_date(line.substr(at)));
  }
  return events;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transaction stream analytics toolkit"};
  app.require_subcommand(1);

  // ----- synth -----
  struct {
    std::string scenario, out = "transactions.csv";
    std::uint64_t seed = 1;
    int workers = 1;
  } synth;
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic transaction table");
  cmd_synth->add_option("--scenario", synth.scenario, "scenario config file")->required();
  cmd_synth->add_option("--seed", synth.seed, "master seed");
  cmd_synth->add_option("--workers", synth.workers, "worker threads");
  cmd_synth->add_option("--out", synth.out, "output CSV path");
  cmd_synth->callback([&] {
    const auto cfg = ScenarioConfig::load(synth.scenario);
    const auto table = generate(cfg, synth.seed, synth.workers);
    std::ostringstream csv;
    write_transactions(csv, table);
    write_table(synth.out, csv.str());
    std::fprintf(stderr, "[synth] rows=%zu clients=%zu merchants=%zu\n", table.rows(),
                 table.clients.size(), table.merchants.size());
  });

  // ----- ingest -----
  struct {
    std::string input, out;
  } ing;
  auto* cmd_ingest = app.add_subcommand("ingest", "validate and normalize a transaction file");
  cmd_ingest->add_option("--input", ing.input, "raw CSV")->required();
  cmd_ingest->add_option("--out", ing.out, "normalized CSV (stdout when omitted)");
  cmd_ingest->callback([&] {
    const auto table = load_table(ing.input);
    std::ostringstream csv;
    write_transactions(csv, table);
    write_table(ing.out, csv.str());
  });

  // ----- divergence -----
  struct {
    std::string input, kind = "d1", basis = "amount", out;
    int w = 7;
    bool panel = false;
  } div;
  auto* cmd_div = app.add_subcommand("divergence", "per-district consumption divergence series");
  cmd_div->add_option("--input", div.input, "transaction CSV")->required();
  cmd_div->add_option("--kind", div.kind, "d1 (vs country mix) or d2 (self-referential)")
      ->check(CLI::IsMember({"d1", "d2"}));
  cmd_div->add_option("--w", div.w, "window length in days");
  cmd_div->add_option("--basis", div.basis, "share basis")->check(CLI::IsMember({"amount", "count"}));
  cmd_div->add_flag("--panel", div.panel, "emit cross-district quantile panel instead");
  cmd_div->add_option("--out", div.out, "output path (stdout when omitted)");
  cmd_div->callback([&] {
    const auto table = load_table(div.input);
    const auto mapper = CoicopMapper::builtin();
    const SharePanel shares(table, mapper,
                            div.basis == "count" ? ShareBasis::Count : ShareBasis::Amount);
    std::vector<DivergenceSeries> all;
    for (std::size_t d = 0; d < table.districts.size(); ++d) {
      const auto dd = static_cast<std::uint16_t>(d);
      all.push_back(div.kind == "d2" ? d2_series(shares, dd, div.w) : d1_series(shares, dd, div.w));
    }
    std::string csv;
    if (div.panel) {
      const auto agg = divergence_panel(all);
      csv = "date,mean,q25,q50,q75,n_districts\n";
      for (std::size_t i = 0; i < agg.dates.size(); ++i) {
        const auto j = static_cast<Eigen::Index>(i);
        csv += format_date(agg.dates[i]) + ',' + num(agg.mean(j)) + ',' + num(agg.q25(j)) + ',' +
               num(agg.q50(j)) + ',' + num(agg.q75(j)) + ',' + std::to_string(agg.n_districts[i]) +
               '\n';
      }
    } else {
      csv = "district,date,value\n";
      for (const auto& s : all)
        for (std::size_t i = 0; i < s.dates.size(); ++i)
          csv += std::string(table.districts.name(s.district)) + ',' + format_date(s.dates[i]) +
                 ',' + num(s.values(static_cast<Eigen::Index>(i))) + '\n';
    }
    write_table(div.out, csv);
  });

  // ----- causal -----
  struct {
    std::string input, event, post_end, out;
    double confidence = 0.95;
    int bootstrap = 1000;
    std::uint64_t seed = 1;
  } cz;
  auto* cmd_causal = app.add_subcommand("causal", "district impact classification");
  cmd_causal->add_option("--input", cz.input, "transaction CSV")->required();
  cmd_causal->add_option("--event", cz.event, "intervention date YYYY-MM-DD")->required();
  cmd_causal->add_option("--post-end", cz.post_end, "end of post window (default: last day)");
  cmd_causal->add_option("--confidence", cz.confidence, "interval confidence");
  cmd_causal->add_option("--bootstrap", cz.bootstrap, "bootstrap replicates");
  cmd_causal->add_option("--seed", cz.seed, "bootstrap seed");
  cmd_causal->add_option("--out", cz.out, "output path (stdout when omitted)");
  cmd_causal->callback([&] {
    const auto table = load_table(cz.input);
    const Day from = table.min_date();
    const Day event = parse_date(cz.event);
    const Day until = cz.post_end.empty() ? table.max_date() : parse_date(cz.post_end);
    if (event <= from || event > until) throw Error("event date outside the data range");
    const auto n_pre = static_cast<Eigen::Index>(event - from);
    const auto n_post = static_cast<Eigen::Index>(until - event + 1);
    std::vector<Vector> daily(table.districts.size());
    Vector country = Vector::Zero(n_pre + n_post);
    for (std::size_t d = 0; d < daily.size(); ++d) {
      daily[d] = daily_amount_series(table, static_cast<std::uint16_t>(d), from, until);
      country += daily[d];
    }
    std::vector<DistrictImpact> impacts;
    for (std::size_t d = 0; d < daily.size(); ++d) {
      const Vector control = country - daily[d];
      const auto model = fit_counterfactual(daily[d].head(n_pre), control.head(n_pre));
      impacts.push_back({std::string(table.districts.name(static_cast<std::uint32_t>(d))),
                         estimate_impact(model, daily[d].tail(n_post), control.tail(n_post),
                                         cz.bootstrap, cz.confidence,
                                         derive_seed(cz.seed, "causal", d))});
    }
    const auto classified = classify_districts(std::move(impacts));
    std::string csv = "district,cumulative,lo,hi,confidence,label\n";
    for (const auto& row : classified.rows)
      csv += row.district + ',' + num(row.estimate.cumulative) + ',' + num(row.estimate.lo) + ',' +
             num(row.estimate.hi) + ',' + num(row.estimate.confidence) + ',' +
             std::string(to_string(row.estimate.label)) + '\n';
    write_table(cz.out, csv);
    std::fprintf(stderr, "[causal] negative=%d positive=%d neutral=%d\n", classified.n_negative,
                 classified.n_positive, classified.n_neutral);
  });

  // ----- behavior -----
  struct {
    std::string input, out;
    int window = kChainWindowDays, step = kChainStepDays, workers = 1;
  } beh;
  auto* cmd_beh = app.add_subcommand("behavior", "weekly per-district mean nDCG panel");
  cmd_beh->add_option("--input", beh.input, "transaction CSV")->required();
  cmd_beh->add_option("--window", beh.window, "chain window in days");
  cmd_beh->add_option("--step", beh.step, "panel step in days");
  cmd_beh->add_option("--workers", beh.workers, "worker threads");
  cmd_beh->add_option("--out", beh.out, "output path (stdout when omitted)");
  cmd_beh->callback([&] {
    const auto table = load_table(beh.input);
    BehaviorOptions opts;
    opts.window_days = beh.window;
    opts.step_days = beh.step;
    opts.workers = beh.workers;
    const auto panel = behavior_panel(table, CoicopMapper::builtin(), opts);
    std::string csv = "district,window_end,mean_ndcg,users\n";
    for (Eigen::Index d = 0; d < panel.mean_ndcg.rows(); ++d)
      for (Eigen::Index j = 0; j < panel.mean_ndcg.cols(); ++j) {
        if (panel.user_counts(d, j) == 0) continue;
        csv += std::string(table.districts.name(static_cast<std::uint32_t>(d))) + ',' +
               format_date(panel.labels[static_cast<std::size_t>(j)]) + ',' +
               num(panel.mean_ndcg(d, j)) + ',' + std::to_string(panel.user_counts(d, j)) + '\n';
      }
    write_table(beh.out, csv);
  });

  // ----- graph -----
  struct {
    std::string input, out;
    int halfwidth = kSnapshotHalfWidth, workers = 1;
    bool stats = false;
  } gr;
  auto* cmd_graph = app.add_subcommand("graph", "daily merchant-graph snapshots");
  cmd_graph->add_option("--input", gr.input, "transaction CSV")->required();
  cmd_graph->add_option("--halfwidth", gr.halfwidth, "snapshot half-width in days");
  cmd_graph->add_option("--workers", gr.workers, "worker threads");
  cmd_graph->add_flag("--stats", gr.stats, "emit per-day size stats instead of edges");
  cmd_graph->add_option("--out", gr.out, "output path (stdout when omitted)");
  cmd_graph->callback([&] {
    const auto table = load_table(gr.input);
    const auto snaps =
        build_snapshots(table, table.min_date(), table.max_date(), gr.halfwidth, gr.workers);
    std::string csv;
    if (gr.stats) {
      csv = "date,vertices,edges,total_weight\n";
      for (const auto& g : snaps) {
        double mass = 0.0;
        for (double w : g.weight) mass += w;
        csv += format_date(g.date) + ',' + std::to_string(g.size()) + ',' +
               std::to_string(g.edge_count()) + ',' + num(mass) + '\n';
      }
    } else {
      csv = "date,src,dst,weight\n";
      for (const auto& g : snaps)
        for (std::size_t u = 0; u < g.size(); ++u)
          for (std::uint32_t e = g.row_ptr[u]; e < g.row_ptr[u + 1]; ++e)
            csv += format_date(g.date) + ',' + std::string(table.merchants.name(g.vertices[u])) +
                   ',' + std::string(table.merchants.name(g.vertices[g.col[e]])) + ',' +
                   num(g.weight[e]) + '\n';
    }
    write_table(gr.out, csv);
  });

  // ----- rank -----
  struct {
    std::string input, out;
    double alpha = kPagerankAlpha, tol = kPagerankTol;
    int halfwidth = kSnapshotHalfWidth, workers = 1;
  } rk;
  auto* cmd_rank = app.add_subcommand("rank", "normalized PageRank trajectories");
  cmd_rank->add_option("--input", rk.input, "transaction CSV")->required();
  cmd_rank->add_option("--alpha", rk.alpha, "damping factor");
  cmd_rank->add_option("--tol", rk.tol, "power-iteration tolerance");
  cmd_rank->add_option("--halfwidth", rk.halfwidth, "snapshot half-width in days");
  cmd_rank->add_option("--workers", rk.workers, "worker threads");
  cmd_rank->add_option("--out", rk.out, "output path (stdout when omitted)");
  cmd_rank->callback([&] {
    const auto table = load_table(rk.input);
    const auto snaps =
        build_snapshots(table, table.min_date(), table.max_date(), rk.halfwidth, rk.workers);
    const auto panel = rank_panel(snaps, rk.alpha, rk.tol, rk.workers);
    std::string csv = "merchant,date,rank\n";
    for (Eigen::Index m = 0; m < panel.rank.rows(); ++m)
      for (Eigen::Index j = 0; j < panel.rank.cols(); ++j) {
        if (std::isnan(panel.rank(m, j))) continue;
        csv += std::string(table.merchants.name(panel.merchants[static_cast<std::size_t>(m)])) +
               ',' + format_date(panel.dates[static_cast<std::size_t>(j)]) + ',' +
               num(panel.rank(m, j)) + '\n';
      }
    write_table(rk.out, csv);
  });

  // ----- cluster -----
  struct {
    std::string input, out_dir = "cluster_out";
    int k = 6, segment_len = 15, mean_levels = 4, slope_levels = 2;
    int halfwidth = kSnapshotHalfWidth, workers = 1;
    double min_coverage = 0.5;
    std::string grid_k = "4,5,6,7,8", grid_len = "7,15,30";
    std::uint64_t seed = 1;
  } cl;
  auto* cmd_cluster = app.add_subcommand("cluster", "1d-SAX + k-means over rank trajectories");
  cmd_cluster->add_option("--input", cl.input, "transaction CSV")->required();
  cmd_cluster->add_option("--k", cl.k, "cluster count");
  cmd_cluster->add_option("--segment-len", cl.segment_len, "SAX segment length (days)");
  cmd_cluster->add_option("--mean-levels", cl.mean_levels, "mean quantization levels");
  cmd_cluster->add_option("--slope-levels", cl.slope_levels, "slope quantization levels");
  cmd_cluster->add_option("--min-coverage", cl.min_coverage, "min snapshot presence fraction");
  cmd_cluster->add_option("--grid-k", cl.grid_k, "silhouette grid k values (comma list)");
  cmd_cluster->add_option("--grid-len", cl.grid_len, "silhouette grid segment lengths");
  cmd_cluster->add_option("--halfwidth", cl.halfwidth, "snapshot half-width in days");
  cmd_cluster->add_option("--workers", cl.workers, "worker threads");
  cmd_cluster->add_option("--seed", cl.seed, "clustering seed");
  cmd_cluster->add_option("--out-dir", cl.out_dir, "output directory");
  cmd_cluster->callback([&] {
    PipelineConfig cfg;
    cfg.input = cl.input;
    cfg.out_dir = cl.out_dir;
    cfg.seed = cl.seed;
    cfg.workers = cl.workers;
    cfg.halfwidth = cl.halfwidth;
    cfg.sax.segment_len = cl.segment_len;
    cfg.sax.mean_levels = cl.mean_levels;
    cfg.sax.slope_levels = cl.slope_levels;
    cfg.n_clusters = cl.k;
    cfg.min_coverage = cl.min_coverage;
    cfg.grid_k.clear();
    for (const auto& t : split_list(cl.grid_k)) cfg.grid_k.push_back(std::stoi(t));
    cfg.grid_len.clear();
    for (const auto& t : split_list(cl.grid_len)) cfg.grid_len.push_back(std::stoi(t));
    const auto report = run_pipeline_slice(cfg, {"data", "graph", "cluster"});
    if (!report.all_ok()) throw Error("cluster stage failed");
  });

  // ----- core -----
  struct {
    std::string input, events, out_dir = "core_out", weighting = "weighted";
    int halfwidth = kSnapshotHalfWidth, workers = 1;
  } co;
  auto* cmd_core = app.add_subcommand("core", "rich-core and k-shell monitoring");
  cmd_core->add_option("--input", co.input, "transaction CSV")->required();
  cmd_core->add_option("--events", co.events, "file of event dates (one per line)");
  cmd_core->add_option("--weighting", co.weighting, "edge weighting")
      ->check(CLI::IsMember({"weighted", "count"}));
  cmd_core->add_option("--halfwidth", co.halfwidth, "snapshot half-width in days");
  cmd_core->add_option("--workers", co.workers, "worker threads");
  cmd_core->add_option("--out-dir", co.out_dir, "output directory");
  cmd_core->callback([&] {
    PipelineConfig cfg;
    cfg.input = co.input;
    cfg.out_dir = co.out_dir;
    cfg.workers = co.workers;
    cfg.halfwidth = co.halfwidth;
    if (co.weighting == "count") cfg.core_weighting = CoreWeighting::UnweightedCount;
    if (!co.events.empty()) cfg.events = load_event_dates(co.events);
    const auto report = run_pipeline_slice(cfg, {"data", "graph", "core"});
    if (!report.all_ok()) throw Error("core stage failed");
  });

  // ----- demographics -----
  struct {
    std::string input, out, mode = "per_month";
    double min_monthly = 30.0;
  } dem;
  auto* cmd_dem = app.add_subcommand("demographics", "AMP classes and inequality");
  cmd_dem->add_option("--input", dem.input, "transaction CSV")->required();
  cmd_dem->add_option("--min-monthly", dem.min_monthly, "spend threshold");
  cmd_dem->add_option("--mode", dem.mode, "threshold mode")
      ->check(CLI::IsMember({"per_month", "total"}));
  cmd_dem->add_option("--out", dem.out, "output path (stdout when omitted)");
  cmd_dem->callback([&] {
    const auto table = load_table(dem.input);
    AmpOptions opts;
    opts.min_monthly = dem.min_monthly;
    if (dem.mode == "total") opts.mode = AmpOptions::Threshold::Total;
    const auto summary = demographics(table, opts);
    std::string csv = "client,amp,class\n";
    for (std::size_t i = 0; i < summary.amp.client.size(); ++i)
      csv += std::string(table.clients.name(summary.amp.client[i])) + ',' +
             num(summary.amp.amp[i]) + ',' + std::to_string(summary.classes[i]) + '\n';
    write_table(dem.out, csv);
    std::fprintf(stderr, "[demographics] clients=%zu excluded=%llu gini=%.6f\n",
                 summary.amp.client.size(),
                 static_cast<unsigned long long>(summary.amp.excluded), summary.gini);
  });

  // ----- pipeline -----
  struct {
    std::string config, out_dir;
    int workers = 0;
    std::uint64_t seed = 0;
    bool has_seed = false;
  } pl;
  auto* cmd_pipe = app.add_subcommand("pipeline", "run every stage in dependency order");
  cmd_pipe->add_option("--config", pl.config, "pipeline config file")->required();
  cmd_pipe->add_option("--out-dir", pl.out_dir, "output directory (overrides config and env)");
  cmd_pipe->add_option("--workers", pl.workers, "worker threads (overrides config)");
  cmd_pipe->add_option("--seed", pl.seed, "master seed (overrides config)")
      ->each([&](const std::string&) { pl.has_seed = true; });
  cmd_pipe->callback([&] {
    auto cfg = PipelineConfig::load(pl.config);
    cfg.apply_environment();
    if (!pl.out_dir.empty()) cfg.out_dir = pl.out_dir;
    if (pl.workers > 0) cfg.workers = pl.workers;
    if (pl.has_seed) cfg.seed = pl.seed;
    const auto report = run_pipeline(cfg);
    if (!report.all_ok()) throw Error("one or more stages failed");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
