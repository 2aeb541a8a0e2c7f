#include "txa/sax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

namespace txa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> gaussian_breakpoints(int levels, double sigma) {
  std::vector<double> out;
  for (int i = 1; i < levels; ++i)
    out.push_back(sigma * norm_quantile(static_cast<double>(i) / levels));
  return out;
}

int bin_of(double value, const std::vector<double>& breakpoints) {
  int bin = 0;
  for (double b : breakpoints)
    if (value >= b) ++bin;
  return bin;
}

}  // namespace

Vector standardize(const Vector& series) {
  const auto n = series.size();
  if (n < 2) throw Error("standardize: series shorter than 2");
  const double m = series.mean();
  const double var = (series.array() - m).square().sum() / static_cast<double>(n);
  if (var <= 1e-24) throw Error("standardize: constant series");
  return (series.array() - m) / std::sqrt(var);
}

Vector impute_locf(const Vector& series) {
  Vector out = series;
  double last = kNaN;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (std::isnan(out(i)))
      out(i) = last;
    else
      last = out(i);
  }
  // Backfill a leading gap from the first observation.
  Eigen::Index first = 0;
  while (first < out.size() && std::isnan(out(first))) ++first;
  if (first == out.size()) throw Error("impute_locf: series has no observed value");
  for (Eigen::Index i = 0; i < first; ++i) out(i) = out(first);
  return out;
}

double coverage(const Vector& series) {
  if (series.size() == 0) return 0.0;
  Eigen::Index seen = 0;
  for (Eigen::Index i = 0; i < series.size(); ++i)
    if (!std::isnan(series(i))) ++seen;
  return static_cast<double>(seen) / static_cast<double>(series.size());
}

SaxWord sax_encode(const Vector& standardized, const SaxConfig& config) {
  if (config.segment_len < 1) throw Error("sax_encode: segment_len must be >= 1");
  if (config.mean_levels < 2 || config.slope_levels < 2)
    throw Error("sax_encode: level counts must be >= 2");
  const auto T = standardized.size();
  if (T == 0) throw Error("sax_encode: empty series");

  const auto mean_breaks = gaussian_breakpoints(config.mean_levels, 1.0);
  const auto slope_sigma = std::sqrt(config.slope_var_scale / config.segment_len);
  const auto slope_breaks = gaussian_breakpoints(config.slope_levels, slope_sigma);

  SaxWord word;
  word.config = config;
  for (Eigen::Index s = 0; s < T; s += config.segment_len) {
    const auto m = std::min<Eigen::Index>(config.segment_len, T - s);
    if (m < config.segment_len) word.has_short_segment = true;
    // Least-squares line over the segment: the level is the fitted value at
    // the segment midpoint, which equals the segment mean.
    const double x_bar = (static_cast<double>(m) - 1.0) / 2.0;
    double y_bar = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) y_bar += standardized(s + i);
    y_bar /= static_cast<double>(m);
    double sxy = 0.0, sxx = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double dx = static_cast<double>(i) - x_bar;
      sxy += dx * (standardized(s + i) - y_bar);
      sxx += dx * dx;
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    word.mean_bin.push_back(bin_of(y_bar, mean_breaks));
    word.slope_bin.push_back(bin_of(slope, slope_breaks));
  }
  return word;
}

Vector sax_embed(const SaxWord& word) {
  Vector out(2 * static_cast<Eigen::Index>(word.length()));
  for (std::size_t i = 0; i < word.length(); ++i) {
    out(2 * static_cast<Eigen::Index>(i)) = static_cast<double>(word.mean_bin[i]);
    out(2 * static_cast<Eigen::Index>(i) + 1) = static_cast<double>(word.slope_bin[i]);
  }
  return out;
}

ClusterModel kmeans(const Matrix& samples, int k, std::uint64_t seed, int max_iter) {
  const auto n = samples.rows();
  if (k < 1) throw Error("kmeans: k must be >= 1");
  if (k > n) throw Error("kmeans: k exceeds the sample count");

  std::mt19937_64 rng(seed);
  ClusterModel model;
  model.k = k;
  model.centroids.resize(k, samples.cols());

  // k-means++ seeding.
  std::uniform_int_distribution<Eigen::Index> uniform_pick(0, n - 1);
  model.centroids.row(0) = samples.row(uniform_pick(rng));
  Vector d2 = (samples.rowwise() - model.centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      for (; pick < n - 1; ++pick) {
        target -= d2(pick);
        if (target <= 0.0) break;
      }
    } else {
      pick = uniform_pick(rng);
    }
    model.centroids.row(c) = samples.row(pick);
    d2 = d2.cwiseMin((samples.rowwise() - model.centroids.row(c)).rowwise().squaredNorm());
  }

  model.assignment.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    // Assignment step (ties to the smaller cluster index).
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (samples.row(i) - model.centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (samples.row(i) - model.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (model.assignment[i] != best) {
        model.assignment[i] = best;
        changed = true;
      }
      inertia += best_d;
    }
    model.inertia_history.push_back(inertia);
    if (!changed && iter > 0) break;

    // Update step; empty clusters restart at the sample farthest from its
    // centroid (strictly lowers the objective).
    Matrix sums = Matrix::Zero(k, samples.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(model.assignment[i]) += samples.row(i);
      ++counts[model.assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        model.centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
      } else {
        Eigen::Index far = 0;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d = (samples.row(i) - model.centroids.row(model.assignment[i])).squaredNorm();
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        model.centroids.row(c) = samples.row(far);
        model.assignment[far] = c;
      }
    }
  }
  return model;
}

double silhouette(const Matrix& samples, std::span<const int> assignment) {
  const auto n = samples.rows();
  if (static_cast<std::size_t>(n) != assignment.size())
    throw Error("silhouette: assignment size mismatch");
  std::set<int> populated(assignment.begin(), assignment.end());
  if (populated.size() < 2) return kNaN;
  const int k = *std::max_element(assignment.begin(), assignment.end()) + 1;

  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (int a : assignment) ++counts[a];

  double acc = 0.0;
  std::vector<double> dist_sum(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (counts[assignment[i]] == 1) continue;  // singleton scores 0
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      dist_sum[assignment[j]] += (samples.row(i) - samples.row(j)).norm();
    }
    const double a = dist_sum[assignment[i]] / static_cast<double>(counts[assignment[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == assignment[i] || counts[c] == 0) continue;
      b = std::min(b, dist_sum[c] / static_cast<double>(counts[c]));
    }
    acc += (b - a) / std::max(a, b);
  }
  return acc / static_cast<double>(n);
}

SilhouetteGrid silhouette_grid(const Matrix& series, const SaxConfig& base,
                               std::span<const int> ks, std::span<const int> segment_lens,
                               std::uint64_t seed) {
  if (ks.empty() || segment_lens.empty()) throw Error("silhouette_grid: empty axis");
  SilhouetteGrid grid;
  grid.ks.assign(ks.begin(), ks.end());
  grid.segment_lens.assign(segment_lens.begin(), segment_lens.end());
  grid.score = Matrix::Constant(static_cast<Eigen::Index>(ks.size()),
                                static_cast<Eigen::Index>(segment_lens.size()), kNaN);

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t li = 0; li < segment_lens.size(); ++li) {
    SaxConfig cfg = base;
    cfg.segment_len = segment_lens[li];
    const auto word0 = sax_encode(standardize(series.row(0).transpose()), cfg);
    Matrix embedded(series.rows(), 2 * static_cast<Eigen::Index>(word0.length()));
    for (Eigen::Index r = 0; r < series.rows(); ++r) {
      const auto word = sax_encode(standardize(series.row(r).transpose()), cfg);
      embedded.row(r) = sax_embed(word).transpose();
    }
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const int k = ks[ki];
      if (k < 2 || k > series.rows()) continue;  // degenerate cell stays NaN
      const auto model =
          kmeans(embedded, k, derive_seed(seed, "grid", ki * 1000 + li));
      const double s = silhouette(embedded, model.assignment);
      grid.score(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(li)) = s;
      if (!std::isnan(s) && s > best) {
        best = s;
        grid.best_k = k;
        grid.best_segment_len = segment_lens[li];
      }
    }
  }
  return grid;
}

CompositionTable composition(std::span<const int> assignment, int k,
                             std::span<const std::string> labels, std::string dimension) {
  if (assignment.size() != labels.size()) throw Error("composition: label size mismatch");
  CompositionTable table;

  std::map<std::string, double> dataset_counts;
  std::vector<std::map<std::string, double>> cluster_counts(static_cast<std::size_t>(k));
  std::vector<double> cluster_totals(static_cast<std::size_t>(k), 0.0);
  double dataset_total = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (labels[i].empty()) {
      ++table.missing_metadata;
      continue;
    }
    if (assignment[i] < 0 || assignment[i] >= k) throw Error("composition: assignment out of range");
    dataset_counts[labels[i]] += 1.0;
    dataset_total += 1.0;
    cluster_counts[assignment[i]][labels[i]] += 1.0;
    cluster_totals[assignment[i]] += 1.0;
  }
  if (dataset_total <= 0.0) throw Error("composition: no labeled samples");

  for (int c = 0; c < k; ++c) {
    for (const auto& [key, dcount] : dataset_counts) {
      CompositionRow row;
      row.cluster = c;
      row.dimension = dimension;
      row.key = key;
      row.dataset_share = dcount / dataset_total;
      const auto it = cluster_counts[c].find(key);
      const double ccount = it == cluster_counts[c].end() ? 0.0 : it->second;
      row.cluster_share = cluster_totals[c] > 0.0 ? ccount / cluster_totals[c] : 0.0;
      row.relative_diff = (row.cluster_share - row.dataset_share) / row.dataset_share;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace txa
