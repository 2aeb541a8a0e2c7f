#pragma once

#include "txa/stats.hpp"
#include "txa/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace txa {

/// Zero-mean unit-variance scaling (population variance). Throws on series
/// shorter than 2 or with zero variance.
Vector standardize(const Vector& series);

/// Last-observation-carried-forward fill for NaN gaps; leading NaNs take the
/// first observed value. Throws when the series has no observed value.
Vector impute_locf(const Vector& series);

/// Fraction of non-NaN entries.
double coverage(const Vector& series);

struct SaxConfig {
  int segment_len = 15;
  int mean_levels = 4;   // quantized by standard-normal breakpoints
  int slope_levels = 2;  // quantized by N(0, slope_var_scale / segment_len)
  double slope_var_scale = 0.03;
  int alphabet_size() const { return mean_levels * slope_levels; }
};

/// Piecewise-linear symbolic word: per segment the least-squares line's
/// level (= segment mean) and slope, each quantized into its level grid.
/// Words have ceil(T / segment_len) symbols; a trailing segment shorter than
/// segment_len is encoded as-is and flagged.
struct SaxWord {
  std::vector<int> mean_bin;   // 0 .. mean_levels-1
  std::vector<int> slope_bin;  // 0 .. slope_levels-1
  bool has_short_segment = false;
  SaxConfig config;

  std::size_t length() const { return mean_bin.size(); }
};

SaxWord sax_encode(const Vector& standardized, const SaxConfig& config = {});

/// Numeric embedding for clustering: interleaved (mean_bin, slope_bin) pairs
/// as doubles, 2 * word length components.
Vector sax_embed(const SaxWord& word);

// ----- k-means -----

struct ClusterModel {
  int k = 0;
  Matrix centroids;                      // k x dim
  std::vector<int> assignment;           // per sample, 0..k-1
  std::vector<double> inertia_history;   // per Lloyd iteration, non-increasing
  double inertia() const { return inertia_history.empty() ? 0.0 : inertia_history.back(); }
};

/// Seeded k-means++ with Lloyd iterations (Euclidean). Empty clusters are
/// reseeded to the farthest sample. Deterministic for a given seed. Throws
/// when k < 1 or k > n_samples.
ClusterModel kmeans(const Matrix& samples, int k, std::uint64_t seed, int max_iter = 100);

/// Mean silhouette over all samples (singleton clusters score 0); NaN when
/// fewer than two distinct clusters are populated.
double silhouette(const Matrix& samples, std::span<const int> assignment);

// ----- model selection -----

struct SilhouetteGrid {
  std::vector<int> ks;
  std::vector<int> segment_lens;
  Matrix score;  // ks.size() x segment_lens.size(), NaN for degenerate cells
  int best_k = 0;
  int best_segment_len = 0;
};

/// Re-encodes the (already imputed, unstandardized) series at every segment
/// length, clusters at every k, and reports mean silhouettes with the argmax
/// cell. Rows of `series` are individual trajectories.
SilhouetteGrid silhouette_grid(const Matrix& series, const SaxConfig& base,
                               std::span<const int> ks, std::span<const int> segment_lens,
                               std::uint64_t seed);

// ----- cluster composition -----

struct CompositionRow {
  int cluster = 0;
  std::string dimension;  // "category" or "district"
  std::string key;
  double cluster_share = 0.0;
  double dataset_share = 0.0;
  double relative_diff = 0.0;  // (cluster - dataset) / dataset
};

struct CompositionTable {
  std::vector<CompositionRow> rows;
  std::uint64_t missing_metadata = 0;  // samples skipped for lacking labels
};

/// Per-cluster composition along one labeled dimension. `labels` aligns with
/// the clustered samples; empty labels are excluded and counted.
CompositionTable composition(std::span<const int> assignment, int k,
                             std::span<const std::string> labels, std::string dimension);

}  // namespace txa
