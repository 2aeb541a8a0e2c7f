#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string_view>

namespace txa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ----- summary statistics -----

double mean(std::span<const double> v);

/// Standard deviation with `ddof` delta degrees of freedom (1 = sample).
double stddev(std::span<const double> v, int ddof = 1);

/// Order statistic at fraction p in [0,1], linearly interpolated between
/// neighbouring sorted values (the "linear" convention: rank p*(n-1)).
/// The input is copied and sorted; throws on empty input.
double percentile(std::span<const double> v, double p);

// ----- normal distribution -----

/// Standard normal CDF.
double norm_cdf(double z);

/// Inverse standard normal CDF. Rational approximation refined with a
/// Halley step; accurate to ~1e-14 over (0,1). Throws outside (0,1).
double norm_quantile(double p);

// ----- Kolmogorov-Smirnov -----

/// Survival function of the Kolmogorov distribution,
/// Q(lambda) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

struct KsResult {
  double d = 0.0;        // sup-norm distance between the CDFs
  double p_value = 1.0;  // asymptotic
};

/// One-sample KS test of `sample` against N(mu, sigma).
KsResult ks_test_normal(std::span<const double> sample, double mu, double sigma);

/// Two-sample KS test with the effective-sample-size asymptotic p-value.
KsResult ks_test_two_sample(std::span<const double> a, std::span<const double> b);

// ----- deterministic seeding -----

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);

/// Stable sub-stream seed: mixes a master seed with a role tag and an index
/// so that parallel partitions draw from independent, order-free streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index = 0);

}  // namespace txa
