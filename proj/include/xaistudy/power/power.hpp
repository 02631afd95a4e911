#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace xaistudy::power {

// Published required sample sizes for the two reference datasets. Their
// variance assumptions are not stated, so they are reported, never asserted.
inline constexpr int kReferenceSampleSizeGermanCredit = 154;
inline constexpr int kReferenceSampleSizeRcdv = 22395;

// Truncation tolerance of the noncentral F series.
inline constexpr double kSeriesTolerance = 1e-10;

// f = sd_between / common_sd with sd_between = sqrt(sum (mu_i - mu)^2 / k).
double cohens_f(std::span<const double> group_means, double common_sd);

// sqrt(p (1 - p)) at the grand mean of a set of accuracy proportions.
double pooled_binomial_sd(std::span<const double> group_means);

// Upper-alpha quantile of the central F(d1, d2).
double f_critical(double d1, double d2, double alpha);

// P(F' > x) for noncentral F(d1, d2, lambda): a Poisson mixture of
// regularized incomplete beta terms, summed outward from the Poisson mode
// until the untouched mass falls below `tolerance`.
double noncentral_f_sf(double x, double d1, double d2, double lambda, double tolerance = kSeriesTolerance);

// One-way ANOVA power, k groups of n, lambda = f^2 k n.
double anova_power(double f, int k_groups, int n_per_group, double alpha);

struct SampleSize {
  int per_group = 0;
  int total = 0;
  double power = 0.0;
  // Power at per_group - 1 (absent when that design is not valid).
  std::optional<double> power_below;
};

// Smallest n per group reaching target power; total = k n.
SampleSize required_sample_size(double f, int k_groups, double alpha, double target_power);

struct MonteCarloEstimate {
  double power = 0.0;
  double se = 0.0;
  long simulations = 0;
};

// Simulates normal groups and counts F-test rejections. Simulations run in
// blocks with per-block derived seeds, so the estimate depends on the seed
// but not on `threads` (0 = hardware concurrency).
MonteCarloEstimate monte_carlo_power(std::span<const double> group_means, double common_sd, int n_per_group,
                                     double alpha, long simulations, std::uint64_t seed, unsigned threads = 0);

}  // namespace xaistudy::power
