#include "xaistudy/power/power.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "xaistudy/common/error.hpp"
#include "xaistudy/common/rng.hpp"

namespace xaistudy::power {

double cohens_f(std::span<const double> means, double common_sd) {
  if (means.size() < 2) throw ValidationError("cohens_f needs at least two groups");
  if (!(common_sd > 0)) throw ValidationError("common sd must be positive");
  const double k = static_cast<double>(means.size());
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / k;
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return std::sqrt(ss / k) / common_sd;
}

double pooled_binomial_sd(std::span<const double> means) {
  if (means.empty()) throw ValidationError("no group means");
  const double p = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
  if (!(p > 0 && p < 1)) throw ValidationError("grand mean must lie strictly between 0 and 1");
  return std::sqrt(p * (1 - p));
}

double f_critical(double d1, double d2, double alpha) {
  if (!(d1 > 0) || !(d2 > 0)) throw ValidationError("invalid degrees of freedom");
  if (!(alpha > 0 && alpha < 1)) throw ValidationError("alpha must lie in (0, 1)");
  return boost::math::quantile(boost::math::complement(boost::math::fisher_f(d1, d2), alpha));
}

double noncentral_f_sf(double x, double d1, double d2, double lambda, double tolerance) {
  if (!(d1 > 0) || !(d2 > 0)) throw ValidationError("invalid degrees of freedom");
  if (lambda < 0) throw ValidationError("noncentrality must be non-negative");
  if (x <= 0) return 1.0;
  const double y = d1 * x / (d1 * x + d2);
  const double a = d1 / 2, b = d2 / 2;
  const double mu = lambda / 2;
  if (mu == 0) return boost::math::ibetac(a, b, y);

  auto weight = [mu](long j) { return std::exp(-mu + j * std::log(mu) - std::lgamma(j + 1.0)); };
  const long mode = static_cast<long>(std::floor(mu));
  double mass = 0.0, sum = 0.0;
  long up = mode, down = mode - 1;
  // Terms are bounded by 1, so the truncation error is at most 1 - mass.
  while (1.0 - mass > tolerance) {
    const double wu = weight(up);
    mass += wu;
    sum += wu * boost::math::ibetac(a + up, b, y);
    ++up;
    if (down >= 0) {
      const double wd = weight(down);
      mass += wd;
      sum += wd * boost::math::ibetac(a + down, b, y);
      --down;
    }
    if (down < 0 && wu < tolerance * 1e-3 && up > mode + 1) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

double anova_power(double f, int k, int n, double alpha) {
  if (k < 2) throw ValidationError("anova_power needs at least two groups");
  if (n < 2) throw ValidationError("anova_power needs at least two observations per group");
  if (f < 0) throw ValidationError("effect size must be non-negative");
  const double d1 = k - 1.0, d2 = k * (n - 1.0);
  const double crit = f_critical(d1, d2, alpha);
  return noncentral_f_sf(crit, d1, d2, f * f * k * n);
}

SampleSize required_sample_size(double f, int k, double alpha, double target_power) {
  if (!(f > 0)) throw ValidationError("no_finite_n", "effect size 0 never reaches the target power");
  if (!(target_power > 0 && target_power < 1)) throw ValidationError("target power must lie in (0, 1)");
  if (target_power <= alpha)
    throw ValidationError("target power must exceed alpha");
  // Exponential bracket, then bisection; power is increasing in n.
  int lo = 2, hi = 2;
  if (anova_power(f, k, 2, alpha) < target_power) {
    while (anova_power(f, k, hi, alpha) < target_power) {
      lo = hi;
      if (hi > (1 << 29)) throw NumericError("sample size search did not converge");
      hi *= 2;
    }
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      if (anova_power(f, k, mid, alpha) >= target_power) hi = mid;
      else lo = mid;
    }
  }
  SampleSize s;
  s.per_group = hi;
  s.total = hi * k;
  s.power = anova_power(f, k, hi, alpha);
  if (hi > 2) s.power_below = anova_power(f, k, hi - 1, alpha);
  return s;
}

MonteCarloEstimate monte_carlo_power(std::span<const double> means, double sd, int n, double alpha, long simulations,
                                     std::uint64_t seed, unsigned threads) {
  const int k = static_cast<int>(means.size());
  if (k < 2) throw ValidationError("monte_carlo_power needs at least two groups");
  if (n < 2) throw ValidationError("monte_carlo_power needs at least two observations per group");
  if (!(sd > 0)) throw ValidationError("common sd must be positive");
  if (simulations < 1000) throw ValidationError("monte_carlo_power needs at least 1000 simulations");
  const double d1 = k - 1.0, d2 = k * (n - 1.0);
  const double crit = f_critical(d1, d2, alpha);

  constexpr long kBlock = 1000;
  const long blocks = (simulations + kBlock - 1) / kBlock;
  std::vector<long> rejections(static_cast<std::size_t>(blocks), 0);
  std::atomic<long> next{0};
  const std::vector<double> mu(means.begin(), means.end());

  auto worker = [&] {
    std::vector<double> group_mean(static_cast<std::size_t>(k));
    for (long b = next++; b < blocks; b = next++) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
      const long count = std::min(kBlock, simulations - b * kBlock);
      long rejected = 0;
      for (long s = 0; s < count; ++s) {
        double ssw = 0.0, grand = 0.0;
        for (int g = 0; g < k; ++g) {
          // Welford per group.
          double m = 0.0, m2 = 0.0;
          for (int i = 0; i < n; ++i) {
            const double v = rng.normal(mu[static_cast<std::size_t>(g)], sd);
            const double delta = v - m;
            m += delta / (i + 1);
            m2 += delta * (v - m);
          }
          group_mean[static_cast<std::size_t>(g)] = m;
          ssw += m2;
          grand += m;
        }
        grand /= k;
        double ssb = 0.0;
        for (double m : group_mean) ssb += n * (m - grand) * (m - grand);
        const double stat = (ssb / d1) / (ssw / d2);
        if (stat > crit) ++rejected;
      }
      rejections[static_cast<std::size_t>(b)] = rejected;
    }
  };

  unsigned t = threads ? threads : std::max(1U, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<long>(t, blocks));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < t; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const long total = std::accumulate(rejections.begin(), rejections.end(), 0L);
  MonteCarloEstimate e;
  e.simulations = simulations;
  e.power = static_cast<double>(total) / static_cast<double>(simulations);
  e.se = std::sqrt(e.power * (1 - e.power) / static_cast<double>(simulations));
  return e;
}

}  // namespace xaistudy::power
