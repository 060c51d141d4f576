#include "bartcs/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bartcs {

double Rng::log_gamma(double shape) {
  if (shape >= 1.0) return std::log(gamma(shape));
  // G(a) = G(a + 1) * U^{1/a}
  return std::log(gamma(shape + 1.0)) + std::log(uniform()) / shape;
}

double Rng::lower_truncated_standard_normal(double lower) {
  if (lower < 0.45) {
    for (;;) {
      double z = normal();
      if (z > lower) return z;
    }
  }
  // Exponential rejection sampler (Robert 1995) for the far tail.
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    double z = lower - std::log(uniform()) / rate;
    double d = z - rate;
    if (std::log(uniform()) <= -0.5 * d * d) return z;
  }
}

double Rng::truncated_normal(double mean, bool positive) {
  if (positive) return mean + lower_truncated_standard_normal(-mean);
  return mean - lower_truncated_standard_normal(mean);
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

std::vector<double> log_dirichlet(Rng& rng, std::span<const double> concentration) {
  std::vector<double> logs(concentration.size());
  for (std::size_t j = 0; j < concentration.size(); ++j) logs[j] = rng.log_gamma(concentration[j]);
  const double norm = log_sum_exp(logs);
  for (double& v : logs) v -= norm;
  return logs;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_sum_exp(std::span<const double> values) noexcept {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double peak = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

}  // namespace bartcs
