#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace bartcs {

// Seeded generator owned by exactly one chain. Every draw in the sampler goes
// through this type so a chain is reproducible from its seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1); safe to take the log of.
  double uniform() noexcept {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal_(engine_); }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  double gamma(double shape, double scale = 1.0) {
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }

  // log of a Gamma(shape, 1) variate, accurate for shapes far below 1 where
  // the variate itself underflows.
  double log_gamma(double shape);

  // Draw from Inverse-Gamma with density proportional to x^{-shape-1} e^{-rate/x}.
  double inverse_gamma(double shape, double rate) { return rate / gamma(shape, 1.0); }

  // N(mean, 1) truncated to (0, inf) when `positive`, to (-inf, 0] otherwise.
  double truncated_normal(double mean, bool positive);

  // Index drawn with probability proportional to weights[i]. Requires a
  // positive total.
  std::size_t categorical(std::span<const double> weights);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};

  // Standard normal conditioned on z > lower.
  double lower_truncated_standard_normal(double lower);
};

// Log-space Dirichlet draw: returns log of the simplex coordinates, so tiny
// concentrations do not collapse to exact zeros.
std::vector<double> log_dirichlet(Rng& rng, std::span<const double> concentration);

// Seed for stream `index` derived from `master` with a SplitMix64 step.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

double normal_cdf(double x) noexcept;

// log(sum(exp(values))) without overflow.
double log_sum_exp(std::span<const double> values) noexcept;

}  // namespace bartcs
