#pragma once

#include <span>
#include <vector>

#include "bartcs/chain.hpp"

namespace bartcs {

struct EffectSummary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> draws;
};

// Mean and equal-tailed 95% interval of per-draw values. The endpoints are
// order statistics: sorted[floor(0.025 (R-1))] and sorted[ceil(0.975 (R-1))].
EffectSummary summarize_draws(std::vector<double> draws);

// Per-draw average of fit_treated - fit_control over all units.
EffectSummary ate_separate(const Trace& trace);
EffectSummary ate_marginal(const Trace& trace);
// Either scheme; pools the draws of every chain.
EffectSummary ate(std::span<const Trace> traces);

struct ContrastOptions {
  bool allow_out_of_support = false;
};

// Delta(a, a') per draw over the rows of x (covariates only).
EffectSummary contrast_continuous(const Trace& trace, const Matrix& x, double a, double a_prime,
                                  ContrastOptions options = {});

// Posterior of the covariate-averaged outcome E[Y(a)] at every grid point.
std::vector<EffectSummary> exposure_response(const Trace& trace, const Matrix& x,
                                             std::span<const double> grid,
                                             ContrastOptions options = {});

// Records of several chains of the same run, in chain order.
Trace merge_traces(std::span<const Trace> traces);

}  // namespace bartcs
