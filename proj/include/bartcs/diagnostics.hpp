#pragma once

#include <span>
#include <string>
#include <vector>

#include "bartcs/chain.hpp"
#include "bartcs/random.hpp"

namespace bartcs {

enum class PipSelector { Exposure, Outcome, Any };

PipSelector parse_pip_selector(std::string_view text);

// Fraction of retained draws in which each covariate has at least one split
// in the selected model(s).
struct InclusionReport {
  std::vector<std::string> names;
  std::vector<double> exposure;
  std::vector<double> outcome;
  std::vector<double> any;
  // Marginal scheme: the exposure's own inclusion in the outcome model.
  double exposure_variable = kAbsent;

  const std::vector<double>& select(PipSelector selector) const;
};

InclusionReport pip(const Trace& trace);
std::vector<double> pip(const Trace& trace, PipSelector selector);

struct ClassDecomposition {
  double fraction_R_cap = 0.0;
  double fraction_R_star = 0.0;
};

// A draw is in R_cap when every covariate of x_cap is split on in the outcome
// model(s), and in R_star when every covariate of x_star is. x_cap must be a
// subset of x_star.
ClassDecomposition class_decomposition(const Trace& trace, std::span<const int> x_cap,
                                       std::span<const int> x_star);

// Classic potential scale reduction factor; +infinity when every chain is
// constant.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

// k replicated outcome vectors, each from a uniformly chosen retained draw:
// the draw's fit at the observed exposure plus Normal noise with the draw's
// (arm-specific) variance.
std::vector<std::vector<double>> posterior_predictive(const Trace& trace, const Dataset& data,
                                                      std::size_t k, Rng& rng);

}  // namespace bartcs
