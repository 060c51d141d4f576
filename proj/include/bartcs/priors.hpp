#pragma once

#include <span>
#include <vector>

#include "bartcs/core_data.hpp"
#include "bartcs/random.hpp"

namespace bartcs {

// Normal(mean_total / num_trees, sigma_mu^2) on every leaf, so the sum of
// num_trees leaves has prior mean mean_total and +-k sd range [y_min, y_max].
struct LeafPrior {
  double mean_total = 0.0;
  double sigma_mu = 1.0;
  int num_trees = 1;

  double leaf_mean() const noexcept { return mean_total / num_trees; }
  double leaf_var() const noexcept { return sigma_mu * sigma_mu; }
};

LeafPrior calibrate_leaf_prior(double y_min, double y_max, int num_trees, double k = 2.0);

struct NormalParams {
  double mean = 0.0;
  double var = 1.0;
};

// Conjugate posterior of one leaf given the sum and count of the partial
// residuals that fall in it.
NormalParams leaf_posterior_params(double residual_sum, std::size_t n, double sigma2,
                                   const LeafPrior& prior);

struct InverseGammaParams {
  double shape = 1.0;
  double rate = 1.0;
};

InverseGammaParams sigma2_posterior_params(std::span<const double> residuals, double a_sigma,
                                           double b_sigma);

// Selection probabilities over split variables. Under the marginal scheme
// entry 0 is the exposure and entries 1..P the covariates. `log_probs`
// carries the exact draw; `probs` is its exponent.
struct SplitProbVector {
  std::vector<double> probs;
  std::vector<double> log_probs;

  static SplitProbVector uniform(std::size_t size);
  static SplitProbVector from_log(std::vector<double> log_probs);
  std::size_t size() const noexcept { return probs.size(); }

  // Covariate probabilities s_j / (1 - s_0) seen by the marginal exposure
  // model. Throws DegenerateSimplex when 1 - s_0 underflows.
  SplitProbVector without_exposure() const;
};

// Split counts feeding the simplex update, all over the P covariates.
struct SplitCounts {
  std::vector<long> exposure;     // m_j, exposure model
  std::vector<long> outcome;      // n_j, outcome model(s) summed over arms
  long exposure_in_outcome = 0;   // n_0, exposure splits in the marginal outcome model
};

// Dirichlet(alpha/P + m_j + n_j), P = number of covariates.
SplitProbVector update_s_separate(const SplitCounts& counts, double alpha, Rng& rng);

struct DirichletMoment {
  double mean = 0.0;
  double var = 0.0;
};

std::vector<DirichletMoment> dirichlet_moments(const SplitCounts& counts, double alpha);

// log of ((1 - s0)/(1 - s0_new))^M (s0/s0_new)^c. Throws DegenerateSimplex
// when either 1 - s0 underflows.
double marginal_log_acceptance(const SplitProbVector& current, const SplitProbVector& proposed,
                               long total_exposure_splits, double c);

struct MarginalUpdate {
  SplitProbVector s;
  bool accepted = false;
  bool degenerate = false;
};

// Independence Metropolis-Hastings step on the P+1 simplex with proposal
// Dirichlet(n_0 + c + alpha/P, m_j + n_j + alpha/P).
MarginalUpdate update_s_marginal(const SplitCounts& counts, double alpha, double c,
                                 const SplitProbVector& current, Rng& rng);

// Unnormalized log posterior of alpha given s: a symmetric Dirichlet with
// concentration alpha/P on each of the |s| coordinates, and
// alpha/(alpha + P) ~ Beta(a0, b0).
double alpha_log_target(double alpha, std::span<const double> log_s, std::size_t num_covariates,
                        double a0, double b0);

// One random-walk step on log(alpha) with a given increment and log-uniform.
double alpha_mh_step(double alpha, double log_step, double log_u, std::span<const double> log_s,
                     std::size_t num_covariates, double a0, double b0);

double update_alpha(const SplitProbVector& s, double alpha, std::size_t num_covariates, double a0,
                    double b0, double step_sd, Rng& rng);

// Z_i ~ N(fitted_i, 1) truncated to (0, inf) when a_i = 1 and (-inf, 0] when 0.
void probit_latent_update(std::span<const double> a, std::span<const double> fitted,
                          std::span<double> z, Rng& rng);

}  // namespace bartcs
