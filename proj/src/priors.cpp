#include "bartcs/priors.hpp"

#include <cmath>
#include <limits>

namespace bartcs {

LeafPrior calibrate_leaf_prior(double y_min, double y_max, int num_trees, double k) {
  if (!(y_max > y_min)) throw Error(ErrorCode::ConstantOutcome, "outcome range is empty");
  if (num_trees < 1) throw Error(ErrorCode::InvalidConfig, "number of trees must be at least 1");
  LeafPrior prior;
  prior.mean_total = 0.5 * (y_min + y_max);
  prior.sigma_mu = (y_max - y_min) / (2.0 * k * std::sqrt(static_cast<double>(num_trees)));
  prior.num_trees = num_trees;
  return prior;
}

NormalParams leaf_posterior_params(double residual_sum, std::size_t n, double sigma2,
                                   const LeafPrior& prior) {
  const double prior_prec = 1.0 / prior.leaf_var();
  const double prec = prior_prec + static_cast<double>(n) / sigma2;
  return {(prior.leaf_mean() * prior_prec + residual_sum / sigma2) / prec, 1.0 / prec};
}

InverseGammaParams sigma2_posterior_params(std::span<const double> residuals, double a_sigma,
                                           double b_sigma) {
  double ssr = 0.0;
  for (double r : residuals) ssr += r * r;
  return {a_sigma + 0.5 * static_cast<double>(residuals.size()), b_sigma + 0.5 * ssr};
}

SplitProbVector SplitProbVector::uniform(std::size_t size) {
  return from_log(std::vector<double>(size, -std::log(static_cast<double>(size))));
}

SplitProbVector SplitProbVector::from_log(std::vector<double> log_probs) {
  SplitProbVector s;
  s.probs.resize(log_probs.size());
  for (std::size_t j = 0; j < log_probs.size(); ++j) s.probs[j] = std::exp(log_probs[j]);
  s.log_probs = std::move(log_probs);
  return s;
}

SplitProbVector SplitProbVector::without_exposure() const {
  std::span<const double> rest(log_probs.data() + 1, log_probs.size() - 1);
  const double log_rest = log_sum_exp(rest);
  if (!std::isfinite(log_rest)) {
    throw Error(ErrorCode::DegenerateSimplex, "covariate selection mass underflowed");
  }
  std::vector<double> out(rest.begin(), rest.end());
  for (double& v : out) v -= log_rest;
  return from_log(std::move(out));
}

namespace {

double covariate_concentration(const SplitCounts& counts, std::size_t j, double alpha) {
  const double p = static_cast<double>(counts.exposure.size());
  return alpha / p + static_cast<double>(counts.exposure[j]) + static_cast<double>(counts.outcome[j]);
}

}  // namespace

SplitProbVector update_s_separate(const SplitCounts& counts, double alpha, Rng& rng) {
  std::vector<double> conc(counts.exposure.size());
  for (std::size_t j = 0; j < conc.size(); ++j) conc[j] = covariate_concentration(counts, j, alpha);
  return SplitProbVector::from_log(log_dirichlet(rng, conc));
}

std::vector<DirichletMoment> dirichlet_moments(const SplitCounts& counts, double alpha) {
  const std::size_t p = counts.exposure.size();
  std::vector<double> conc(p);
  double total = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    conc[j] = covariate_concentration(counts, j, alpha);
    total += conc[j];
  }
  std::vector<DirichletMoment> out(p);
  for (std::size_t j = 0; j < p; ++j) {
    out[j].mean = conc[j] / total;
    out[j].var = conc[j] * (total - conc[j]) / (total * total * (total + 1.0));
  }
  return out;
}

double marginal_log_acceptance(const SplitProbVector& current, const SplitProbVector& proposed,
                               long total_exposure_splits, double c) {
  auto log_rest = [](const SplitProbVector& s) {
    const double v = log_sum_exp(std::span<const double>(s.log_probs.data() + 1, s.log_probs.size() - 1));
    if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateSimplex, "1 - s0 underflowed");
    return v;
  };
  const double rest_cur = log_rest(current);
  const double rest_new = log_rest(proposed);
  double log_r = 0.0;
  if (total_exposure_splits != 0) log_r += static_cast<double>(total_exposure_splits) * (rest_cur - rest_new);
  if (c != 0.0) log_r += c * (current.log_probs[0] - proposed.log_probs[0]);
  return log_r;
}

MarginalUpdate update_s_marginal(const SplitCounts& counts, double alpha, double c,
                                 const SplitProbVector& current, Rng& rng) {
  const std::size_t p = counts.exposure.size();
  std::vector<double> conc(p + 1);
  conc[0] = static_cast<double>(counts.exposure_in_outcome) + c + alpha / static_cast<double>(p);
  for (std::size_t j = 0; j < p; ++j) conc[j + 1] = covariate_concentration(counts, j, alpha);
  SplitProbVector proposed = SplitProbVector::from_log(log_dirichlet(rng, conc));

  long m_total = 0;
  for (long m : counts.exposure) m_total += m;

  const double log_u = std::log(rng.uniform());
  MarginalUpdate out;
  double log_r = 0.0;
  try {
    log_r = marginal_log_acceptance(current, proposed, m_total, c);
  } catch (const Error&) {
    out.s = current;
    out.degenerate = true;
    return out;
  }
  out.accepted = log_u < log_r;
  out.s = out.accepted ? std::move(proposed) : current;
  return out;
}

double alpha_log_target(double alpha, std::span<const double> log_s, std::size_t num_covariates,
                        double a0, double b0) {
  const double p = static_cast<double>(num_covariates);
  const double k = static_cast<double>(log_s.size());
  const double conc = alpha / p;
  double sum_log = 0.0;
  for (double v : log_s) sum_log += v;
  const double dirichlet = std::lgamma(k * conc) - k * std::lgamma(conc) + (conc - 1.0) * sum_log;
  const double prior = (a0 - 1.0) * std::log(alpha) - (a0 + b0) * std::log(alpha + p);
  return dirichlet + prior;
}

double alpha_mh_step(double alpha, double log_step, double log_u, std::span<const double> log_s,
                     std::size_t num_covariates, double a0, double b0) {
  const double proposed = alpha * std::exp(log_step);
  if (!(proposed > 0.0) || !std::isfinite(proposed)) return alpha;
  const double log_r = alpha_log_target(proposed, log_s, num_covariates, a0, b0) -
                       alpha_log_target(alpha, log_s, num_covariates, a0, b0) + log_step;
  return log_u < log_r ? proposed : alpha;
}

double update_alpha(const SplitProbVector& s, double alpha, std::size_t num_covariates, double a0,
                    double b0, double step_sd, Rng& rng) {
  const double log_step = rng.normal(0.0, step_sd);
  const double log_u = std::log(rng.uniform());
  return alpha_mh_step(alpha, log_step, log_u, s.log_probs, num_covariates, a0, b0);
}

void probit_latent_update(std::span<const double> a, std::span<const double> fitted,
                          std::span<double> z, Rng& rng) {
  for (std::size_t i = 0; i < a.size(); ++i) z[i] = rng.truncated_normal(fitted[i], a[i] == 1.0);
}

}  // namespace bartcs
