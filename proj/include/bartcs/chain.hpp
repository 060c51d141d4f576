#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bartcs/backfit.hpp"
#include "bartcs/core_data.hpp"
#include "bartcs/priors.hpp"
#include "bartcs/tree.hpp"

namespace bartcs {

inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

// One retained posterior draw.
struct TraceRecord {
  long iteration = 0;
  std::vector<long> exposure_counts;  // over the P covariates
  // Marginal: over (exposure, covariates). Separate: empty.
  std::vector<long> outcome_counts;
  // Separate: per-arm counts over the P covariates. Marginal: empty.
  std::vector<long> outcome0_counts;
  std::vector<long> outcome1_counts;
  // Binary exposure: outcome fits of every unit under a = 1 and a = 0.
  std::vector<double> fit_treated;
  std::vector<double> fit_control;
  // Continuous exposure: the outcome forest, exposure is variable 0.
  std::vector<CompactTree> forest;
  double sigma2 = kAbsent;    // marginal outcome model
  double sigma2_0 = kAbsent;  // separate, control arm
  double sigma2_1 = kAbsent;  // separate, treated arm
  double tau2 = kAbsent;      // continuous exposure model
  double alpha = 0.0;
  std::vector<double> s;
  double ate = kAbsent;  // binary exposure only

  // Outcome-model split counts over the P covariates, summed over arms.
  std::vector<long> outcome_covariate_counts() const;
  // Splits on the exposure in the outcome model (marginal scheme), else 0.
  long exposure_in_outcome() const;
};

struct Trace {
  Scheme scheme = Scheme::Marginal;
  ExposureKind exposure_kind = ExposureKind::Binary;
  std::vector<std::string> names;
  std::size_t n = 0;
  double exposure_min = 0.0;
  double exposure_max = 0.0;
  int chain = 0;
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  SweepLog moves;
  long s_proposed = 0;
  long s_accepted = 0;
  long s_degenerate = 0;

  std::size_t p() const noexcept { return names.size(); }
};

// True when iteration t (1-based) is kept under the schedule.
bool is_retained(long t, const ChainConfig& config) noexcept;

// Runs one chain seeded with derive_seed(config.seed, chain_index).
Trace run_chain(const Dataset& data, const Hyperparams& hp, const ChainConfig& config,
                int chain_index = 0);

// config.n_chains independent chains, run on up to BARTCS_THREADS threads.
std::vector<Trace> run_chains(const Dataset& data, const Hyperparams& hp, const ChainConfig& config);

// Outcome forest evaluated on every row of x with the exposure coordinate
// (variable 0) replaced by a_value.
std::vector<double> counterfactual_fits_marginal(std::span<const Tree> forest, const Matrix& x,
                                                 double a_value);
std::vector<double> counterfactual_fits_marginal(std::span<const CompactTree> forest,
                                                 const Matrix& x, double a_value);

struct ExposureInclusion {
  long n0 = 0;
  double s0 = 0.0;
  bool flagged = false;  // the outcome model does not split on the exposure
};

ExposureInclusion exposure_inclusion_guard(const TraceRecord& record);

}  // namespace bartcs
