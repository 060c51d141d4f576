#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bartcs/chain.hpp"
#include "bartcs/core_data.hpp"
#include "bartcs/estimands.hpp"

namespace bartcs {

enum class ScenarioId { S1, S2, S3, S4, S5, S6, S_PgtN, S_Targeted };

std::string to_string(ScenarioId id);
ScenarioId parse_scenario(std::string_view text);

struct ScenarioSpec {
  ScenarioId id = ScenarioId::S2;
  std::size_t n = 300;
  std::size_t p = 100;
  std::uint64_t seed = 1;
};

// Standard sample size and dimension of a scenario.
ScenarioSpec default_spec(ScenarioId id, std::uint64_t seed = 1);

struct SimulatedData {
  Dataset data;
  double true_effect = 0.0;
  int attempts = 1;  // > 1 when single-arm draws were regenerated
};

SimulatedData gen_scenario(const ScenarioSpec& spec);

// Closed-form average treatment effect of a scenario.
double true_effect(ScenarioId id);

struct MonteCarloEffect {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Average of the scenario's treatment terms over draws of the covariates.
MonteCarloEffect true_effect_monte_carlo(ScenarioId id, std::size_t draws, std::uint64_t seed);

struct ReplicateMetrics {
  int replicate = 0;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double truth = 0.0;
  double error = 0.0;  // estimate - truth
  double sq_error = 0.0;
  bool covered = false;
  double wall_time_s = 0.0;
};

struct SimulationResult {
  ScenarioId scenario = ScenarioId::S2;
  Scheme scheme = Scheme::Marginal;
  int m = 0;
  double bias = 0.0;
  double mse = 0.0;
  double coverage = 0.0;
  double wall_time_s = 0.0;
  std::vector<ReplicateMetrics> replicates;
};

using Estimator = std::function<EffectSummary(const Dataset&, const ChainConfig&)>;

// Posterior ATE from run_chains under the given hyperparameters.
Estimator bart_estimator(const Hyperparams& hp);

// m replicates: replicate r draws data with seed derive_seed(master, 2r) and
// runs the estimator with chain seed derive_seed(master, 2r + 1).
SimulationResult run_replicates(const ScenarioSpec& spec, int m, const ChainConfig& config,
                                const Estimator& estimator);

SimulationResult aggregate_metrics(ScenarioId scenario, Scheme scheme,
                                   std::vector<ReplicateMetrics> replicates);

}  // namespace bartcs
