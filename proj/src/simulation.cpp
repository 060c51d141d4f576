#include "bartcs/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "bartcs/random.hpp"

namespace bartcs {

namespace {

double h1(double x) { return x < 0.0 ? -1.0 : 1.0; }
double h2(double x) { return x >= 0.0 ? -1.0 : 1.0; }

// Covariates are stored 0-based; X_k of the displays is column k - 1.
struct Row {
  const Matrix& x;
  std::size_t i;
  double operator[](int k) const { return x(i, static_cast<std::size_t>(k - 1)); }
};

double exposure_index(ScenarioId id, const Row& x) {
  if (id == ScenarioId::S_Targeted) return x[1] < x[2] ? 1.0 : (x[1] > x[2] ? -1.0 : 0.0);
  double eta = 0.5 + 0.5 * h1(x[1]) + 0.5 * h2(x[2]) - 0.5 * std::abs(x[3] - 1.0) + 1.5 * x[4] * x[5];
  if (id == ScenarioId::S3) eta += 1.5 * x[6] - x[7];
  return eta;
}

double extra_predictors(const Row& x) {
  return x[8] + x[9] + x[10] + 0.5 * (x[11] + x[12] + x[13]) - 0.5 * (x[14] + x[15] + x[16]) -
         std::exp(0.2 * x[17]);
}

double outcome_mean(ScenarioId id, const Row& x, double a) {
  switch (id) {
    case ScenarioId::S2:
    case ScenarioId::S3:
    case ScenarioId::S_PgtN:
      return h1(x[1]) + 1.5 * h2(x[2]) - a + 2.0 * std::abs(x[3] + 1.0) + 2.0 * x[4] +
             std::exp(0.5 * x[5]) - 0.5 * a * std::abs(x[5]);
    case ScenarioId::S1:
    case ScenarioId::S4:
    case ScenarioId::S5: {
      double mu = h1(x[1]) + 1.5 * h2(x[2]) - a + 2.0 * std::abs(x[3] + 1.0) + 2.0 * x[4] +
                  std::exp(0.5 * x[5]) - 0.5 * a * std::abs(x[6]) - a * std::abs(x[7] + 1.0);
      if (id != ScenarioId::S1) mu += extra_predictors(x);
      return mu;
    }
    case ScenarioId::S6:
      return 0.5 * h1(x[1]) + 0.5 * h2(x[2]) - a + 0.5 * std::abs(x[3] + 1.0) + 0.3 * x[4] +
             std::exp(0.5 * x[5]) - 0.5 * a * std::abs(x[6]) - a * std::abs(x[7] + 1.0) +
             extra_predictors(x);
    case ScenarioId::S_Targeted: {
      const double mu = x[1] < x[2] ? 1.0 : (x[1] > x[2] ? -1.0 : 0.0);
      return mu - a;
    }
  }
  return 0.0;
}

double noise_sd(ScenarioId id) { return id == ScenarioId::S_Targeted ? 1.0 : 0.3; }

std::size_t min_covariates(ScenarioId id) {
  switch (id) {
    case ScenarioId::S1:
    case ScenarioId::S3: return 7;
    case ScenarioId::S4:
    case ScenarioId::S5:
    case ScenarioId::S6: return 17;
    case ScenarioId::S_Targeted: return 2;
    default: return 5;
  }
}

}  // namespace

std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::S1: return "S1";
    case ScenarioId::S2: return "S2";
    case ScenarioId::S3: return "S3";
    case ScenarioId::S4: return "S4";
    case ScenarioId::S5: return "S5";
    case ScenarioId::S6: return "S6";
    case ScenarioId::S_PgtN: return "S_PgtN";
    case ScenarioId::S_Targeted: return "S_Targeted";
  }
  return "unknown";
}

ScenarioId parse_scenario(std::string_view text) {
  for (ScenarioId id : {ScenarioId::S1, ScenarioId::S2, ScenarioId::S3, ScenarioId::S4, ScenarioId::S5,
                        ScenarioId::S6, ScenarioId::S_PgtN, ScenarioId::S_Targeted}) {
    if (to_string(id) == text) return id;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown scenario '" + std::string(text) + "'");
}

ScenarioSpec default_spec(ScenarioId id, std::uint64_t seed) {
  ScenarioSpec spec;
  spec.id = id;
  spec.seed = seed;
  spec.p = 100;
  switch (id) {
    case ScenarioId::S5: spec.n = 500; break;
    case ScenarioId::S_PgtN: spec.n = 60; break;
    case ScenarioId::S_Targeted: spec.n = 250; break;
    default: spec.n = 300; break;
  }
  return spec;
}

SimulatedData gen_scenario(const ScenarioSpec& spec) {
  if (spec.p < min_covariates(spec.id)) {
    throw Error(ErrorCode::InvalidConfig, to_string(spec.id) + " needs at least " +
                                              std::to_string(min_covariates(spec.id)) + " covariates");
  }
  if (spec.n < 2) throw Error(ErrorCode::InvalidConfig, "scenario needs at least two rows");
  std::vector<std::string> names(spec.p);
  for (std::size_t j = 0; j < spec.p; ++j) names[j] = "X" + std::to_string(j + 1);

  for (int attempt = 0;; ++attempt) {
    Rng rng(attempt == 0 ? spec.seed : derive_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
    Matrix x(spec.n, spec.p);
    for (std::size_t j = 0; j < spec.p; ++j) {
      for (std::size_t i = 0; i < spec.n; ++i) x(i, j) = rng.normal();
    }
    std::vector<double> a(spec.n);
    std::vector<double> y(spec.n);
    long treated = 0;
    for (std::size_t i = 0; i < spec.n; ++i) {
      const Row row{x, i};
      a[i] = rng.uniform() < normal_cdf(exposure_index(spec.id, row)) ? 1.0 : 0.0;
      treated += a[i] == 1.0;
    }
    for (std::size_t i = 0; i < spec.n; ++i) {
      y[i] = outcome_mean(spec.id, Row{x, i}, a[i]) + noise_sd(spec.id) * rng.normal();
    }
    if (treated == 0 || treated == static_cast<long>(spec.n)) continue;
    return {Dataset(std::move(y), std::move(a), std::move(x), names, ExposureKind::Binary),
            true_effect(spec.id), attempt + 1};
  }
}

double true_effect(ScenarioId id) {
  using std::numbers::pi;
  const double abs_x = std::sqrt(2.0 / pi);
  const double abs_x_plus_1 = std::sqrt(2.0 / pi) * std::exp(-0.5) + (1.0 - 2.0 * normal_cdf(-1.0));
  switch (id) {
    case ScenarioId::S2:
    case ScenarioId::S3:
    case ScenarioId::S_PgtN: return -1.0 - 0.5 * abs_x;
    case ScenarioId::S_Targeted: return -1.0;
    default: return -1.0 - 0.5 * abs_x - abs_x_plus_1;
  }
}

MonteCarloEffect true_effect_monte_carlo(ScenarioId id, std::size_t draws, std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < draws; ++r) {
    double effect = -1.0;
    switch (id) {
      case ScenarioId::S2:
      case ScenarioId::S3:
      case ScenarioId::S_PgtN: effect -= 0.5 * std::abs(rng.normal()); break;
      case ScenarioId::S_Targeted: break;
      default: {
        const double x6 = rng.normal();
        const double x7 = rng.normal();
        effect -= 0.5 * std::abs(x6) + std::abs(x7 + 1.0);
      }
    }
    sum += effect;
    sum_sq += effect * effect;
  }
  const double nd = static_cast<double>(draws);
  const double mean = sum / nd;
  const double var = std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0));
  return {mean, std::sqrt(var / nd)};
}

Estimator bart_estimator(const Hyperparams& hp) {
  return [hp](const Dataset& data, const ChainConfig& config) {
    const std::vector<Trace> traces = run_chains(data, hp, config);
    return ate(traces);
  };
}

SimulationResult aggregate_metrics(ScenarioId scenario, Scheme scheme,
                                   std::vector<ReplicateMetrics> replicates) {
  SimulationResult out;
  out.scenario = scenario;
  out.scheme = scheme;
  out.m = static_cast<int>(replicates.size());
  for (const ReplicateMetrics& r : replicates) {
    out.bias += r.error;
    out.mse += r.sq_error;
    out.coverage += r.covered ? 1.0 : 0.0;
    out.wall_time_s += r.wall_time_s;
  }
  if (out.m > 0) {
    out.bias /= out.m;
    out.mse /= out.m;
    out.coverage /= out.m;
  }
  out.replicates = std::move(replicates);
  return out;
}

SimulationResult run_replicates(const ScenarioSpec& spec, int m, const ChainConfig& config,
                                const Estimator& estimator) {
  if (m < 1) throw Error(ErrorCode::InvalidConfig, "number of replicates must be at least 1");
  std::vector<ReplicateMetrics> rows;
  rows.reserve(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioSpec rep = spec;
    rep.seed = derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(r));
    ChainConfig chain = config;
    chain.seed = derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(r) + 1);

    EffectSummary summary;
    double truth = 0.0;
    try {
      SimulatedData sim = gen_scenario(rep);
      truth = sim.true_effect;
      summary = estimator(sim.data, chain);
    } catch (const Error& e) {
      throw Error(e.code(), "replicate " + std::to_string(r) + ": " + e.what());
    }

    ReplicateMetrics row;
    row.replicate = r;
    row.estimate = summary.mean;
    row.ci_low = summary.ci_low;
    row.ci_high = summary.ci_high;
    row.truth = truth;
    row.error = summary.mean - truth;
    row.sq_error = row.error * row.error;
    row.covered = summary.ci_low <= truth && truth <= summary.ci_high;
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(row);
  }
  return aggregate_metrics(spec.id, config.scheme, std::move(rows));
}

}  // namespace bartcs
