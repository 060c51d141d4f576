#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bartcs/diagnostics.hpp"
#include "bartcs/simulation.hpp"
#include "test_support.hpp"

using namespace bartcs;

namespace {

Trace count_trace(Scheme scheme, const std::vector<std::vector<long>>& outcome, const std::vector<std::vector<long>>& exposure) {
  Trace t;
  t.scheme = scheme;
  t.exposure_kind = ExposureKind::Binary;
  const std::size_t p = exposure[0].size();
  for (std::size_t j = 0; j < p; ++j) t.names.push_back("X" + std::to_string(j + 1));
  for (std::size_t r = 0; r < outcome.size(); ++r) {
    TraceRecord rec;
    rec.exposure_counts = exposure[r];
    if (scheme == Scheme::Marginal) {
      rec.outcome_counts = outcome[r];
    } else {
      rec.outcome0_counts = outcome[r];
      rec.outcome1_counts.assign(p, 0);
    }
    t.records.push_back(rec);
  }
  return t;
}

}  // namespace

TEST_CASE("inclusion probabilities") {
  // Marginal outcome counts lead with the exposure.
  const Trace t = count_trace(Scheme::Marginal, {{1, 2, 0}, {0, 1, 0}, {1, 0, 0}, {1, 0, 0}},
                              {{0, 0}, {0, 0}, {0, 1}, {0, 0}});
  const auto r = pip(t);
  CHECK(r.outcome == std::vector<double>{0.5, 0.0});
  CHECK(r.exposure == std::vector<double>{0.0, 0.25});
  CHECK(r.any == std::vector<double>{0.5, 0.25});
  CHECK(r.exposure_variable == 0.75);
  CHECK(pip(t, PipSelector::Outcome) == r.outcome);
  CHECK(parse_pip_selector("any") == PipSelector::Any);
  CHECK(testing::thrown_code([] { parse_pip_selector("both"); }) == ErrorCode::InvalidConfig);

  const Trace s = count_trace(Scheme::Separate, {{1, 0}, {0, 0}}, {{0, 0}, {0, 0}});
  const auto rs = pip(s);
  CHECK(rs.outcome == std::vector<double>{0.5, 0.0});
  CHECK(std::isnan(rs.exposure_variable));

  Trace empty = s;
  empty.records.clear();
  CHECK(testing::thrown_code([&] { pip(empty); }) == ErrorCode::EmptyTrace);
}

TEST_CASE("class decomposition") {
  const Trace t = count_trace(Scheme::Separate, {{1, 1, 0}, {1, 1, 1}, {1, 0, 1}, {1, 1, 1}},
                              {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0}});
  const std::vector<int> none{}, cap{0, 1}, star{0, 1, 2}, bad{3};
  auto d = class_decomposition(t, none, star);
  CHECK(d.fraction_R_cap == 1.0);
  CHECK(d.fraction_R_star == 0.5);
  d = class_decomposition(t, cap, star);
  CHECK(d.fraction_R_cap == 0.75);
  CHECK(d.fraction_R_star == 0.5);
  CHECK(d.fraction_R_star <= d.fraction_R_cap);

  const Trace never = count_trace(Scheme::Separate, {{1, 0, 0}, {1, 0, 0}}, {{0, 0, 0}, {0, 0, 0}});
  CHECK(class_decomposition(never, cap, star).fraction_R_cap == 0.0);
  CHECK(testing::thrown_code([&] { class_decomposition(t, star, cap); }) == ErrorCode::SetNesting);
}

TEST_CASE("Gelman-Rubin statistic") {
  CHECK(gelman_rubin({{1, 2, 3}, {1, 2, 3}}) == doctest::Approx(std::sqrt(2.0 / 3)).epsilon(1e-14));
  CHECK(std::isinf(gelman_rubin({{0, 0, 0}, {1, 1, 1}})));
  CHECK(testing::thrown_code([] { gelman_rubin({{1, 2, 3}, {1, 2}}); }) == ErrorCode::ChainLengthMismatch);

  Rng rng(3);
  std::vector<std::vector<double>> chains(2, std::vector<double>(10000));
  for (auto& c : chains) {
    for (double& v : c) v = rng.normal();
  }
  const double r = gelman_rubin(chains);
  CHECK(r > 0.99);
  CHECK(r < 1.05);

  auto shifted = chains;
  for (auto& c : shifted) {
    for (double& v : c) v = 3.5 * v - 7;
  }
  CHECK(gelman_rubin(shifted) == doctest::Approx(r).epsilon(1e-10));
}

TEST_CASE("posterior predictive replicates") {
  Rng rng(5);
  const Matrix x = testing::random_matrix(20, 1, rng);
  std::vector<double> a(20), y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    a[i] = i % 2;
    y[i] = rng.normal();
  }
  const Dataset d(y, a, x, {"X1"}, ExposureKind::Binary);

  Trace t;
  t.scheme = Scheme::Separate;
  t.exposure_kind = ExposureKind::Binary;
  t.names = {"X1"};
  for (int r = 0; r < 3; ++r) {
    TraceRecord rec;
    rec.fit_treated.assign(20, 2.0 + r);
    rec.fit_control.assign(20, -1.0);
    rec.sigma2_0 = 1e-20;
    rec.sigma2_1 = 1e-20;
    t.records.push_back(rec);
  }
  auto reps = posterior_predictive(t, d, 5, rng);
  CHECK(reps.size() == 5);
  for (const auto& rep : reps) {
    REQUIRE(rep.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) {
      if (a[i] == 0.0) CHECK(std::abs(rep[i] + 1.0) < 1e-8);
      else CHECK(std::abs(rep[i] - std::round(rep[i])) < 1e-8);
    }
  }

  Trace noisy = t;
  noisy.records.resize(1);
  noisy.records[0].sigma2_0 = 1.0;
  noisy.records[0].sigma2_1 = 4.0;
  reps = posterior_predictive(noisy, d, 100, rng);
  double mean = 0;
  for (const auto& rep : reps) {
    for (double v : rep) mean += v / 2000;
  }
  // Fits average 0.5; replicate noise gives a standard error of sqrt(2.5 / 2000).
  CHECK(std::abs(mean - 0.5) < 3 * std::sqrt(2.5 / 2000));

  Trace empty = t;
  empty.records.clear();
  CHECK(testing::thrown_code([&] { posterior_predictive(empty, d, 1, rng); }) == ErrorCode::EmptyTrace);
}

TEST_CASE("scenario 1 selects the true confounders") {
  const auto sim = gen_scenario(default_spec(ScenarioId::S1, 3));
  ChainConfig cfg;
  cfg.n_iter = 3000;
  cfg.burn_in = 1500;
  cfg.thin = 5;
  cfg.seed = 9;
  const Trace t = run_chain(sim.data, Hyperparams{}, cfg);
  const auto r = pip(t);
  for (std::size_t j = 0; j < 5; ++j) {
    MESSAGE(r.names[j] << " outcome PIP " << r.outcome[j]);
    CHECK(r.outcome[j] >= 0.95);
  }
  // Two halves of the trace agree within Monte Carlo error, measured by
  // batch means of the per-draw inclusion indicator.
  const std::size_t half = t.records.size() / 2;
  const std::size_t batches = 10, len = half / batches;
  const auto any_split = [&](std::size_t r, std::size_t j) {
    const auto oc = t.records[r].outcome_covariate_counts();
    return oc[j] > 0 || t.records[r].exposure_counts[j] > 0 ? 1.0 : 0.0;
  };
  for (std::size_t j = 0; j < t.p(); ++j) {
    double mean[2] = {0, 0}, var[2] = {0, 0};
    for (std::size_t h = 0; h < 2; ++h) {
      std::vector<double> bm(batches, 0.0);
      for (std::size_t b = 0; b < batches; ++b) {
        for (std::size_t k = 0; k < len; ++k) bm[b] += any_split(h * half + b * len + k, j) / static_cast<double>(len);
        mean[h] += bm[b] / batches;
      }
      for (double v : bm) var[h] += (v - mean[h]) * (v - mean[h]) / ((batches - 1.0) * batches);
    }
    CHECK(std::abs(mean[0] - mean[1]) <= 4 * std::sqrt(var[0] + var[1]) + 1.0 / static_cast<double>(half));
  }
}
