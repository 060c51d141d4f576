#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bartcs/estimands.hpp"
#include "test_support.hpp"

using namespace bartcs;

namespace {

Trace binary_trace(Scheme scheme, const std::vector<std::pair<std::vector<double>, std::vector<double>>>& fits) {
  Trace t;
  t.scheme = scheme;
  t.exposure_kind = ExposureKind::Binary;
  t.names = {"X1"};
  t.n = fits.empty() ? 0 : fits[0].first.size();
  long it = 1;
  for (const auto& [treated, control] : fits) {
    TraceRecord r;
    r.iteration = it++;
    r.fit_treated = treated;
    r.fit_control = control;
    t.records.push_back(r);
  }
  return t;
}

// Single tree on (a, x1): a <= cut goes to mu_lo, otherwise mu_hi, plus a
// second tree splitting x1 at 0.
std::vector<CompactTree> exposure_forest(double cut, double mu_lo, double mu_hi) {
  CompactTree t;
  t.nodes.resize(3);
  t.nodes[0].left = 1;
  t.nodes[0].right = 2;
  t.nodes[0].rule = {0, cut};
  t.nodes[1].mu = mu_lo;
  t.nodes[2].mu = mu_hi;
  CompactTree u;
  u.nodes.resize(3);
  u.nodes[0].left = 1;
  u.nodes[0].right = 2;
  u.nodes[0].rule = {1, 0.0};
  u.nodes[1].mu = -0.5;
  u.nodes[2].mu = 0.25;
  return {t, u};
}

Trace continuous_trace(std::uint64_t seed, std::size_t draws) {
  Rng rng(seed);
  Trace t;
  t.scheme = Scheme::Marginal;
  t.exposure_kind = ExposureKind::Continuous;
  t.names = {"X1", "X2"};
  t.exposure_min = -2;
  t.exposure_max = 3;
  const Matrix design = testing::random_matrix(30, 3, rng);
  for (std::size_t r = 0; r < draws; ++r) {
    TraceRecord rec;
    for (int h = 0; h < 5; ++h) rec.forest.push_back(testing::random_tree(design, rng, 3).compact());
    t.records.push_back(rec);
  }
  return t;
}

}  // namespace

TEST_CASE("summaries use order statistics") {
  std::vector<double> d(101);
  for (int k = 0; k <= 100; ++k) d[static_cast<std::size_t>(k)] = 100 - k;
  const auto s = summarize_draws(d);
  CHECK(s.mean == 50.0);
  CHECK(s.ci_low == 2.0);
  CHECK(s.ci_high == 98.0);
  CHECK(s.draws == d);
  CHECK(testing::thrown_code([] { summarize_draws({}); }) == ErrorCode::EmptyTrace);
}

TEST_CASE("ATE for both schemes") {
  for (Scheme scheme : {Scheme::Separate, Scheme::Marginal}) {
    auto constant = binary_trace(scheme, {{{2, 2, 2}, {1, 1, 1}}, {{2, 2, 2}, {1, 1, 1}}});
    auto e = scheme == Scheme::Separate ? ate_separate(constant) : ate_marginal(constant);
    CHECK(e.mean == 1.0);
    CHECK(e.ci_low == 1.0);
    CHECK(e.ci_high == 1.0);

    auto same = binary_trace(scheme, {{{0.5, -1}, {0.5, -1}}});
    e = scheme == Scheme::Separate ? ate_separate(same) : ate_marginal(same);
    CHECK(e.mean == 0.0);

    auto hand = binary_trace(scheme, {{{3, 1}, {1, 1}}, {{2, 2}, {0, 2}}});
    e = scheme == Scheme::Separate ? ate_separate(hand) : ate_marginal(hand);
    CHECK(e.draws == std::vector<double>{1.0, 1.0});
    CHECK(e.mean == 1.0);
    const std::vector<Trace> chains{hand, hand};
    CHECK(ate(chains).draws.size() == 4);
  }
  auto sep = binary_trace(Scheme::Separate, {{{1}, {0}}});
  auto mar = binary_trace(Scheme::Marginal, {{{1}, {0}}});
  CHECK(testing::thrown_code([&] { ate_marginal(sep); }) == ErrorCode::SchemeMismatch);
  CHECK(testing::thrown_code([&] { ate_separate(mar); }) == ErrorCode::SchemeMismatch);
  const std::vector<Trace> mixed{sep, mar};
  CHECK(testing::thrown_code([&] { merge_traces(mixed); }) == ErrorCode::SchemeMismatch);
}

TEST_CASE("continuous contrasts") {
  Trace t;
  t.scheme = Scheme::Marginal;
  t.exposure_kind = ExposureKind::Continuous;
  t.names = {"X1"};
  t.exposure_min = -1;
  t.exposure_max = 2;
  TraceRecord rec;
  rec.forest = exposure_forest(0.5, -1.0, 2.5);
  t.records.push_back(rec);
  const Matrix x = testing::matrix_from_columns({{-1, 0.3, 1, 2}});

  CHECK(contrast_continuous(t, x, 1.0, 0.0).mean == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(contrast_continuous(t, x, 0.5, 0.5).mean == 0.0);
  CHECK(contrast_continuous(t, x, 0.0, 1.0).mean == doctest::Approx(-3.5).epsilon(1e-15));
  CHECK(testing::thrown_code([&] { contrast_continuous(t, x, 2.5, 0.0); }) == ErrorCode::OutOfSupport);
  CHECK(contrast_continuous(t, x, 2.5, 0.0, {.allow_out_of_support = true}).mean ==
        doctest::Approx(3.5).epsilon(1e-15));

  auto binary = binary_trace(Scheme::Marginal, {{{1}, {0}}});
  CHECK(testing::thrown_code([&] { contrast_continuous(binary, x, 1.0, 0.0); }) == ErrorCode::SchemeMismatch);
}

TEST_CASE("contrast antisymmetry and curve identity on random forests") {
  const Trace t = continuous_trace(3, 12);
  Rng rng(4);
  const Matrix x = testing::random_matrix(25, 2, rng);
  const std::vector<double> grid{-1.5, -0.2, 0.0, 0.7, 2.9};
  const auto curve = exposure_response(t, x, grid);
  REQUIRE(curve.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto forward = contrast_continuous(t, x, grid[i], grid[j]);
      const auto backward = contrast_continuous(t, x, grid[j], grid[i]);
      for (std::size_t r = 0; r < t.records.size(); ++r) {
        CHECK(forward.draws[r] == -backward.draws[r]);
        CHECK(std::abs(forward.draws[r] - (curve[i].draws[r] - curve[j].draws[r])) < 1e-12);
      }
    }
  }
  const std::vector<double> one{0.7};
  CHECK(exposure_response(t, x, one)[0].draws == curve[3].draws);
}

TEST_CASE("exposure response edge cases") {
  Trace t;
  t.scheme = Scheme::Marginal;
  t.exposure_kind = ExposureKind::Continuous;
  t.names = {"X1"};
  t.exposure_min = 0;
  t.exposure_max = 1;
  TraceRecord rec;
  CompactTree u;
  u.nodes.resize(3);
  u.nodes[0].left = 1;
  u.nodes[0].right = 2;
  u.nodes[0].rule = {1, 0.0};
  u.nodes[1].mu = -1;
  u.nodes[2].mu = 3;
  rec.forest = {u};
  t.records.push_back(rec);
  const Matrix x = testing::matrix_from_columns({{-1, 1, 2}});
  const std::vector<double> grid{0, 0.25, 1};
  for (const auto& e : exposure_response(t, x, grid)) CHECK(e.mean == doctest::Approx(5.0 / 3));
  CHECK(testing::thrown_code([&] { exposure_response(t, x, std::vector<double>{}); }) == ErrorCode::EmptyGrid);
  CHECK(testing::thrown_code([&] { exposure_response(t, x, std::vector<double>{-0.1}); }) ==
        ErrorCode::OutOfSupport);
}
