#include "bartcs/estimands.hpp"

#include <algorithm>
#include <cmath>

namespace bartcs {

EffectSummary summarize_draws(std::vector<double> draws) {
  if (draws.empty()) throw Error(ErrorCode::EmptyTrace, "no posterior draws");
  EffectSummary out;
  double sum = 0.0;
  for (double d : draws) sum += d;
  out.mean = sum / static_cast<double>(draws.size());
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  const double last = static_cast<double>(sorted.size() - 1);
  out.ci_low = sorted[static_cast<std::size_t>(std::floor(0.025 * last))];
  out.ci_high = sorted[static_cast<std::size_t>(std::ceil(0.975 * last))];
  out.draws = std::move(draws);
  return out;
}

namespace {

EffectSummary binary_ate(const Trace& trace) {
  if (trace.exposure_kind != ExposureKind::Binary) {
    throw Error(ErrorCode::SchemeMismatch, "average treatment effect needs a binary exposure");
  }
  std::vector<double> draws;
  draws.reserve(trace.records.size());
  for (const TraceRecord& rec : trace.records) {
    double s = 0.0;
    for (std::size_t i = 0; i < rec.fit_treated.size(); ++i) s += rec.fit_treated[i] - rec.fit_control[i];
    draws.push_back(s / static_cast<double>(rec.fit_treated.size()));
  }
  return summarize_draws(std::move(draws));
}

void check_continuous(const Trace& trace) {
  if (trace.scheme != Scheme::Marginal || trace.exposure_kind != ExposureKind::Continuous) {
    throw Error(ErrorCode::SchemeMismatch, "needs a marginal-scheme trace with continuous exposure");
  }
}

void check_support(const Trace& trace, double a, const ContrastOptions& options) {
  if (options.allow_out_of_support) return;
  if (a < trace.exposure_min || a > trace.exposure_max) {
    throw Error(ErrorCode::OutOfSupport, "exposure level outside the observed range");
  }
}

double average_fit(const TraceRecord& rec, const Matrix& x, double a) {
  const std::vector<double> fit = counterfactual_fits_marginal(rec.forest, x, a);
  double s = 0.0;
  for (double f : fit) s += f;
  return s / static_cast<double>(fit.size());
}

}  // namespace

EffectSummary ate_separate(const Trace& trace) {
  if (trace.scheme != Scheme::Separate) throw Error(ErrorCode::SchemeMismatch, "not a separate-scheme trace");
  return binary_ate(trace);
}

EffectSummary ate_marginal(const Trace& trace) {
  if (trace.scheme != Scheme::Marginal) throw Error(ErrorCode::SchemeMismatch, "not a marginal-scheme trace");
  return binary_ate(trace);
}

EffectSummary ate(std::span<const Trace> traces) {
  const Trace merged = merge_traces(traces);
  return merged.scheme == Scheme::Separate ? ate_separate(merged) : ate_marginal(merged);
}

EffectSummary contrast_continuous(const Trace& trace, const Matrix& x, double a, double a_prime,
                                  ContrastOptions options) {
  check_continuous(trace);
  check_support(trace, a, options);
  check_support(trace, a_prime, options);
  std::vector<double> draws;
  draws.reserve(trace.records.size());
  for (const TraceRecord& rec : trace.records) {
    const std::vector<double> fa = counterfactual_fits_marginal(rec.forest, x, a);
    const std::vector<double> fb = counterfactual_fits_marginal(rec.forest, x, a_prime);
    double s = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) s += fa[i] - fb[i];
    draws.push_back(s / static_cast<double>(fa.size()));
  }
  return summarize_draws(std::move(draws));
}

std::vector<EffectSummary> exposure_response(const Trace& trace, const Matrix& x,
                                             std::span<const double> grid, ContrastOptions options) {
  check_continuous(trace);
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "exposure grid is empty");
  for (double a : grid) check_support(trace, a, options);
  std::vector<EffectSummary> out;
  out.reserve(grid.size());
  for (double a : grid) {
    std::vector<double> draws;
    draws.reserve(trace.records.size());
    for (const TraceRecord& rec : trace.records) draws.push_back(average_fit(rec, x, a));
    out.push_back(summarize_draws(std::move(draws)));
  }
  return out;
}

Trace merge_traces(std::span<const Trace> traces) {
  if (traces.empty()) throw Error(ErrorCode::EmptyTrace, "no traces to merge");
  Trace merged = traces[0];
  for (std::size_t k = 1; k < traces.size(); ++k) {
    if (traces[k].scheme != merged.scheme || traces[k].exposure_kind != merged.exposure_kind) {
      throw Error(ErrorCode::SchemeMismatch, "traces come from different schemes");
    }
    merged.records.insert(merged.records.end(), traces[k].records.begin(), traces[k].records.end());
    merged.moves.add(traces[k].moves);
    merged.s_proposed += traces[k].s_proposed;
    merged.s_accepted += traces[k].s_accepted;
    merged.s_degenerate += traces[k].s_degenerate;
  }
  return merged;
}

}  // namespace bartcs
