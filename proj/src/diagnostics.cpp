#include "bartcs/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bartcs {

PipSelector parse_pip_selector(std::string_view text) {
  if (text == "exposure") return PipSelector::Exposure;
  if (text == "outcome") return PipSelector::Outcome;
  if (text == "any") return PipSelector::Any;
  throw Error(ErrorCode::InvalidConfig, "unknown model selector '" + std::string(text) + "'");
}

const std::vector<double>& InclusionReport::select(PipSelector selector) const {
  switch (selector) {
    case PipSelector::Exposure: return exposure;
    case PipSelector::Outcome: return outcome;
    case PipSelector::Any: return any;
  }
  return any;
}

InclusionReport pip(const Trace& trace) {
  if (trace.records.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no retained draws");
  const std::size_t p = trace.p();
  InclusionReport r;
  r.names = trace.names;
  r.exposure.assign(p, 0.0);
  r.outcome.assign(p, 0.0);
  r.any.assign(p, 0.0);
  long exposure_hits = 0;
  for (const TraceRecord& rec : trace.records) {
    const std::vector<long> oc = rec.outcome_covariate_counts();
    for (std::size_t j = 0; j < p; ++j) {
      const bool in_exposure = rec.exposure_counts[j] > 0;
      const bool in_outcome = oc[j] > 0;
      r.exposure[j] += in_exposure;
      r.outcome[j] += in_outcome;
      r.any[j] += in_exposure || in_outcome;
    }
    exposure_hits += rec.exposure_in_outcome() > 0;
  }
  const double draws = static_cast<double>(trace.records.size());
  for (std::size_t j = 0; j < p; ++j) {
    r.exposure[j] /= draws;
    r.outcome[j] /= draws;
    r.any[j] /= draws;
  }
  if (trace.scheme == Scheme::Marginal) r.exposure_variable = static_cast<double>(exposure_hits) / draws;
  return r;
}

std::vector<double> pip(const Trace& trace, PipSelector selector) { return pip(trace).select(selector); }

ClassDecomposition class_decomposition(const Trace& trace, std::span<const int> x_cap,
                                       std::span<const int> x_star) {
  for (int j : x_cap) {
    if (std::find(x_star.begin(), x_star.end(), j) == x_star.end()) {
      throw Error(ErrorCode::SetNesting, "X_cap is not a subset of X_star");
    }
  }
  if (trace.records.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no retained draws");
  auto all_split = [](const std::vector<long>& counts, std::span<const int> vars) {
    return std::all_of(vars.begin(), vars.end(), [&](int j) { return counts[static_cast<std::size_t>(j)] > 0; });
  };
  long cap = 0;
  long star = 0;
  for (const TraceRecord& rec : trace.records) {
    const std::vector<long> oc = rec.outcome_covariate_counts();
    cap += all_split(oc, x_cap);
    star += all_split(oc, x_star);
  }
  const double draws = static_cast<double>(trace.records.size());
  return {static_cast<double>(cap) / draws, static_cast<double>(star) / draws};
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw Error(ErrorCode::ChainLengthMismatch, "need at least two chains");
  const std::size_t n = chains[0].size();
  for (const auto& c : chains) {
    if (c.size() != n) throw Error(ErrorCode::ChainLengthMismatch, "chains differ in length");
  }
  if (n < 2) throw Error(ErrorCode::ChainLengthMismatch, "chains need at least two draws");

  const double m = static_cast<double>(chains.size());
  const double nd = static_cast<double>(n);
  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : chains) {
    double mean = 0.0;
    for (double v : c) mean += v;
    mean /= nd;
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    w += ss / (nd - 1.0);
    means.push_back(mean);
  }
  w /= m;
  double grand = 0.0;
  for (double mu : means) grand += mu;
  grand /= m;
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= (m - 1.0);

  if (!(w > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt(((nd - 1.0) / nd * w + b_over_n) / w);
}

std::vector<std::vector<double>> posterior_predictive(const Trace& trace, const Dataset& data,
                                                      std::size_t k, Rng& rng) {
  if (trace.records.empty()) throw Error(ErrorCode::EmptyTrace, "trace has no retained draws");
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "need at least one replicate");
  const std::size_t n = data.n();
  std::vector<std::vector<double>> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const TraceRecord& rec = trace.records[rng.index(trace.records.size())];
    std::vector<double> fit;
    if (trace.exposure_kind == ExposureKind::Binary) {
      fit.resize(n);
      for (std::size_t i = 0; i < n; ++i) fit[i] = data.a()[i] == 1.0 ? rec.fit_treated[i] : rec.fit_control[i];
    } else {
      fit.assign(n, 0.0);
      for (const CompactTree& tree : rec.forest) {
        for (std::size_t i = 0; i < n; ++i) {
          fit[i] += tree.evaluate([&](int var) { return var == 0 ? data.a()[i] : data.x()(i, var - 1); });
        }
      }
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      double sigma2 = rec.sigma2;
      if (trace.scheme == Scheme::Separate) sigma2 = data.a()[i] == 1.0 ? rec.sigma2_1 : rec.sigma2_0;
      y[i] = fit[i] + std::sqrt(sigma2) * rng.normal();
    }
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace bartcs
