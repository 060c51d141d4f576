#include "bartcs/chain.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>

namespace bartcs {

std::vector<long> TraceRecord::outcome_covariate_counts() const {
  if (!outcome_counts.empty()) return {outcome_counts.begin() + 1, outcome_counts.end()};
  std::vector<long> out(outcome0_counts.size(), 0);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = outcome0_counts[j] + outcome1_counts[j];
  return out;
}

long TraceRecord::exposure_in_outcome() const {
  return outcome_counts.empty() ? 0 : outcome_counts[0];
}

bool is_retained(long t, const ChainConfig& config) noexcept {
  return t > config.burn_in && (t - config.burn_in) % config.thin == 0;
}

namespace {

double sample_variance(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(v.size() > 1 ? v.size() - 1 : 1);
  return var > 0.0 ? var : 1.0;
}

std::vector<double> select(std::span<const double> v, std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(v[r]);
  return out;
}

double mean_difference(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] - b[i];
  return s / static_cast<double>(a.size());
}

struct ChainState {
  ModelState exposure;
  std::vector<ModelState> outcomes;  // marginal: one; separate: control, treated
  SplitProbVector s;
  double alpha = 1.0;
};

ChainState init_state(const Dataset& data, const Hyperparams& hp, Scheme scheme) {
  const std::size_t p = data.p();
  const OutcomeRange yr = standardize_outcome(data.y()).range;
  const LeafPrior outcome_prior = calibrate_leaf_prior(yr.min, yr.max, hp.num_trees, hp.k_leaf);

  ChainState st;
  if (data.exposure_kind() == ExposureKind::Binary) {
    const LeafPrior probit_prior = calibrate_leaf_prior(-3.0, 3.0, hp.num_trees, hp.k_leaf);
    st.exposure = make_model_state(ModelRole::Exposure, data.x(), std::vector<double>(data.n(), 0.0),
                                   probit_prior, 1.0, true);
  } else {
    const OutcomeRange ar = standardize_outcome(data.a()).range;
    const LeafPrior prior = calibrate_leaf_prior(ar.min, ar.max, hp.num_trees, hp.k_leaf);
    st.exposure = make_model_state(ModelRole::Exposure, data.x(), data.a(), prior,
                                   sample_variance(data.a()), false);
  }

  if (scheme == Scheme::Marginal) {
    st.outcomes.push_back(make_model_state(ModelRole::OutcomeMarginal, data.x().prepend_column(data.a()),
                                           data.y(), outcome_prior, sample_variance(data.y()), false));
    st.s = SplitProbVector::uniform(p + 1);
  } else {
    if (data.exposure_kind() != ExposureKind::Binary) {
      throw Error(ErrorCode::InvalidConfig, "the separate scheme requires a binary exposure");
    }
    const ArmIndices arms = arm_indices(data);
    const ModelRole roles[2] = {ModelRole::OutcomeArm0, ModelRole::OutcomeArm1};
    const std::vector<std::size_t>* rows[2] = {&arms.control, &arms.treated};
    for (int k = 0; k < 2; ++k) {
      std::vector<double> y = select(data.y(), *rows[k]);
      const double var = sample_variance(y);
      st.outcomes.push_back(make_model_state(roles[k], data.x().select_rows(*rows[k]), std::move(y),
                                             outcome_prior, var, false));
    }
    st.s = SplitProbVector::uniform(p);
  }
  st.alpha = hp.alpha_init;
  return st;
}

TraceRecord make_record(long t, const ChainState& st, const Dataset& data, Scheme scheme) {
  TraceRecord rec;
  rec.iteration = t;
  rec.exposure_counts = st.exposure.split_counts;
  rec.alpha = st.alpha;
  rec.s = st.s.probs;
  if (data.exposure_kind() == ExposureKind::Continuous) rec.tau2 = st.exposure.sigma2;

  if (scheme == Scheme::Marginal) {
    const ModelState& out = st.outcomes[0];
    rec.outcome_counts = out.split_counts;
    rec.sigma2 = out.sigma2;
    if (data.exposure_kind() == ExposureKind::Binary) {
      rec.fit_treated = counterfactual_fits_marginal(out.trees, data.x(), 1.0);
      rec.fit_control = counterfactual_fits_marginal(out.trees, data.x(), 0.0);
    } else {
      rec.forest.reserve(out.trees.size());
      for (const Tree& tree : out.trees) rec.forest.push_back(tree.compact());
    }
  } else {
    rec.outcome0_counts = st.outcomes[0].split_counts;
    rec.outcome1_counts = st.outcomes[1].split_counts;
    rec.sigma2_0 = st.outcomes[0].sigma2;
    rec.sigma2_1 = st.outcomes[1].sigma2;
    rec.fit_control = forest_fit(st.outcomes[0].trees, data.x());
    rec.fit_treated = forest_fit(st.outcomes[1].trees, data.x());
  }
  if (!rec.fit_treated.empty()) rec.ate = mean_difference(rec.fit_treated, rec.fit_control);
  return rec;
}

}  // namespace

Trace run_chain(const Dataset& data, const Hyperparams& hp, const ChainConfig& config, int chain_index) {
  hp.validate();
  config.validate();
  const Scheme scheme = config.scheme;
  const std::size_t p = data.p();

  Trace trace;
  trace.scheme = scheme;
  trace.exposure_kind = data.exposure_kind();
  trace.names = data.names();
  trace.n = data.n();
  trace.exposure_min = *std::min_element(data.a().begin(), data.a().end());
  trace.exposure_max = *std::max_element(data.a().begin(), data.a().end());
  trace.chain = chain_index;
  trace.seed = derive_seed(config.seed, static_cast<std::uint64_t>(chain_index));
  trace.records.reserve(static_cast<std::size_t>(config.retained()));

  Rng rng(trace.seed);
  ChainState st = init_state(data, hp, scheme);
  const bool binary = data.exposure_kind() == ExposureKind::Binary;

  SplitProbVector exposure_selection;
  for (long t = 1; t <= config.n_iter; ++t) {
    const std::vector<double>& outcome_selection = st.s.probs;
    const std::vector<double>* exposure_probs = &st.s.probs;
    if (scheme == Scheme::Marginal) {
      exposure_selection = st.s.without_exposure();
      exposure_probs = &exposure_selection.probs;
    }

    if (binary) {
      trace.moves.add(probit_sweep(st.exposure, data.a(), *exposure_probs, hp, rng));
    } else {
      trace.moves.add(sweep(st.exposure, *exposure_probs, hp, rng));
    }
    for (ModelState& out : st.outcomes) trace.moves.add(sweep(out, outcome_selection, hp, rng));

    SplitCounts counts;
    counts.exposure = st.exposure.split_counts;
    if (scheme == Scheme::Marginal) {
      const auto& oc = st.outcomes[0].split_counts;
      counts.outcome.assign(oc.begin() + 1, oc.end());
      counts.exposure_in_outcome = oc[0];
      const double c = hp.c_offset.resolve(counts.exposure_in_outcome);
      MarginalUpdate upd = update_s_marginal(counts, st.alpha, c, st.s, rng);
      ++trace.s_proposed;
      trace.s_accepted += upd.accepted ? 1 : 0;
      trace.s_degenerate += upd.degenerate ? 1 : 0;
      st.s = std::move(upd.s);
    } else {
      counts.outcome.assign(p, 0);
      for (const ModelState& out : st.outcomes) {
        for (std::size_t j = 0; j < p; ++j) counts.outcome[j] += out.split_counts[j];
      }
      st.s = update_s_separate(counts, st.alpha, rng);
      ++trace.s_proposed;
      ++trace.s_accepted;
    }
    st.alpha = update_alpha(st.s, st.alpha, p, hp.a0, hp.b0, hp.alpha_log_step, rng);

    if (is_retained(t, config)) trace.records.push_back(make_record(t, st, data, scheme));
  }
  return trace;
}

std::vector<Trace> run_chains(const Dataset& data, const Hyperparams& hp, const ChainConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n_chains);
  std::vector<Trace> traces(n);
  std::vector<std::exception_ptr> errors(n);

  std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BARTCS_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) workers = static_cast<std::size_t>(cap);
  }
  workers = std::min(workers, n);

  auto work = [&](std::size_t first) {
    for (std::size_t k = first; k < n; k += workers) {
      try {
        traces[k] = run_chain(data, hp, config, static_cast<int>(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return traces;
}

std::vector<double> counterfactual_fits_marginal(std::span<const Tree> forest, const Matrix& x,
                                                 double a_value) {
  std::vector<double> fit(x.rows(), 0.0);
  for (const Tree& tree : forest) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      fit[i] += tree.evaluate([&](int var) { return var == 0 ? a_value : x(i, var - 1); });
    }
  }
  return fit;
}

std::vector<double> counterfactual_fits_marginal(std::span<const CompactTree> forest,
                                                 const Matrix& x, double a_value) {
  std::vector<double> fit(x.rows(), 0.0);
  for (const CompactTree& tree : forest) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      fit[i] += tree.evaluate([&](int var) { return var == 0 ? a_value : x(i, var - 1); });
    }
  }
  return fit;
}

ExposureInclusion exposure_inclusion_guard(const TraceRecord& record) {
  ExposureInclusion out;
  out.n0 = record.exposure_in_outcome();
  out.s0 = record.outcome_counts.empty() || record.s.empty() ? 0.0 : record.s[0];
  out.flagged = out.n0 == 0;
  return out;
}

}  // namespace bartcs
