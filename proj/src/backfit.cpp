#include "bartcs/backfit.hpp"

#include <algorithm>
#include <cmath>

namespace bartcs {

std::string_view to_string(ModelRole role) {
  switch (role) {
    case ModelRole::Exposure: return "exposure";
    case ModelRole::OutcomeMarginal: return "outcome";
    case ModelRole::OutcomeArm0: return "outcome0";
    case ModelRole::OutcomeArm1: return "outcome1";
  }
  return "unknown";
}

ModelState make_model_state(ModelRole role, Matrix x, std::vector<double> response,
                            const LeafPrior& prior, double sigma2, bool fixed_sigma2) {
  ModelState s;
  s.role = role;
  const std::size_t n = response.size();
  s.split_counts.assign(x.cols(), 0);
  s.x = std::move(x);
  s.response = std::move(response);
  s.prior = prior;
  s.trees.assign(static_cast<std::size_t>(prior.num_trees), Tree(n, prior.leaf_mean()));
  s.tree_fit.assign(s.trees.size(), std::vector<double>(n, prior.leaf_mean()));
  s.total_fit.assign(n, prior.leaf_mean() * static_cast<double>(s.trees.size()));
  s.sigma2 = sigma2;
  s.fixed_sigma2 = fixed_sigma2;
  return s;
}

void partial_residuals(const ModelState& state, std::size_t h, std::span<double> out) {
  const auto& fit = state.tree_fit[h];
  for (std::size_t i = 0; i < state.num_rows(); ++i) {
    out[i] = state.response[i] - state.total_fit[i] + fit[i];
  }
}

std::vector<double> partial_residuals(const ModelState& state, std::size_t h) {
  std::vector<double> out(state.num_rows());
  partial_residuals(state, h, out);
  return out;
}

double cache_error(const ModelState& state) {
  const std::vector<double> fresh = forest_fit(state.trees, state.x);
  double worst = 0.0;
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    worst = std::max(worst, std::abs(fresh[i] - state.total_fit[i]));
  }
  return worst;
}

void SweepLog::add(const SweepLog& other) {
  for (std::size_t k = 0; k < 3; ++k) {
    proposed[k] += other.proposed[k];
    accepted[k] += other.accepted[k];
  }
  skipped += other.skipped;
}

namespace {

void update_counts(ModelState& state, const Tree& tree, const MoveProposal& p) {
  switch (p.kind) {
    case MoveKind::Grow: ++state.split_counts[static_cast<std::size_t>(p.rule.var)]; break;
    case MoveKind::Prune: --state.split_counts[static_cast<std::size_t>(p.rule.var)]; break;
    case MoveKind::Change:
      --state.split_counts[static_cast<std::size_t>(tree.node(p.node).rule.var)];
      ++state.split_counts[static_cast<std::size_t>(p.rule.var)];
      break;
  }
}

// Draws every leaf of tree h from its conditional posterior and refreshes the
// cached fits.
void redraw_leaves(ModelState& state, std::size_t h, std::span<const double> residuals, Rng& rng,
                   std::vector<double>& sums, std::vector<std::size_t>& counts) {
  Tree& tree = state.trees[h];
  const auto row_map = tree.row_map();
  sums.assign(tree.capacity(), 0.0);
  counts.assign(tree.capacity(), 0);
  for (std::size_t i = 0; i < row_map.size(); ++i) {
    sums[static_cast<std::size_t>(row_map[i])] += residuals[i];
    ++counts[static_cast<std::size_t>(row_map[i])];
  }
  for (std::size_t id = 0; id < tree.capacity(); ++id) {
    if (counts[id] == 0) continue;
    const NormalParams post = leaf_posterior_params(sums[id], counts[id], state.sigma2, state.prior);
    tree.set_mu(static_cast<int>(id), rng.normal(post.mean, std::sqrt(post.var)));
  }
  auto& fit = state.tree_fit[h];
  for (std::size_t i = 0; i < row_map.size(); ++i) {
    const double mu = tree.node(row_map[i]).mu;
    state.total_fit[i] += mu - fit[i];
    fit[i] = mu;
  }
}

}  // namespace

SweepLog sweep(ModelState& state, std::span<const double> selection, const Hyperparams& hp,
               Rng& rng, SweepOptions options) {
  SweepLog log;
  const std::size_t n = state.num_rows();
  const double sigma_mu2 = state.prior.leaf_var();
  const double leaf_mean = state.prior.leaf_mean();
  std::vector<double> residuals(n);
  std::vector<double> centered(n);
  std::vector<double> sums;
  std::vector<std::size_t> counts;

  for (std::size_t h = 0; h < state.num_trees(); ++h) {
    Tree& tree = state.trees[h];
    partial_residuals(state, h, residuals);
    for (std::size_t i = 0; i < n; ++i) centered[i] = residuals[i] - leaf_mean;

    const MoveKind kind = sample_move_kind(rng, tree, hp);
    std::optional<MoveProposal> proposal;
    switch (kind) {
      case MoveKind::Grow: proposal = propose_grow(tree, state.x, selection, rng); break;
      case MoveKind::Prune: proposal = propose_prune(tree, state.x, rng); break;
      case MoveKind::Change: proposal = propose_change(tree, state.x, selection, rng); break;
    }
    if (proposal) {
      const auto k = static_cast<std::size_t>(kind);
      ++log.proposed[k];
      const double log_r = log_accept(*proposal, state.sigma2, sigma_mu2, centered, hp);
      const double log_u = std::log(rng.uniform());
      if (!options.force_reject && log_u < log_r) {
        update_counts(state, tree, *proposal);
        apply_move(tree, *proposal, state.x);
        ++log.accepted[k];
      }
    } else {
      ++log.skipped;
    }
    redraw_leaves(state, h, residuals, rng, sums, counts);
  }

  // Drop accumulated rounding from the incremental updates.
  std::fill(state.total_fit.begin(), state.total_fit.end(), 0.0);
  for (const auto& fit : state.tree_fit) {
    for (std::size_t i = 0; i < n; ++i) state.total_fit[i] += fit[i];
  }

  if (!state.fixed_sigma2) {
    for (std::size_t i = 0; i < n; ++i) residuals[i] = state.response[i] - state.total_fit[i];
    const InverseGammaParams post = sigma2_posterior_params(residuals, hp.a_sigma, hp.b_sigma);
    state.sigma2 = rng.inverse_gamma(post.shape, post.rate);
  }
  return log;
}

SweepLog probit_sweep(ModelState& state, std::span<const double> a,
                      std::span<const double> selection, const Hyperparams& hp, Rng& rng,
                      SweepOptions options) {
  probit_latent_update(a, state.total_fit, state.response, rng);
  state.sigma2 = 1.0;
  state.fixed_sigma2 = true;
  return sweep(state, selection, hp, rng, options);
}

}  // namespace bartcs
