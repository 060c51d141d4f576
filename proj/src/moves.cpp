#include "bartcs/moves.hpp"

#include <algorithm>
#include <cmath>

namespace bartcs {

namespace {

double sum_over(std::span<const double> residuals, std::span<const std::size_t> rows) {
  double s = 0.0;
  for (std::size_t r : rows) s += residuals[r];
  return s;
}

void split_rows(const Matrix& x, std::span<const std::size_t> rows, SplitRule rule,
                std::vector<std::size_t>& left, std::vector<std::size_t>& right) {
  auto column = x.col(static_cast<std::size_t>(rule.var));
  left.clear();
  right.clear();
  for (std::size_t r : rows) (rule.goes_left(column[r]) ? left : right).push_back(r);
}

// Number of singly internal nodes after growing `leaf`.
std::size_t singly_after_grow(const Tree& tree, int leaf) {
  std::size_t w = singly_internal_count(tree);
  const int parent = tree.node(leaf).parent;
  if (parent >= 0 && tree.is_singly_internal(parent)) --w;
  return w + 1;
}

// log of beta1 (1 - beta1/(2+d)^beta2)^2 / ((1+d)^beta2 - beta1)
double log_structure_grow(int depth, const Hyperparams& hp) {
  const double d = static_cast<double>(depth);
  return std::log(hp.beta1) + 2.0 * std::log1p(-hp.beta1 / std::pow(2.0 + d, hp.beta2)) -
         std::log(std::pow(1.0 + d, hp.beta2) - hp.beta1);
}

// Log marginal-likelihood contribution of splitting a node with children
// (nl, sl) and (nr, sr) over keeping it whole.
double log_likelihood_split(double sigma2, double sigma_mu2, double nl, double sl, double nr,
                            double sr) {
  const double n = nl + nr;
  const double s = sl + sr;
  const double vl = sigma2 + nl * sigma_mu2;
  const double vr = sigma2 + nr * sigma_mu2;
  const double v = sigma2 + n * sigma_mu2;
  const double det = 0.5 * (std::log(sigma2) + std::log(v) - std::log(vl) - std::log(vr));
  const double quad = sigma_mu2 / (2.0 * sigma2) * (sl * sl / vl + sr * sr / vr - s * s / v);
  return det + quad;
}

}  // namespace

std::string_view to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::Grow: return "grow";
    case MoveKind::Prune: return "prune";
    case MoveKind::Change: return "change";
  }
  return "unknown";
}

double depth_split_prob(int depth, double beta1, double beta2) {
  return beta1 / std::pow(1.0 + static_cast<double>(depth), beta2);
}

MoveKind sample_move_kind(Rng& rng, const Tree& tree, const Hyperparams& hp) {
  if (tree.is_stump()) return MoveKind::Grow;
  const double u = rng.uniform();
  if (u < hp.p_grow) return MoveKind::Grow;
  if (u < hp.p_grow + hp.p_prune) return MoveKind::Prune;
  return MoveKind::Change;
}

int sample_split_variable(Rng& rng, std::span<const double> selection, std::span<const int> available) {
  std::vector<double> weights(available.size());
  double total = 0.0;
  for (std::size_t k = 0; k < available.size(); ++k) {
    weights[k] = selection[static_cast<std::size_t>(available[k])];
    total += weights[k];
  }
  if (!(total > 0.0)) return available[rng.index(available.size())];
  return available[rng.categorical(weights)];
}

MoveProposal make_grow_proposal(const Tree& tree, const Matrix& x, int leaf, SplitRule rule) {
  const std::vector<std::size_t> rows = tree.rows_of(leaf);
  MoveProposal p;
  p.kind = MoveKind::Grow;
  p.node = leaf;
  p.rule = rule;
  p.b = tree.num_terminal();
  p.w = singly_internal_count(tree);
  p.w_star = singly_after_grow(tree, leaf);
  p.p_eta = available_predictors(x, rows).size();
  p.n_p_eta = valid_cutpoints(x, rows, rule.var).size();
  p.depth = tree.node(leaf).depth;
  split_rows(x, rows, rule, p.left_rows, p.right_rows);
  return p;
}

MoveProposal make_prune_proposal(const Tree& tree, const Matrix& x, int node) {
  const TreeNode& n = tree.node(node);
  MoveProposal p;
  p.kind = MoveKind::Prune;
  p.node = node;
  p.rule = n.rule;
  p.b = tree.num_terminal();
  p.w = singly_internal_count(tree);
  p.depth = n.depth;
  p.left_rows = tree.rows_of(n.left);
  p.right_rows = tree.rows_of(n.right);
  std::vector<std::size_t> rows;
  rows.reserve(p.left_rows.size() + p.right_rows.size());
  rows.insert(rows.end(), p.left_rows.begin(), p.left_rows.end());
  rows.insert(rows.end(), p.right_rows.begin(), p.right_rows.end());
  p.p_eta = available_predictors(x, rows).size();
  p.n_p_eta = valid_cutpoints(x, rows, n.rule.var).size();
  // Pruning removes this singly internal node; the parent becomes singly
  // internal when its other child is terminal.
  p.w_star = p.w - 1;
  if (n.parent >= 0) {
    const TreeNode& parent = tree.node(n.parent);
    const int sibling = parent.left == node ? parent.right : parent.left;
    if (tree.node(sibling).terminal()) ++p.w_star;
  }
  return p;
}

MoveProposal make_change_proposal(const Tree& tree, const Matrix& x, int node, SplitRule rule) {
  const TreeNode& n = tree.node(node);
  MoveProposal p;
  p.kind = MoveKind::Change;
  p.node = node;
  p.rule = rule;
  p.b = tree.num_terminal();
  p.w = singly_internal_count(tree);
  p.w_star = p.w;
  p.depth = n.depth;
  p.old_left_rows = tree.rows_of(n.left);
  p.old_right_rows = tree.rows_of(n.right);
  std::vector<std::size_t> rows;
  rows.reserve(p.old_left_rows.size() + p.old_right_rows.size());
  rows.insert(rows.end(), p.old_left_rows.begin(), p.old_left_rows.end());
  rows.insert(rows.end(), p.old_right_rows.begin(), p.old_right_rows.end());
  std::sort(rows.begin(), rows.end());
  p.p_eta = available_predictors(x, rows).size();
  p.n_p_eta = valid_cutpoints(x, rows, rule.var).size();
  split_rows(x, rows, rule, p.left_rows, p.right_rows);
  return p;
}

std::optional<MoveProposal> propose_grow(const Tree& tree, const Matrix& x,
                                         std::span<const double> selection, Rng& rng) {
  const auto rows_by_leaf = tree.rows_by_leaf();
  std::vector<int> growable;
  for (std::size_t id = 0; id < rows_by_leaf.size(); ++id) {
    const auto& rows = rows_by_leaf[id];
    if (rows.size() < 2) continue;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (is_splittable(x, rows, static_cast<int>(j))) {
        growable.push_back(static_cast<int>(id));
        break;
      }
    }
  }
  if (growable.empty()) return std::nullopt;

  const int leaf = growable[rng.index(growable.size())];
  const auto& rows = rows_by_leaf[static_cast<std::size_t>(leaf)];
  const std::vector<int> available = available_predictors(x, rows);
  const int var = sample_split_variable(rng, selection, available);
  const std::vector<double> cuts = valid_cutpoints(x, rows, var);
  const SplitRule rule{var, cuts[rng.index(cuts.size())]};

  MoveProposal p;
  p.kind = MoveKind::Grow;
  p.node = leaf;
  p.rule = rule;
  p.b = tree.num_terminal();
  p.w = singly_internal_count(tree);
  p.w_star = singly_after_grow(tree, leaf);
  p.p_eta = available.size();
  p.n_p_eta = cuts.size();
  p.depth = tree.node(leaf).depth;
  split_rows(x, rows, rule, p.left_rows, p.right_rows);
  return p;
}

std::optional<MoveProposal> propose_prune(const Tree& tree, const Matrix& x, Rng& rng) {
  const std::vector<int> candidates = tree.singly_internal_nodes();
  if (candidates.empty()) return std::nullopt;
  return make_prune_proposal(tree, x, candidates[rng.index(candidates.size())]);
}

std::optional<MoveProposal> propose_change(const Tree& tree, const Matrix& x,
                                           std::span<const double> selection, Rng& rng) {
  const std::vector<int> candidates = tree.singly_internal_nodes();
  if (candidates.empty()) return std::nullopt;
  const int node = candidates[rng.index(candidates.size())];
  const std::vector<std::size_t> rows = tree.rows_of(node);
  const std::vector<int> available = available_predictors(x, rows);
  if (available.empty()) return std::nullopt;
  const int var = sample_split_variable(rng, selection, available);
  const std::vector<double> cuts = valid_cutpoints(x, rows, var);
  return make_change_proposal(tree, x, node, SplitRule{var, cuts[rng.index(cuts.size())]});
}

double log_accept_grow(const MoveProposal& p, double sigma2, double sigma_mu2,
                       std::span<const double> residuals, const Hyperparams& hp) {
  const double nl = static_cast<double>(p.left_rows.size());
  const double nr = static_cast<double>(p.right_rows.size());
  const double sl = sum_over(residuals, p.left_rows);
  const double sr = sum_over(residuals, p.right_rows);
  const double pn = static_cast<double>(p.p_eta) * static_cast<double>(p.n_p_eta);

  const double transition = std::log(hp.p_prune / hp.p_grow) + std::log(static_cast<double>(p.b)) +
                            std::log(pn) - std::log(static_cast<double>(p.w_star));
  const double likelihood = log_likelihood_split(sigma2, sigma_mu2, nl, sl, nr, sr);
  const double structure = log_structure_grow(p.depth, hp) - std::log(pn);
  return transition + likelihood + structure;
}

double log_accept_prune(const MoveProposal& p, double sigma2, double sigma_mu2,
                        std::span<const double> residuals, const Hyperparams& hp) {
  const double nl = static_cast<double>(p.left_rows.size());
  const double nr = static_cast<double>(p.right_rows.size());
  const double sl = sum_over(residuals, p.left_rows);
  const double sr = sum_over(residuals, p.right_rows);
  const double pn = static_cast<double>(p.p_eta) * static_cast<double>(p.n_p_eta);

  const double transition = std::log(hp.p_grow / hp.p_prune) + std::log(static_cast<double>(p.w)) -
                            std::log(static_cast<double>(p.b - 1)) - std::log(pn);
  const double likelihood = -log_likelihood_split(sigma2, sigma_mu2, nl, sl, nr, sr);
  const double structure = -log_structure_grow(p.depth, hp) + std::log(pn);
  return transition + likelihood + structure;
}

double log_accept_change(const MoveProposal& p, double sigma2, double sigma_mu2,
                         std::span<const double> residuals) {
  const double k = sigma2 / sigma_mu2;
  const double n1 = static_cast<double>(p.old_left_rows.size());
  const double n2 = static_cast<double>(p.old_right_rows.size());
  const double n1s = static_cast<double>(p.left_rows.size());
  const double n2s = static_cast<double>(p.right_rows.size());
  const double s1 = sum_over(residuals, p.old_left_rows);
  const double s2 = sum_over(residuals, p.old_right_rows);
  const double s1s = sum_over(residuals, p.left_rows);
  const double s2s = sum_over(residuals, p.right_rows);

  const double det = 0.5 * ((std::log(k + n1) - std::log(k + n1s)) + (std::log(k + n2) - std::log(k + n2s)));
  const double quad = (s1s * s1s / (n1s + k) - s1 * s1 / (n1 + k)) + (s2s * s2s / (n2s + k) - s2 * s2 / (n2 + k));
  return det + quad / (2.0 * sigma2);
}

double log_accept(const MoveProposal& proposal, double sigma2, double sigma_mu2,
                  std::span<const double> residuals, const Hyperparams& hp) {
  switch (proposal.kind) {
    case MoveKind::Grow: return log_accept_grow(proposal, sigma2, sigma_mu2, residuals, hp);
    case MoveKind::Prune: return log_accept_prune(proposal, sigma2, sigma_mu2, residuals, hp);
    case MoveKind::Change: return log_accept_change(proposal, sigma2, sigma_mu2, residuals);
  }
  return -INFINITY;
}

void apply_move(Tree& tree, const MoveProposal& proposal, const Matrix& x) {
  switch (proposal.kind) {
    case MoveKind::Grow: tree.grow(proposal.node, proposal.rule, x); break;
    case MoveKind::Prune: tree.prune(proposal.node); break;
    case MoveKind::Change: tree.change(proposal.node, proposal.rule, x); break;
  }
}

}  // namespace bartcs
