#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bartcs/core_data.hpp"
#include "bartcs/random.hpp"
#include "bartcs/tree.hpp"

namespace bartcs {

enum class MoveKind { Grow, Prune, Change };

std::string_view to_string(MoveKind kind);

// Everything the Metropolis-Hastings ratio of a move needs, captured at
// proposal time so the ratio is a pure function of the proposal, the two
// variances and the residuals.
struct MoveProposal {
  MoveKind kind = MoveKind::Grow;
  int node = -1;
  // Grow and Change: the proposed rule. Prune: the rule being removed.
  SplitRule rule;
  std::size_t b = 0;        // terminal nodes in the current tree
  std::size_t w = 0;        // singly internal nodes in the current tree
  std::size_t w_star = 0;   // singly internal nodes in the proposed tree
  std::size_t p_eta = 0;    // predictors available to split at the node
  std::size_t n_p_eta = 0;  // cutpoints left for the rule's variable at the node
  int depth = 0;
  // Grow and Change: children after the move. Prune: children being merged.
  std::vector<std::size_t> left_rows;
  std::vector<std::size_t> right_rows;
  // Change only: children before the move.
  std::vector<std::size_t> old_left_rows;
  std::vector<std::size_t> old_right_rows;
};

// beta1 / (1 + depth)^beta2
double depth_split_prob(int depth, double beta1, double beta2);

// Draws Grow/Prune/Change with the configured probabilities; a stump only
// admits Grow.
MoveKind sample_move_kind(Rng& rng, const Tree& tree, const Hyperparams& hp);

// Variable drawn from `selection` restricted to `available` and renormalized.
// Falls back to a uniform draw when every available weight is zero.
int sample_split_variable(Rng& rng, std::span<const double> selection, std::span<const int> available);

// Random proposals. An empty result means the move has no applicable target
// (no growable terminal node, or no singly internal node); the caller skips
// the tree for this sweep.
std::optional<MoveProposal> propose_grow(const Tree& tree, const Matrix& x,
                                         std::span<const double> selection, Rng& rng);
std::optional<MoveProposal> propose_prune(const Tree& tree, const Matrix& x, Rng& rng);
std::optional<MoveProposal> propose_change(const Tree& tree, const Matrix& x,
                                           std::span<const double> selection, Rng& rng);

// Deterministic builders for a given target and rule.
MoveProposal make_grow_proposal(const Tree& tree, const Matrix& x, int leaf, SplitRule rule);
MoveProposal make_prune_proposal(const Tree& tree, const Matrix& x, int node);
MoveProposal make_change_proposal(const Tree& tree, const Matrix& x, int node, SplitRule rule);

// Log acceptance ratios. `residuals` are the partial residuals of the tree,
// indexed by training row and measured from the leaf prior mean.
double log_accept_grow(const MoveProposal& proposal, double sigma2, double sigma_mu2,
                       std::span<const double> residuals, const Hyperparams& hp);
double log_accept_prune(const MoveProposal& proposal, double sigma2, double sigma_mu2,
                        std::span<const double> residuals, const Hyperparams& hp);
double log_accept_change(const MoveProposal& proposal, double sigma2, double sigma_mu2,
                         std::span<const double> residuals);
double log_accept(const MoveProposal& proposal, double sigma2, double sigma_mu2,
                  std::span<const double> residuals, const Hyperparams& hp);

void apply_move(Tree& tree, const MoveProposal& proposal, const Matrix& x);

}  // namespace bartcs
