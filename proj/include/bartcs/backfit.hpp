#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "bartcs/core_data.hpp"
#include "bartcs/moves.hpp"
#include "bartcs/priors.hpp"
#include "bartcs/random.hpp"
#include "bartcs/tree.hpp"

namespace bartcs {

enum class ModelRole { Exposure, OutcomeMarginal, OutcomeArm0, OutcomeArm1 };

std::string_view to_string(ModelRole role);

// One sum-of-trees model with its own design matrix and response. The
// per-tree fits and their total are cached; split counts per design column
// are kept in step with the forest.
struct ModelState {
  ModelRole role = ModelRole::OutcomeMarginal;
  Matrix x;
  std::vector<double> response;
  LeafPrior prior;
  std::vector<Tree> trees;
  std::vector<std::vector<double>> tree_fit;
  std::vector<double> total_fit;
  double sigma2 = 1.0;
  bool fixed_sigma2 = false;
  std::vector<long> split_counts;

  std::size_t num_rows() const noexcept { return response.size(); }
  std::size_t num_trees() const noexcept { return trees.size(); }
};

// Forest of stumps at the prior leaf mean.
ModelState make_model_state(ModelRole role, Matrix x, std::vector<double> response,
                            const LeafPrior& prior, double sigma2, bool fixed_sigma2);

// response - sum of the fits of every tree but `h`.
void partial_residuals(const ModelState& state, std::size_t h, std::span<double> out);
std::vector<double> partial_residuals(const ModelState& state, std::size_t h);

// Largest absolute gap between the cached total fit and a fresh evaluation
// of every tree.
double cache_error(const ModelState& state);

struct SweepLog {
  std::array<long, 3> proposed{};
  std::array<long, 3> accepted{};
  long skipped = 0;

  void add(const SweepLog& other);
};

struct SweepOptions {
  bool force_reject = false;
};

// One backfitting pass: per tree, propose and accept/reject a move, then
// redraw its leaves; after all trees, redraw sigma2 unless it is fixed.
// `selection` holds the split-variable probabilities over the columns of x.
SweepLog sweep(ModelState& state, std::span<const double> selection, const Hyperparams& hp,
               Rng& rng, SweepOptions options = {});

// Redraws the probit latents from the current fit, then sweeps with
// sigma2 held at 1.
SweepLog probit_sweep(ModelState& state, std::span<const double> a,
                      std::span<const double> selection, const Hyperparams& hp, Rng& rng,
                      SweepOptions options = {});

}  // namespace bartcs
