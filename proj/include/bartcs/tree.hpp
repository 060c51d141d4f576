#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bartcs/core_data.hpp"

namespace bartcs {

// Rows with x[var] <= cut go to the left child.
struct SplitRule {
  int var = -1;
  double cut = 0.0;

  bool goes_left(double x) const noexcept { return x <= cut; }
  bool operator==(const SplitRule&) const = default;
};

struct TreeNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  int depth = 0;
  SplitRule rule;
  double mu = 0.0;

  bool terminal() const noexcept { return left < 0; }
};

// Structure-only copy of a tree, used to keep posterior forests in a trace
// and evaluate them at arbitrary covariate values later.
struct CompactTree {
  std::vector<TreeNode> nodes;  // preorder, root at 0

  template <class Value>
  double evaluate(Value&& value) const {
    int id = 0;
    while (!nodes[id].terminal()) {
      const TreeNode& n = nodes[id];
      id = n.rule.goes_left(value(n.rule.var)) ? n.left : n.right;
    }
    return nodes[id].mu;
  }
};

// Binary decision tree over the rows of one training matrix. Nodes live in
// an arena addressed by index; the tree also tracks which terminal node every
// training row falls in, so moves only touch the rows of the affected node.
class Tree {
 public:
  static constexpr int kRoot = 0;

  Tree(std::size_t n_rows, double mu);

  const TreeNode& node(int id) const { return nodes_[id]; }
  std::size_t capacity() const noexcept { return nodes_.size(); }
  bool is_live(int id) const { return live_[id] != 0; }

  std::size_t num_terminal() const noexcept { return num_terminal_; }
  std::size_t num_internal() const noexcept { return num_terminal_ - 1; }
  bool is_stump() const noexcept { return nodes_[kRoot].terminal(); }
  std::size_t num_rows() const noexcept { return leaf_of_row_.size(); }

  std::vector<int> terminal_nodes() const;
  std::vector<int> singly_internal_nodes() const;
  bool is_singly_internal(int id) const;

  // Terminal node id of every training row.
  std::span<const int> row_map() const noexcept { return leaf_of_row_; }
  // Training rows reaching `id`, ascending.
  std::vector<std::size_t> rows_of(int id) const;
  // Rows of every terminal node, indexed by node id (empty for other ids).
  std::vector<std::vector<std::size_t>> rows_by_leaf() const;

  // Structural edits. Preconditions (checked by the move module): `grow` on a
  // terminal node with a rule that leaves both children non-empty; `prune`
  // and `change` on a singly internal node.
  void grow(int leaf, SplitRule rule, const Matrix& x);
  void prune(int id);
  void change(int id, SplitRule rule, const Matrix& x);
  void set_mu(int id, double mu) { nodes_[id].mu = mu; }

  template <class Value>
  double evaluate(Value&& value) const {
    int id = kRoot;
    while (!nodes_[id].terminal()) {
      const TreeNode& n = nodes_[id];
      id = n.rule.goes_left(value(n.rule.var)) ? n.left : n.right;
    }
    return nodes_[id].mu;
  }
  double evaluate(std::span<const double> row) const {
    return evaluate([row](int var) { return row[var]; });
  }
  double evaluate(const Matrix& x, std::size_t row) const {
    return evaluate([&x, row](int var) { return x(row, var); });
  }

  CompactTree compact() const;

  // One node per line, two spaces of indent per depth level:
  // `I(var=<j>, cut=<c>)` or `L(mu=<v>)`.
  std::string dump() const;

  // Empty when every structural invariant holds against `x`, otherwise a
  // description of the first violation.
  std::string check_invariants(const Matrix& x) const;

 private:
  int allocate();
  void release(int id);
  int descend(const Matrix& x, std::size_t row) const;

  std::vector<TreeNode> nodes_;
  std::vector<char> live_;
  std::vector<int> free_;
  std::vector<int> leaf_of_row_;
  std::size_t num_terminal_ = 1;
};

// Unique observed values of `var` over `rows`, ascending, without the
// largest one; splitting at any of them leaves both children non-empty.
std::vector<double> valid_cutpoints(const Matrix& x, std::span<const std::size_t> rows, int var);
std::vector<double> valid_cutpoints(const Tree& tree, int node, int var, const Matrix& x);

bool is_splittable(const Matrix& x, std::span<const std::size_t> rows, int var);

// Variables with at least one valid cutpoint over `rows`.
std::vector<int> available_predictors(const Matrix& x, std::span<const std::size_t> rows);
std::vector<int> available_predictors(const Tree& tree, int node, const Matrix& x);

// Internal nodes whose two children are both terminal.
std::size_t singly_internal_count(const Tree& tree);

// Internal nodes by splitting variable, summed over trees.
std::vector<long> split_counts(std::span<const Tree> forest, std::size_t num_vars);

// Sum over trees of each row's leaf value.
std::vector<double> forest_fit(std::span<const Tree> forest, const Matrix& x);

}  // namespace bartcs
