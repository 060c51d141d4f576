#include "bartcs/tree.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

namespace bartcs {

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Tree::Tree(std::size_t n_rows, double mu) : leaf_of_row_(n_rows, kRoot) {
  TreeNode root;
  root.mu = mu;
  nodes_.push_back(root);
  live_.push_back(1);
}

int Tree::allocate() {
  if (!free_.empty()) {
    int id = free_.back();
    free_.pop_back();
    nodes_[id] = TreeNode{};
    live_[id] = 1;
    return id;
  }
  nodes_.emplace_back();
  live_.push_back(1);
  return static_cast<int>(nodes_.size()) - 1;
}

void Tree::release(int id) {
  live_[id] = 0;
  free_.push_back(id);
}

std::vector<int> Tree::terminal_nodes() const {
  std::vector<int> out;
  out.reserve(num_terminal_);
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (live_[id] && nodes_[id].terminal()) out.push_back(static_cast<int>(id));
  }
  return out;
}

bool Tree::is_singly_internal(int id) const {
  const TreeNode& n = nodes_[id];
  return !n.terminal() && nodes_[n.left].terminal() && nodes_[n.right].terminal();
}

std::vector<int> Tree::singly_internal_nodes() const {
  std::vector<int> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (live_[id] && is_singly_internal(static_cast<int>(id))) out.push_back(static_cast<int>(id));
  }
  return out;
}

std::vector<std::size_t> Tree::rows_of(int id) const {
  std::vector<std::size_t> rows;
  if (nodes_[id].terminal()) {
    for (std::size_t i = 0; i < leaf_of_row_.size(); ++i) {
      if (leaf_of_row_[i] == id) rows.push_back(i);
    }
    return rows;
  }
  for (std::size_t i = 0; i < leaf_of_row_.size(); ++i) {
    int cur = leaf_of_row_[i];
    while (cur >= 0 && cur != id) cur = nodes_[cur].parent;
    if (cur == id) rows.push_back(i);
  }
  return rows;
}

std::vector<std::vector<std::size_t>> Tree::rows_by_leaf() const {
  std::vector<std::vector<std::size_t>> rows(nodes_.size());
  for (std::size_t i = 0; i < leaf_of_row_.size(); ++i) rows[leaf_of_row_[i]].push_back(i);
  return rows;
}

void Tree::grow(int leaf, SplitRule rule, const Matrix& x) {
  const int left = allocate();
  const int right = allocate();
  TreeNode& parent = nodes_[leaf];
  parent.rule = rule;
  parent.left = left;
  parent.right = right;
  for (int child : {left, right}) {
    nodes_[child].parent = leaf;
    nodes_[child].depth = parent.depth + 1;
    nodes_[child].mu = parent.mu;
  }
  auto column = x.col(rule.var);
  for (std::size_t i = 0; i < leaf_of_row_.size(); ++i) {
    if (leaf_of_row_[i] == leaf) leaf_of_row_[i] = rule.goes_left(column[i]) ? left : right;
  }
  ++num_terminal_;
}

void Tree::prune(int id) {
  TreeNode& n = nodes_[id];
  const int left = n.left;
  const int right = n.right;
  for (int& leaf : leaf_of_row_) {
    if (leaf == left || leaf == right) leaf = id;
  }
  release(left);
  release(right);
  n.left = -1;
  n.right = -1;
  n.rule = SplitRule{};
  --num_terminal_;
}

void Tree::change(int id, SplitRule rule, const Matrix& x) {
  TreeNode& n = nodes_[id];
  n.rule = rule;
  auto column = x.col(rule.var);
  for (std::size_t i = 0; i < leaf_of_row_.size(); ++i) {
    int& leaf = leaf_of_row_[i];
    if (leaf == n.left || leaf == n.right) leaf = rule.goes_left(column[i]) ? n.left : n.right;
  }
}

int Tree::descend(const Matrix& x, std::size_t row) const {
  int id = kRoot;
  while (!nodes_[id].terminal()) {
    const TreeNode& n = nodes_[id];
    id = n.rule.goes_left(x(row, n.rule.var)) ? n.left : n.right;
  }
  return id;
}

CompactTree Tree::compact() const {
  CompactTree out;
  std::function<int(int, int)> copy = [&](int id, int parent) -> int {
    const int at = static_cast<int>(out.nodes.size());
    TreeNode n = nodes_[id];
    n.parent = parent;
    out.nodes.push_back(n);
    if (!n.terminal()) {
      const int l = copy(n.left, at);
      const int r = copy(n.right, at);
      out.nodes[at].left = l;
      out.nodes[at].right = r;
    }
    return at;
  };
  copy(kRoot, -1);
  return out;
}

std::string Tree::dump() const {
  std::string out;
  std::function<void(int)> visit = [&](int id) {
    const TreeNode& n = nodes_[id];
    out.append(static_cast<std::size_t>(2 * n.depth), ' ');
    if (n.terminal()) {
      out += "L(mu=" + format_real(n.mu) + ")\n";
    } else {
      out += "I(var=" + std::to_string(n.rule.var) + ", cut=" + format_real(n.rule.cut) + ")\n";
      visit(n.left);
      visit(n.right);
    }
  };
  visit(kRoot);
  return out;
}

std::string Tree::check_invariants(const Matrix& x) const {
  if (!live_[kRoot] || nodes_[kRoot].parent != -1 || nodes_[kRoot].depth != 0) return "bad root";
  std::size_t terminals = 0;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (!live_[id]) continue;
    const TreeNode& n = nodes_[id];
    if (n.terminal()) {
      if (n.right >= 0) return "terminal node " + std::to_string(id) + " has a right child";
      ++terminals;
      continue;
    }
    if (n.right < 0 || !live_[n.left] || !live_[n.right]) {
      return "internal node " + std::to_string(id) + " lacks two live children";
    }
    for (int child : {n.left, n.right}) {
      if (nodes_[child].parent != static_cast<int>(id)) return "broken parent link";
      if (nodes_[child].depth != n.depth + 1) return "inconsistent depth";
    }
  }
  if (terminals != num_terminal_) return "terminal count out of sync";
  std::vector<std::size_t> occupancy(nodes_.size(), 0);
  for (std::size_t i = 0; i < leaf_of_row_.size(); ++i) {
    const int leaf = leaf_of_row_[i];
    if (leaf < 0 || static_cast<std::size_t>(leaf) >= nodes_.size() || !live_[leaf] ||
        !nodes_[leaf].terminal()) {
      return "row " + std::to_string(i) + " maps to a non-terminal node";
    }
    if (descend(x, i) != leaf) return "row " + std::to_string(i) + " routes elsewhere";
    ++occupancy[leaf];
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (live_[id] && nodes_[id].terminal() && occupancy[id] == 0) {
      return "terminal node " + std::to_string(id) + " is empty";
    }
  }
  return {};
}

std::vector<double> valid_cutpoints(const Matrix& x, std::span<const std::size_t> rows, int var) {
  auto column = x.col(static_cast<std::size_t>(var));
  std::vector<double> values;
  values.reserve(rows.size());
  for (std::size_t r : rows) values.push_back(column[r]);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (!values.empty()) values.pop_back();
  return values;
}

std::vector<double> valid_cutpoints(const Tree& tree, int node, int var, const Matrix& x) {
  return valid_cutpoints(x, tree.rows_of(node), var);
}

bool is_splittable(const Matrix& x, std::span<const std::size_t> rows, int var) {
  if (rows.size() < 2) return false;
  auto column = x.col(static_cast<std::size_t>(var));
  const double first = column[rows[0]];
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (column[rows[k]] != first) return true;
  }
  return false;
}

std::vector<int> available_predictors(const Matrix& x, std::span<const std::size_t> rows) {
  std::vector<int> out;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    if (is_splittable(x, rows, static_cast<int>(j))) out.push_back(static_cast<int>(j));
  }
  return out;
}

std::vector<int> available_predictors(const Tree& tree, int node, const Matrix& x) {
  return available_predictors(x, tree.rows_of(node));
}

std::size_t singly_internal_count(const Tree& tree) { return tree.singly_internal_nodes().size(); }

std::vector<long> split_counts(std::span<const Tree> forest, std::size_t num_vars) {
  std::vector<long> counts(num_vars, 0);
  for (const Tree& tree : forest) {
    for (std::size_t id = 0; id < tree.capacity(); ++id) {
      if (!tree.is_live(static_cast<int>(id))) continue;
      const TreeNode& n = tree.node(static_cast<int>(id));
      if (!n.terminal()) ++counts[static_cast<std::size_t>(n.rule.var)];
    }
  }
  return counts;
}

std::vector<double> forest_fit(std::span<const Tree> forest, const Matrix& x) {
  std::vector<double> fit(x.rows(), 0.0);
  for (const Tree& tree : forest) {
    for (std::size_t i = 0; i < x.rows(); ++i) fit[i] += tree.evaluate(x, i);
  }
  return fit;
}

}  // namespace bartcs
