#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "treegrad/tree.hpp"

namespace treegrad {

// Piecewise-constant gradient estimate read off a fitted tree's structure.
//
// Each split carries a finite-difference slope across its own threshold,
//
//   gamma = 2 * (right child value - left child value) / cell extent on the
//           split variable,
//
// the difference of the two child means divided by the distance between the
// child cell centers.  A node's gradient vector starts as a copy of its
// parent's (zeros at the root) and, when the node itself splits, coordinate
// `variable` is overwritten with that node's gamma.  Deeper splits therefore
// refine shallower ones, and a coordinate never split on the path to a node
// stays exactly 0.  Evaluating at a point returns the vector of the leaf
// containing it.
class GradientField {
 public:
  static GradientField extract(const RegressionTree& tree);
  static GradientField extract(std::shared_ptr<const RegressionTree> tree);

  const RegressionTree& tree() const { return *tree_; }
  int dim() const { return tree_->dim(); }

  std::span<const double> node_gradient(int node) const {
    return {data_.data() + static_cast<std::size_t>(node) * dim(), static_cast<std::size_t>(dim())};
  }

  // Gradient of the leaf cell containing x (clamped onto the root cell).
  std::span<const double> grad_at(std::span<const double> x) const {
    return node_gradient(tree_->locate_leaf(x));
  }

  std::vector<std::vector<double>> grad_dataset(const std::vector<std::vector<double>>& points) const;

  // One record per leaf: index, cell bounds, gradient vector.
  void export_leaves(std::ostream& out) const;

 private:
  explicit GradientField(std::shared_ptr<const RegressionTree> tree);

  std::shared_ptr<const RegressionTree> tree_;
  std::vector<double> data_;  // node_count * dim
};

}  // namespace treegrad
