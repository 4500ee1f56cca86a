#include "treegrad/gradfield.hpp"

#include <ostream>

#include "treegrad/util.hpp"

namespace treegrad {

GradientField::GradientField(std::shared_ptr<const RegressionTree> tree) : tree_(std::move(tree)) {
  const RegressionTree& t = *tree_;
  const int p = t.dim();
  const int n = t.node_count();
  data_.assign(static_cast<std::size_t>(n) * p, 0.0);
  // Parents precede children in the node array, so one forward pass sees every
  // parent vector before it is inherited.
  for (int i = 0; i < n; ++i) {
    const TreeNode& nd = t.node(i);
    double* row = data_.data() + static_cast<std::size_t>(i) * p;
    if (nd.parent >= 0) {
      const double* parent_row = data_.data() + static_cast<std::size_t>(nd.parent) * p;
      for (int k = 0; k < p; ++k) row[k] = parent_row[k];
    }
    if (!nd.is_leaf()) {
      const TreeSplit& sp = *nd.split;
      double rise = t.node(sp.right).value - t.node(sp.left).value;
      double extent = nd.upper[sp.variable] - nd.lower[sp.variable];
      row[sp.variable] = 2.0 * rise / extent;
    }
  }
}

GradientField GradientField::extract(const RegressionTree& tree) {
  return GradientField(std::make_shared<const RegressionTree>(tree));
}

GradientField GradientField::extract(std::shared_ptr<const RegressionTree> tree) {
  return GradientField(std::move(tree));
}

std::vector<std::vector<double>> GradientField::grad_dataset(
    const std::vector<std::vector<double>>& points) const {
  std::vector<std::vector<double>> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    std::span<const double> g = grad_at(x);
    out.emplace_back(g.begin(), g.end());
  }
  return out;
}

void GradientField::export_leaves(std::ostream& out) const {
  const RegressionTree& t = *tree_;
  std::vector<int> leaves = t.leaf_indices();
  out << "leafgrad v1\n";
  out << "dim " << dim() << "\n";
  out << "leaves " << leaves.size() << "\n";
  for (int idx : leaves) {
    const TreeNode& nd = t.node(idx);
    out << "leaf " << idx << " lower";
    for (double v : nd.lower) out << ' ' << format_double(v);
    out << " upper";
    for (double v : nd.upper) out << ' ' << format_double(v);
    out << " grad";
    for (double v : node_gradient(idx)) out << ' ' << format_double(v);
    out << "\n";
  }
  out << "end leafgrad\n";
}

}  // namespace treegrad
