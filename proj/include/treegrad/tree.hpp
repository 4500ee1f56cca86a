#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treegrad/dataset.hpp"
#include "treegrad/rng.hpp"

namespace treegrad {

struct TreeSplit {
  int variable = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
};

// One node of an axis-aligned partition tree.  Bounds describe the node's
// cell; a point with x[variable] <= threshold belongs to the left child, so
// the left cell is closed at the threshold and the right cell is open.
struct TreeNode {
  int parent = -1;
  int depth = 0;
  int count = 0;
  double value = 0.0;
  std::vector<double> lower, upper;
  std::optional<TreeSplit> split;

  bool is_leaf() const { return !split.has_value(); }
};

enum class FitMode { Cart, CyclicMedian };
enum class DepthSchedule { Fixed, LogLog };

struct FitConfig {
  FitMode mode = FitMode::Cart;
  int max_depth = 6;
  int min_leaf = 1;
  // LogLog grows cyclic-median trees to ceil(scale * P * log2 log2 N) instead
  // of max_depth.
  DepthSchedule schedule = DepthSchedule::Fixed;
  double schedule_scale = 1.0;
  std::uint64_t seed = 0;
};

int loglog_depth(int n, int dim, double scale);

// Constant-leaf regression tree over a box domain.  Nodes are stored in
// breadth-first insertion order, so a parent's index is always smaller than
// its children's and whole depth levels are contiguous.
class RegressionTree {
 public:
  // Validates structure: index ordering, cell nesting, split sanity.  Throws
  // std::invalid_argument on violations.
  RegressionTree(int dim, std::vector<TreeNode> nodes, FitConfig meta = {});

  static RegressionTree fit(const Dataset& data, const FitConfig& cfg);

  int dim() const { return dim_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(int i) const { return nodes_[i]; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const FitConfig& meta() const { return meta_; }

  int depth() const;
  int leaf_count() const;
  std::vector<int> leaf_indices() const;
  std::vector<int> nodes_at_depth(int k) const;

  double predict(std::span<const double> x) const;

  struct Located {
    int index;
    bool exact_depth;  // false when the walk ended at a shallower leaf
  };
  // Node whose cell contains x at the given depth.  Query points outside the
  // root cell are clamped onto it first.
  Located locate(std::span<const double> x, int target_depth) const;
  int locate_leaf(std::span<const double> x) const;

  std::vector<double> clamp_to_root(std::span<const double> x) const;

  // Structured text round-trip; numbers keep full precision, so
  // save(load(s)) == s byte for byte.
  void save(std::ostream& out) const;
  static RegressionTree load(std::istream& in);
  void save_file(const std::string& path) const;
  static RegressionTree load_file(const std::string& path);

  // Copy with replaced node values; structure and bounds are untouched.
  RegressionTree with_values(const std::vector<double>& values) const;

  // Shared by the ensemble module: fit on a subset of rows, optionally
  // restricting each split search to a random draw of features.
  static RegressionTree fit_rows(const Dataset& data, const FitConfig& cfg,
                                 std::vector<int> rows, double feature_fraction,
                                 RngStream& rng);

 private:
  int dim_;
  std::vector<TreeNode> nodes_;
  FitConfig meta_;
};

// Incremental construction for hand-built trees.  Nodes get indices in call
// order; splitting in breadth-first order therefore reproduces the indexing
// of a fitted tree.  Child bounds are derived from the parent cell.
class TreeBuilder {
 public:
  explicit TreeBuilder(int dim);  // unit cube root
  TreeBuilder(int dim, std::vector<double> lower, std::vector<double> upper);

  void set_root(double value, int count = 0);
  // Returns the child indices (left, right).
  std::pair<int, int> split(int node, int variable, double threshold,
                            double left_value, double right_value,
                            int left_count = 0, int right_count = 0);
  RegressionTree build(FitConfig meta = {}) const;

 private:
  int dim_;
  std::vector<TreeNode> nodes_;
};

}  // namespace treegrad
