#pragma once

#include <iosfwd>
#include <vector>

#include "treegrad/gradfield.hpp"
#include "treegrad/integrodiff.hpp"
#include "treegrad/tree.hpp"

namespace treegrad {

struct BootstrapConfig {
  double sample_fraction = 1.0;
  bool with_replacement = true;
  double feature_fraction = 1.0;  // per-split candidate draw
};

// Bagged trees with per-tree gradient fields.  Tree t derives its seed as
// base + t, so a forest is reproducible tree by tree and may be fit in
// parallel without changing the result.  Gradient-level aggregates average
// across trees: grad_at averages the per-tree vectors and tbas averages the
// per-tree matrices.
class Forest {
 public:
  static Forest fit(const Dataset& data, const FitConfig& cfg, int tree_count,
                    const BootstrapConfig& boot = {}, int threads = 1);

  int tree_count() const { return static_cast<int>(fields_.size()); }
  int dim() const { return fields_[0].dim(); }
  const RegressionTree& tree(int t) const { return fields_[t].tree(); }
  const GradientField& field(int t) const { return fields_[t]; }
  const FitConfig& config() const { return cfg_; }
  const BootstrapConfig& bootstrap() const { return boot_; }

  double predict(std::span<const double> x) const;
  std::vector<double> grad_at(std::span<const double> x) const;

  SubspaceResult tbas(const Measure& m) const;
  SubspaceResult tbas_sampled(const Measure& m, int samples, std::uint64_t seed) const;

  // Path attribution with the averaged field: samples points on the segment
  // and averages the forest gradient there.
  AttributionResult tbig(std::span<const double> x, std::span<const double> x_ref, int samples,
                         std::uint64_t seed) const;

  void save(std::ostream& out) const;
  static Forest load(std::istream& in);
  void save_file(const std::string& path) const;
  static Forest load_file(const std::string& path);

  std::string describe() const;

 private:
  Forest(FitConfig cfg, BootstrapConfig boot, std::vector<GradientField> fields)
      : cfg_(cfg), boot_(boot), fields_(std::move(fields)) {}

  FitConfig cfg_;
  BootstrapConfig boot_;
  std::vector<GradientField> fields_;
};

}  // namespace treegrad
