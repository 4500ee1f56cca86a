#pragma once

#include <span>
#include <string>
#include <vector>

namespace treegrad {

// Feature matrix plus response, row-major.  Loaders and generators call
// validate(), so downstream code can assume finite values and consistent
// shapes.
struct Dataset {
  int rows = 0;
  int cols = 0;
  std::vector<double> x;  // rows * cols
  std::vector<double> y;  // rows
  std::vector<std::string> feature_names;

  double at(int r, int c) const { return x[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const double> row(int r) const {
    return {x.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  void validate() const;  // throws std::runtime_error on shape or NaN problems
};

// Per-feature affine map onto [0, 1].  Constant features cannot be scaled;
// they map to 0.5 and are flagged, and their gradients are reported as 0.
struct Normalizer {
  std::vector<double> lo, hi;
  std::vector<bool> constant;

  int dim() const { return static_cast<int>(lo.size()); }
  double forward(int p, double v) const {
    return constant[p] ? 0.5 : (v - lo[p]) / (hi[p] - lo[p]);
  }
  double inverse(int p, double t) const {
    return constant[p] ? lo[p] : lo[p] + t * (hi[p] - lo[p]);
  }
  std::vector<double> forward_point(std::span<const double> v) const;

  static Normalizer fit(const Dataset& d);
};

// Loads a CSV with a mandatory header row.  The named target column becomes y;
// all other columns must be numeric and become features in file order.
// Quoted fields and CRLF line endings are accepted.  Errors name the file
// line and column involved.
Dataset load_csv(const std::string& path, const std::string& target);

// Applies Normalizer::fit to a copy of the dataset's features.
std::pair<Dataset, Normalizer> normalize_unit_cube(const Dataset& d);

}  // namespace treegrad
