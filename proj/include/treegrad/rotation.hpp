#pragma once

#include <string>
#include <vector>

#include "treegrad/dataset.hpp"
#include "treegrad/integrodiff.hpp"
#include "treegrad/rng.hpp"

namespace treegrad {

// Derived feature columns appended to a design matrix: column j holds
// scale_j * (x - center) . direction_j.  Axis-aligned tree fits are invariant
// to per-column affine maps, so the scales only document magnitude.
struct RotationColumns {
  std::vector<std::vector<double>> directions;
  std::vector<double> scales;
  std::vector<double> center;
  std::string label;

  int count() const { return static_cast<int>(directions.size()); }
};

// Number of appended components used by default: ceil(sqrt(P)).
int component_count(int dim);

// Top eigen-directions of the subspace matrix, scaled by sqrt(eigenvalue) so
// the appended columns carry the matrix square root's leading coordinates.
RotationColumns subspace_rotation(const SubspaceResult& s, int count);

// Centered principal components of the feature matrix.
RotationColumns pca_rotation(const Dataset& features, int count);

// Orthonormalized Gaussian directions (uniform over orthonormal frames).
RotationColumns random_rotation(int dim, int count, RngStream& rng);

// Copy of d with the derived columns appended after the original features,
// named <prefix>1, <prefix>2, ...  Originals are left untouched.
Dataset augment(const Dataset& d, const RotationColumns& cols, const std::string& prefix);

}  // namespace treegrad
