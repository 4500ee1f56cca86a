#include "treegrad/rotation.hpp"

#include <cmath>
#include <stdexcept>

#include "treegrad/linalg.hpp"
#include "treegrad/util.hpp"

namespace treegrad {

int component_count(int dim) {
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(dim))));
}

RotationColumns subspace_rotation(const SubspaceResult& s, int count) {
  const int dim = s.matrix.dim;
  if (count < 1 || count > dim) throw std::invalid_argument("rotation: bad component count");
  RotationColumns out;
  out.label = "tbas";
  out.center.assign(dim, 0.0);
  for (int j = 0; j < count; ++j) {
    out.directions.push_back(s.eigenvectors[j]);
    out.scales.push_back(std::sqrt(std::max(0.0, s.eigenvalues[j])));
  }
  return out;
}

RotationColumns pca_rotation(const Dataset& features, int count) {
  const int dim = features.cols;
  if (count < 1 || count > dim) throw std::invalid_argument("rotation: bad component count");
  std::vector<double> mean(dim, 0.0);
  for (int r = 0; r < features.rows; ++r)
    for (int p = 0; p < dim; ++p) mean[p] += features.at(r, p);
  for (double& m : mean) m /= static_cast<double>(features.rows);

  SymmetricMatrix cov(dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      double s = 0.0;
      for (int r = 0; r < features.rows; ++r)
        s += (features.at(r, i) - mean[i]) * (features.at(r, j) - mean[j]);
      cov.set(i, j, s / static_cast<double>(features.rows));
    }
  }
  EigenDecomposition e = eig_sym(cov);

  RotationColumns out;
  out.label = "pca";
  out.center = std::move(mean);
  for (int j = 0; j < count; ++j) {
    out.directions.push_back(e.vectors[j]);
    out.scales.push_back(1.0);
  }
  return out;
}

RotationColumns random_rotation(int dim, int count, RngStream& rng) {
  if (count < 1 || count > dim) throw std::invalid_argument("rotation: bad component count");
  RotationColumns out;
  out.label = "random";
  out.center.assign(dim, 0.0);
  for (int j = 0; j < count; ++j) {
    std::vector<double> v(dim);
    for (;;) {
      for (int p = 0; p < dim; ++p) v[p] = rng.normal();
      // Gram-Schmidt against the accepted columns.
      for (const auto& q : out.directions) {
        double c = dot(v, q);
        for (int p = 0; p < dim; ++p) v[p] -= c * q[p];
      }
      double n = norm2(v);
      if (n > 1e-8) {
        for (double& x : v) x /= n;
        break;
      }
    }
    out.directions.push_back(v);
    out.scales.push_back(1.0);
  }
  return out;
}

Dataset augment(const Dataset& d, const RotationColumns& cols, const std::string& prefix) {
  d.validate();
  const int extra = cols.count();
  for (const auto& dir : cols.directions)
    if (dir.size() != static_cast<std::size_t>(d.cols))
      throw std::invalid_argument("rotation: direction dimension does not match the dataset");

  Dataset out;
  out.rows = d.rows;
  out.cols = d.cols + extra;
  out.y = d.y;
  out.feature_names = d.feature_names;
  if (out.feature_names.empty())
    for (int p = 0; p < d.cols; ++p) out.feature_names.push_back("x" + std::to_string(p + 1));
  for (int j = 0; j < extra; ++j) out.feature_names.push_back(prefix + std::to_string(j + 1));

  out.x.resize(static_cast<std::size_t>(out.rows) * out.cols);
  std::vector<double> centered(d.cols);
  for (int r = 0; r < d.rows; ++r) {
    double* dst = out.x.data() + static_cast<std::size_t>(r) * out.cols;
    for (int p = 0; p < d.cols; ++p) {
      dst[p] = d.at(r, p);
      centered[p] = d.at(r, p) - cols.center[p];
    }
    for (int j = 0; j < extra; ++j)
      dst[d.cols + j] = cols.scales[j] * dot(centered, cols.directions[j]);
  }
  out.validate();
  return out;
}

}  // namespace treegrad
