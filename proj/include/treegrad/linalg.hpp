#pragma once

#include <span>
#include <vector>

namespace treegrad {

// Dense symmetric matrix, row-major.  set() writes both triangles so the
// storage is always exactly symmetric.
struct SymmetricMatrix {
  int dim = 0;
  std::vector<double> a;  // dim * dim

  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int p) : dim(p), a(static_cast<std::size_t>(p) * p, 0.0) {}

  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * dim + j]; }
  void set(int i, int j, double v) {
    a[static_cast<std::size_t>(i) * dim + j] = v;
    a[static_cast<std::size_t>(j) * dim + i] = v;
  }
  void add(int i, int j, double v) { set(i, j, at(i, j) + v); }

  // Largest absolute entry; the scale used by convergence and PSD tolerances.
  double max_abs() const;
};

struct EigenDecomposition {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k], unit norm
};

// Cyclic Jacobi iteration.  Sweeps the strict upper triangle in a fixed row
// order until every off-diagonal entry is at most 1e-12 times the largest
// absolute entry of the input, or 100 sweeps pass.  Eigenvalues are returned
// in descending order and each vector's largest-magnitude component is made
// positive, so equal inputs give bit-equal outputs.
EigenDecomposition eig_sym(const SymmetricMatrix& m);

// Symmetric square root.  Eigenvalues in [-1e-10 * max_abs, 0) are treated as
// zero; anything more negative throws std::invalid_argument.
SymmetricMatrix sqrt_psd(const SymmetricMatrix& m);

// Largest principal angle between the column spans of u and v, each given as a
// list of orthonormal columns of equal dimension.  Computed from the smallest
// singular value of the cross-Gram matrix u^T v, which for one-column bases
// reduces to arccos |u . v|.  Throws std::invalid_argument if either basis is
// not orthonormal to within 1e-8.
double principal_angle(const std::vector<std::vector<double>>& u,
                       const std::vector<std::vector<double>>& v);

}  // namespace treegrad
