#include "treegrad/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "treegrad/util.hpp"

namespace treegrad {

double SymmetricMatrix::max_abs() const {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

EigenDecomposition eig_sym(const SymmetricMatrix& m) {
  const int n = m.dim;
  if (n <= 0) throw std::invalid_argument("eig_sym: empty matrix");
  std::vector<double> a = m.a;  // working copy, mutated in place
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

  const double scale = m.max_abs();
  const double stop = 1e-12 * scale;
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  auto V = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i) * n + j]; };

  for (int sweep = 0; sweep < 100 && n > 1; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::fabs(A(p, q)));
    if (off <= stop) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = A(p, q);
        if (std::fabs(apq) <= stop * 1e-2) continue;
        double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);

        double app = A(p, p), aqq = A(q, q);
        A(p, p) = app - t * apq;
        A(q, q) = aqq + t * apq;
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          double akp = A(k, p), akq = A(k, q);
          A(k, p) = akp - s * (akq + tau * akp);
          A(p, k) = A(k, p);
          A(k, q) = akq + s * (akp - tau * akq);
          A(q, k) = A(k, q);
        }
        for (int k = 0; k < n; ++k) {
          double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = vkp - s * (vkq + tau * vkp);
          V(k, q) = vkq + s * (vkp - tau * vkq);
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return A(i, i) > A(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors.assign(n, std::vector<double>(n));
  for (int k = 0; k < n; ++k) {
    int src = order[k];
    out.values[k] = A(src, src);
    auto& col = out.vectors[k];
    for (int i = 0; i < n; ++i) col[i] = V(i, src);
    int big = 0;
    for (int i = 1; i < n; ++i)
      if (std::fabs(col[i]) > std::fabs(col[big])) big = i;
    if (col[big] < 0.0)
      for (double& x : col) x = -x;
  }
  return out;
}

SymmetricMatrix sqrt_psd(const SymmetricMatrix& m) {
  EigenDecomposition e = eig_sym(m);
  const double scale = m.max_abs();
  for (double lam : e.values)
    if (lam < -1e-10 * scale)
      throw std::invalid_argument("sqrt_psd: matrix has a negative eigenvalue " + format_double(lam));
  const int n = m.dim;
  SymmetricMatrix out(n);
  std::vector<double> root(n);
  for (int k = 0; k < n; ++k) root[k] = std::sqrt(std::max(0.0, e.values[k]));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += e.vectors[k][i] * root[k] * e.vectors[k][j];
      out.set(i, j, s);
    }
  }
  return out;
}

namespace {

void check_orthonormal(const std::vector<std::vector<double>>& basis, const char* which) {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = i; j < basis.size(); ++j) {
      double g = dot(basis[i], basis[j]);
      double want = (i == j) ? 1.0 : 0.0;
      if (std::fabs(g - want) > 1e-8)
        throw std::invalid_argument(std::string("principal_angle: basis '") + which + "' is not orthonormal");
    }
  }
}

}  // namespace

double principal_angle(const std::vector<std::vector<double>>& u,
                       const std::vector<std::vector<double>>& v) {
  if (u.empty() || v.empty()) throw std::invalid_argument("principal_angle: empty basis");
  if (u.size() != v.size()) throw std::invalid_argument("principal_angle: subspace dimensions differ");
  const std::size_t p = u[0].size();
  for (const auto& col : u)
    if (col.size() != p) throw std::invalid_argument("principal_angle: ragged basis");
  for (const auto& col : v)
    if (col.size() != p) throw std::invalid_argument("principal_angle: ambient dimensions differ");
  check_orthonormal(u, "u");
  check_orthonormal(v, "v");

  const int d = static_cast<int>(u.size());
  // Smallest singular value of the d x d cross-Gram matrix, via the
  // eigenvalues of its symmetric square.
  SymmetricMatrix g(d);
  std::vector<std::vector<double>> cross(d, std::vector<double>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) cross[i][j] = dot(u[i], v[j]);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += cross[k][i] * cross[k][j];
      g.set(i, j, s);
    }
  }
  EigenDecomposition e = eig_sym(g);
  double smin2 = e.values.back();
  double smin = std::sqrt(std::max(0.0, smin2));
  if (smin > 1.0) smin = 1.0;
  return std::acos(smin);
}

}  // namespace treegrad
