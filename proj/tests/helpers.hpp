// Shared fixtures and independent reference implementations for the tests.
// The reference code here is deliberately naive (cofactor determinants,
// two-pass statistics, central differences) so it cannot share a bug with the
// library's optimized paths.

#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "treegrad/linalg.hpp"

namespace testutil {

// Determinant by cofactor expansion along the first row.  Fine up to 6x6.
inline double det_cofactor(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return m[0][0];
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<double>> minor(n - 1, std::vector<double>(n - 1));
    for (std::size_t r = 1; r < n; ++r) {
      std::size_t cc = 0;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == j) continue;
        minor[r - 1][cc++] = m[r][c];
      }
    }
    sum += (j % 2 == 0 ? 1.0 : -1.0) * m[0][j] * det_cofactor(minor);
  }
  return sum;
}

inline std::vector<std::vector<double>> to_rows(const treegrad::SymmetricMatrix& m) {
  std::vector<std::vector<double>> out(m.dim, std::vector<double>(m.dim));
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j) out[i][j] = m.at(i, j);
  return out;
}

inline std::vector<double> mat_vec(const treegrad::SymmetricMatrix& m,
                                   const std::vector<double>& v) {
  std::vector<double> out(m.dim, 0.0);
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j) out[i] += m.at(i, j) * v[j];
  return out;
}

// Central difference gradient, the oracle for analytic derivatives.
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) {
    const double keep = x[p];
    x[p] = keep + h;
    const double up = f(x);
    x[p] = keep - h;
    const double dn = f(x);
    x[p] = keep;
    g[p] = (up - dn) / (2.0 * h);
  }
  return g;
}

inline double linf(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Scratch directory per test process, removed by the OS eventually; unique so
// parallel ctest invocations cannot collide.
inline std::filesystem::path scratch_dir() {
  static std::filesystem::path dir = [] {
    auto base = std::filesystem::temp_directory_path() /
                ("treegrad_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(base);
    return base;
  }();
  return dir;
}

inline std::string write_file(const std::string& name, const std::string& body) {
  auto path = scratch_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << body;
  return path.string();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return body;
}

}  // namespace testutil
