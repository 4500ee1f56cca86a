#include "treegrad/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "treegrad/util.hpp"

namespace treegrad {

namespace {

constexpr double kTwoPi = 6.283185307179586477;
constexpr double kRidgeFreq = 6.0 * 3.14159265358979323846;

}  // namespace

void SyntheticSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("synthetic: dim must be at least 1");
  if (noise_sd < 0.0) throw std::invalid_argument("synthetic: negative noise");
  if (correlation < 0.0 || correlation > 0.99)
    throw std::invalid_argument("synthetic: correlation must lie in [0, 0.99]");
  if (fn == SyntheticFunction::Ackley) return;
  if (static_cast<int>(direction.size()) != dim)
    throw std::invalid_argument("synthetic: direction length does not match dim");
  int nz = 0;
  double n2 = 0.0;
  for (double v : direction) {
    if (v != 0.0) ++nz;
    n2 += v * v;
  }
  if (std::fabs(n2 - 1.0) > 1e-12)
    throw std::invalid_argument("synthetic: direction is not unit norm");
  if (nz > dim || sparsity > dim)
    throw std::invalid_argument("synthetic: sparsity exceeds dim");
  if (fn == SyntheticFunction::LogRidge)
    for (double v : direction)
      if (v < 0.0) throw std::invalid_argument("synthetic: log-ridge needs nonnegative direction entries");
}

std::vector<double> make_direction(int dim, int sparsity, RngStream& rng) {
  if (sparsity < 1 || sparsity > dim) throw std::invalid_argument("make_direction: bad sparsity");
  std::vector<int> coords(dim);
  for (int i = 0; i < dim; ++i) coords[i] = i;
  if (sparsity < dim) {
    for (int i = dim - 1; i > 0; --i) {
      int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
      std::swap(coords[i], coords[j]);
    }
  }
  std::vector<double> a(dim, 0.0);
  double n2 = 0.0;
  for (int k = 0; k < sparsity; ++k) {
    double v = std::fabs(rng.normal());
    if (v == 0.0) v = 1e-3;
    a[coords[k]] = v;
    n2 += v * v;
  }
  double inv = 1.0 / std::sqrt(n2);
  for (double& v : a) v *= inv;
  return a;
}

double synthetic_value(const SyntheticSpec& spec, std::span<const double> x) {
  switch (spec.fn) {
    case SyntheticFunction::RidgeCosine: {
      double s = 0.0;
      for (int p = 0; p < spec.dim; ++p) s += spec.direction[p] * (x[p] - 0.5);
      return std::cos(kRidgeFreq * s);
    }
    case SyntheticFunction::LogRidge: {
      double s = 0.0;
      for (int p = 0; p < spec.dim; ++p) s += spec.direction[p] * x[p];
      if (s <= -1.0) throw std::invalid_argument("log-ridge: 1 + a.x is not positive");
      return std::log1p(s);
    }
    case SyntheticFunction::Ackley: {
      const double d = spec.dim;
      double q = 0.0, c = 0.0;
      for (int p = 0; p < spec.dim; ++p) {
        double z = 4.0 * x[p] - 2.0;
        q += z * z;
        c += std::cos(kTwoPi * z);
      }
      double rms = std::sqrt(q / d);
      return -20.0 * std::exp(-0.2 * rms) - std::exp(c / d) + 20.0 + std::exp(1.0);
    }
  }
  throw std::invalid_argument("synthetic: unknown function");
}

std::vector<double> true_gradient(const SyntheticSpec& spec, std::span<const double> x) {
  std::vector<double> g(spec.dim, 0.0);
  switch (spec.fn) {
    case SyntheticFunction::RidgeCosine: {
      double s = 0.0;
      for (int p = 0; p < spec.dim; ++p) s += spec.direction[p] * (x[p] - 0.5);
      double f = -kRidgeFreq * std::sin(kRidgeFreq * s);
      for (int p = 0; p < spec.dim; ++p) g[p] = f * spec.direction[p];
      return g;
    }
    case SyntheticFunction::LogRidge: {
      double s = 0.0;
      for (int p = 0; p < spec.dim; ++p) s += spec.direction[p] * x[p];
      if (s <= -1.0) throw std::invalid_argument("log-ridge: 1 + a.x is not positive");
      for (int p = 0; p < spec.dim; ++p) g[p] = spec.direction[p] / (1.0 + s);
      return g;
    }
    case SyntheticFunction::Ackley: {
      const double d = spec.dim;
      double q = 0.0, c = 0.0;
      for (int p = 0; p < spec.dim; ++p) {
        double z = 4.0 * x[p] - 2.0;
        q += z * z;
        c += std::cos(kTwoPi * z);
      }
      double rms = std::sqrt(q / d);
      double e1 = std::exp(-0.2 * rms);
      double e2 = std::exp(c / d);
      for (int p = 0; p < spec.dim; ++p) {
        double z = 4.0 * x[p] - 2.0;
        // The radial term has a removable 0/0 at the center; its limit is 0.
        double radial = rms > 0.0 ? 4.0 * e1 * z / (d * rms) : 0.0;
        double osc = (kTwoPi / d) * std::sin(kTwoPi * z) * e2;
        g[p] = 4.0 * (radial + osc);
      }
      return g;
    }
  }
  throw std::invalid_argument("synthetic: unknown function");
}

std::vector<double> sample_input(const SyntheticSpec& spec, RngStream& rng) {
  std::vector<double> x(spec.dim);
  if (spec.law == InputLaw::UniformCube) {
    for (int p = 0; p < spec.dim; ++p) x[p] = rng.uniform();
    return x;
  }
  // Equicorrelated normal, mean 0.5 and marginal sd 0.15, restricted to the
  // cube by rejection.  The square-root factor of the correlation matrix
  // (1-rho) I + rho 11^T is a I + b 11^T with the constants below.
  const double rho = spec.correlation;
  const double d = spec.dim;
  const double a = std::sqrt(1.0 - rho);
  const double b = (std::sqrt(1.0 - rho + d * rho) - a) / d;
  std::vector<double> z(spec.dim);
  for (int tries = 0; tries < 1000; ++tries) {
    double sum = 0.0;
    for (int p = 0; p < spec.dim; ++p) {
      z[p] = rng.normal();
      sum += z[p];
    }
    bool ok = true;
    for (int p = 0; p < spec.dim; ++p) {
      x[p] = 0.5 + 0.15 * (a * z[p] + b * sum);
      if (x[p] < 0.0 || x[p] > 1.0) {
        ok = false;
        break;
      }
    }
    if (ok) return x;
  }
  throw std::runtime_error("truncated normal sampler: 1000 consecutive rejections");
}

Dataset generate_synthetic(const SyntheticSpec& spec, int n) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("generate_synthetic: n must be positive");
  RngStream rng(spec.seed);
  Dataset d;
  d.rows = n;
  d.cols = spec.dim;
  d.x.reserve(static_cast<std::size_t>(n) * spec.dim);
  d.y.reserve(n);
  for (int p = 0; p < spec.dim; ++p) d.feature_names.push_back("x" + std::to_string(p + 1));
  for (int i = 0; i < n; ++i) {
    std::vector<double> xi = sample_input(spec, rng);
    double yi = synthetic_value(spec, xi);
    if (spec.noise_sd > 0.0) yi += spec.noise_sd * rng.normal();
    d.x.insert(d.x.end(), xi.begin(), xi.end());
    d.y.push_back(yi);
  }
  d.validate();
  return d;
}

std::string function_name(SyntheticFunction fn) {
  switch (fn) {
    case SyntheticFunction::RidgeCosine: return "ridge-cosine";
    case SyntheticFunction::LogRidge: return "log-ridge";
    case SyntheticFunction::Ackley: return "ackley";
  }
  return "unknown";
}

}  // namespace treegrad
