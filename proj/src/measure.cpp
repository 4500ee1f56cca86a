#include "treegrad/measure.hpp"

#include <memory>
#include <stdexcept>

namespace treegrad {

Measure Measure::uniform_cube(int dim) {
  if (dim < 1) throw std::invalid_argument("measure: dim must be positive");
  return Measure(Kind::UniformCube, dim);
}

Measure Measure::empirical(std::vector<double> points_rowmajor, int dim) {
  if (dim < 1) throw std::invalid_argument("measure: dim must be positive");
  if (points_rowmajor.empty() || points_rowmajor.size() % dim != 0)
    throw std::invalid_argument("measure: empirical support must be a nonempty multiple of dim");
  Measure m(Kind::Empirical, dim);
  m.points_ = std::make_shared<const std::vector<double>>(std::move(points_rowmajor));
  return m;
}

Measure Measure::empirical_from(const Dataset& d) {
  return empirical(d.x, d.cols);
}

Measure Measure::segment(std::vector<double> from, std::vector<double> to) {
  if (from.empty() || from.size() != to.size())
    throw std::invalid_argument("measure: segment endpoints must match and be nonempty");
  Measure m(Kind::Segment, static_cast<int>(from.size()));
  m.from_ = std::move(from);
  m.to_ = std::move(to);
  return m;
}

void Measure::sample_point(std::span<double> out, RngStream& rng) const {
  if (out.size() != static_cast<std::size_t>(dim_))
    throw std::invalid_argument("measure: output buffer has wrong dimension");
  switch (kind_) {
    case Kind::UniformCube:
      for (int p = 0; p < dim_; ++p) out[p] = rng.uniform();
      return;
    case Kind::Empirical: {
      int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(support_size())));
      std::span<const double> pt = support_point(i);
      for (int p = 0; p < dim_; ++p) out[p] = pt[p];
      return;
    }
    case Kind::Segment: {
      double u = rng.uniform();
      for (int p = 0; p < dim_; ++p) out[p] = from_[p] + u * (to_[p] - from_[p]);
      return;
    }
  }
}

std::vector<std::vector<double>> Measure::sample(int count, RngStream& rng) const {
  if (count < 0) throw std::invalid_argument("measure: negative sample count");
  std::vector<std::vector<double>> out(count, std::vector<double>(dim_));
  for (auto& x : out) sample_point(x, rng);
  return out;
}

double Measure::rect_mass(std::span<const double> lo, std::span<const double> hi) const {
  if (lo.size() != static_cast<std::size_t>(dim_) || hi.size() != static_cast<std::size_t>(dim_))
    throw std::invalid_argument("measure: rectangle has wrong dimension");
  for (int p = 0; p < dim_; ++p)
    if (lo[p] > hi[p]) throw std::invalid_argument("measure: rectangle with lo > hi");

  switch (kind_) {
    case Kind::UniformCube: {
      double vol = 1.0;
      for (int p = 0; p < dim_; ++p) {
        double a = lo[p] < 0.0 ? 0.0 : lo[p];
        double b = hi[p] > 1.0 ? 1.0 : hi[p];
        if (b <= a) return 0.0;
        vol *= b - a;
      }
      return vol;
    }
    case Kind::Empirical: {
      const int n = support_size();
      int inside = 0;
      for (int i = 0; i < n; ++i) {
        std::span<const double> x = support_point(i);
        bool in = true;
        for (int p = 0; p < dim_; ++p) {
          if (x[p] > hi[p] || x[p] < lo[p] || (x[p] == lo[p] && lo[p] > 0.0)) {
            in = false;
            break;
          }
        }
        if (in) ++inside;
      }
      return static_cast<double>(inside) / static_cast<double>(n);
    }
    case Kind::Segment:
      throw std::invalid_argument("measure: segment has no rectangle mass");
  }
  throw std::invalid_argument("measure: unknown kind");
}

std::string Measure::describe() const {
  switch (kind_) {
    case Kind::UniformCube: return "uniform-cube(dim=" + std::to_string(dim_) + ")";
    case Kind::Empirical: return "empirical(n=" + std::to_string(support_size()) + ")";
    case Kind::Segment: return "segment(dim=" + std::to_string(dim_) + ")";
  }
  return "unknown";
}

}  // namespace treegrad
