#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "treegrad/dataset.hpp"
#include "treegrad/rng.hpp"

namespace treegrad {

// Probability measure on (a subset of) the unit cube.  Not every kind
// supports every operation; callers probe can_sample / can_rect_mass and the
// unsupported call throws std::invalid_argument.
//
//   uniform-cube   sampling and rectangle mass (volume)
//   empirical      sampling (uniform over the support points) and rectangle
//                  mass (support fraction)
//   segment        sampling only: from + u * (to - from) with u uniform
//
// Empirical rectangle membership is half-open, (lo, hi] per coordinate,
// closing at lo when the face sits on the domain floor (lo <= 0).  This
// matches the tree convention that a point on a threshold belongs to the left
// cell, so the leaf cells of a tree absorb each support point exactly once.
class Measure {
 public:
  enum class Kind { UniformCube, Empirical, Segment };

  static Measure uniform_cube(int dim);
  static Measure empirical(std::vector<double> points_rowmajor, int dim);
  static Measure empirical_from(const Dataset& d);
  static Measure segment(std::vector<double> from, std::vector<double> to);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool can_sample() const { return true; }
  bool can_rect_mass() const { return kind_ != Kind::Segment; }

  void sample_point(std::span<double> out, RngStream& rng) const;
  std::vector<std::vector<double>> sample(int count, RngStream& rng) const;

  double rect_mass(std::span<const double> lo, std::span<const double> hi) const;

  std::string describe() const;

  int support_size() const { return points_ ? static_cast<int>(points_->size()) / dim_ : 0; }
  std::span<const double> support_point(int i) const {
    return {points_->data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }

 private:
  Measure(Kind k, int dim) : kind_(k), dim_(dim) {}

  Kind kind_;
  int dim_;
  std::shared_ptr<const std::vector<double>> points_;  // empirical support, row-major
  std::vector<double> from_, to_;                      // segment endpoints
};

}  // namespace treegrad
