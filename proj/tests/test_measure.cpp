#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "treegrad/measure.hpp"
#include "treegrad/rng.hpp"
#include "treegrad/tree.hpp"

#include "helpers.hpp"

using treegrad::Measure;
using treegrad::RngStream;

TEST_CASE("uniform cube sampling and rectangle mass") {
  Measure m = Measure::uniform_cube(2);
  CHECK(m.can_rect_mass());
  CHECK(m.describe() == "uniform-cube(dim=2)");

  RngStream rng(3);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    auto x = m.sample(1, rng)[0];
    CHECK(x[0] >= 0.0);
    CHECK(x[0] <= 1.0);
    mean += x[0];
  }
  CHECK(mean / n == doctest::Approx(0.5).epsilon(0.02));

  std::vector<double> lo{0.2, 0.0}, hi{0.5, 1.0};
  CHECK(m.rect_mass(lo, hi) == doctest::Approx(0.3).epsilon(1e-14));
  std::vector<double> all_lo{0.0, 0.0}, all_hi{1.0, 1.0};
  CHECK(m.rect_mass(all_lo, all_hi) == 1.0);
  // Boxes poking out of the cube are clipped.
  std::vector<double> out_lo{-1.0, 0.0}, out_hi{0.5, 2.0};
  CHECK(m.rect_mass(out_lo, out_hi) == doctest::Approx(0.5).epsilon(1e-14));
  // A box entirely outside the cube clips to nothing.
  std::vector<double> gone_lo{-2.0, 0.0}, gone_hi{-1.0, 1.0};
  CHECK(m.rect_mass(gone_lo, gone_hi) == 0.0);
  // Inverted rectangles are caller bugs.
  std::vector<double> bad_lo{0.7, 0.0}, bad_hi{0.6, 1.0};
  CHECK_THROWS_AS(m.rect_mass(bad_lo, bad_hi), std::invalid_argument);
}

TEST_CASE("empirical membership is half-open with a closed domain floor") {
  Measure m = Measure::empirical({0.5, 0.0}, 1);  // two support points in 1D
  CHECK(m.support_size() == 2);
  CHECK(m.describe() == "empirical(n=2)");

  // 0.5 sits on the upper face: included.
  CHECK(m.rect_mass(std::vector<double>{0.2}, std::vector<double>{0.5}) == doctest::Approx(0.5));
  // 0.5 sits on the lower face of an interior box: excluded.
  CHECK(m.rect_mass(std::vector<double>{0.5}, std::vector<double>{1.0}) == 0.0);
  // 0.0 sits on the lower face at the domain floor: included.
  CHECK(m.rect_mass(std::vector<double>{0.0}, std::vector<double>{0.4}) == doctest::Approx(0.5));
  CHECK(m.rect_mass(std::vector<double>{0.0}, std::vector<double>{1.0}) == doctest::Approx(1.0));
}

TEST_CASE("empirical mass splits a dataset across leaf cells without loss") {
  treegrad::Dataset d;
  d.cols = 2;
  d.feature_names = {"x1", "x2"};
  RngStream rng(41);
  for (int i = 0; i < 157; ++i) {
    double a = rng.uniform(), b = rng.uniform();
    d.x.push_back(a);
    d.x.push_back(b);
    d.y.push_back(std::sin(3.0 * a) + b * b);
    ++d.rows;
  }
  treegrad::FitConfig cfg;
  cfg.max_depth = 4;
  treegrad::RegressionTree tree = treegrad::RegressionTree::fit(d, cfg);

  Measure m = Measure::empirical_from(d);
  CHECK(m.support_size() == d.rows);

  // Each support point lands in exactly one leaf, so the leaf masses are
  // integer counts over n and add up to n with no rounding at all.
  int total = 0;
  for (int leaf : tree.leaf_indices()) {
    double mass = m.rect_mass(tree.node(leaf).lower, tree.node(leaf).upper);
    double scaled = mass * d.rows;
    CHECK(scaled == std::floor(scaled + 0.5));
    total += static_cast<int>(std::floor(scaled + 0.5));
  }
  CHECK(total == d.rows);
}

TEST_CASE("empirical sampling draws support rows") {
  Measure m = Measure::empirical({0.1, 0.9, 0.2, 0.8, 0.3, 0.7}, 2);
  RngStream rng(5);
  std::vector<int> hits(3, 0);
  for (int i = 0; i < 3000; ++i) {
    auto x = m.sample(1, rng)[0];
    bool matched = false;
    for (int s = 0; s < 3; ++s) {
      auto p = m.support_point(s);
      if (x[0] == p[0] && x[1] == p[1]) {
        ++hits[s];
        matched = true;
      }
    }
    CHECK(matched);
  }
  for (int s = 0; s < 3; ++s) CHECK(hits[s] > 800);
}

TEST_CASE("segment measure samples the straight path") {
  std::vector<double> from{0.1, 0.2}, to{0.9, 0.6};
  Measure m = Measure::segment(from, to);
  CHECK_FALSE(m.can_rect_mass());
  CHECK(m.describe() == "segment(dim=2)");
  CHECK_THROWS_AS(
      m.rect_mass(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}),
      std::invalid_argument);

  RngStream rng(6);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(2);
    m.sample_point(x, rng);
    // Collinear with the endpoints and between them.
    double t = (x[0] - from[0]) / (to[0] - from[0]);
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
    CHECK(x[1] == doctest::Approx(from[1] + t * (to[1] - from[1])).epsilon(1e-12));
  }

  Measure degenerate = Measure::segment(from, from);
  std::vector<double> x(2);
  degenerate.sample_point(x, rng);
  CHECK(x == from);
}

TEST_CASE("empirical construction validates its buffer") {
  CHECK_THROWS_AS(Measure::empirical({0.1, 0.2, 0.3}, 2), std::invalid_argument);
  CHECK_THROWS_AS(Measure::empirical({}, 2), std::invalid_argument);
  CHECK_THROWS_AS(Measure::segment({0.1}, {0.2, 0.3}), std::invalid_argument);
}
