#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "treegrad/gradfield.hpp"
#include "treegrad/linalg.hpp"
#include "treegrad/measure.hpp"

namespace treegrad {

// Map h applied to gradient vectors under an integral sign.  Implemented as a
// weighted accumulator, acc += w * h(g), so estimators never materialize
// per-sample outputs.
class Integrand {
 public:
  static Integrand identity(int dim);       // h(g) = g
  static Integrand outer_product(int dim);  // h(g) = g g^T, flattened row-major
  static Integrand custom(std::string name, int dim, int output_size,
                          std::function<void(std::span<const double>, double, std::span<double>)> fn);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int output_size() const { return out_size_; }
  void accumulate(std::span<const double> g, double w, std::span<double> acc) const;

 private:
  enum class Kind { Identity, OuterProduct, Custom };
  Integrand(Kind k, std::string name, int dim, int out_size)
      : kind_(k), name_(std::move(name)), dim_(dim), out_size_(out_size) {}

  Kind kind_;
  std::string name_;
  int dim_;
  int out_size_;
  std::function<void(std::span<const double>, double, std::span<double>)> fn_;
};

// Monte-Carlo estimate: the mean of h over `samples` gradient evaluations at
// points drawn from the measure.
std::vector<double> mce(const GradientField& gf, const Integrand& h, const Measure& m,
                        int samples, RngStream& rng);

// Partition estimate: the exact integral of h over the field, summing
// h(leaf gradient) * leaf cell mass.  Needs a measure with rectangle masses.
std::vector<double> pbe(const GradientField& gf, const Integrand& h, const Measure& m);

// Path attribution of the prediction change from x_ref to x: coordinate p
// gets (x_p - x_ref_p) times the average p-gradient along the straight path.
struct AttributionResult {
  std::vector<double> x, x_ref, ig;
  long long samples = 0;  // 0 when computed in closed form
  std::uint64_t seed = 0;
  bool exact = false;
};

AttributionResult tbig(const GradientField& gf, std::span<const double> x,
                       std::span<const double> x_ref, int samples, std::uint64_t seed);

// Closed form of the same quantity: the path is cut at every cell boundary it
// crosses, and each leaf's gradient is weighted by the parameter length of
// the sub-interval spent inside that leaf.
AttributionResult tbig_exact(const GradientField& gf, std::span<const double> x,
                             std::span<const double> x_ref);

// The sub-intervals themselves, ascending in t over [0, 1] for the path
// from + t * (to - from); exposed for tests and diagnostics.
struct SegmentPiece {
  double t0, t1;
  int node;
};
std::vector<SegmentPiece> segment_leaf_intervals(const RegressionTree& tree,
                                                 std::span<const double> from,
                                                 std::span<const double> to);

// Second-moment matrix of the gradient field under a measure, with its
// eigendecomposition; the leading eigenvectors span the directions along
// which the fitted surface varies most.
struct SubspaceResult {
  SymmetricMatrix matrix;
  std::vector<double> eigenvalues;                // descending
  std::vector<std::vector<double>> eigenvectors;  // [k] pairs with eigenvalues[k]
  std::string measure;
  std::string model;
  long long samples = 0;  // 0 for the partition path
  std::uint64_t seed = 0;
  bool sampled = false;
};

SubspaceResult tbas(const GradientField& gf, const Measure& m);
SubspaceResult tbas_sampled(const GradientField& gf, const Measure& m, int samples,
                            std::uint64_t seed);

// Packages an already-computed matrix (ensemble averages reuse this).
SubspaceResult subspace_from_matrix(SymmetricMatrix c, std::string measure, std::string model,
                                    long long samples, std::uint64_t seed, bool sampled);

std::string describe_tree(const RegressionTree& t);

// Stable-key-order JSON bodies for the result types.
std::string subspace_to_json(const SubspaceResult& r, int indent = 2);
std::string attribution_to_json(const AttributionResult& r, int indent = 2);

}  // namespace treegrad
