#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "treegrad/dataset.hpp"
#include "treegrad/rng.hpp"

namespace treegrad {

enum class SyntheticFunction { RidgeCosine, LogRidge, Ackley };
enum class InputLaw { UniformCube, TruncatedNormal };

// Benchmark regression surfaces on the unit cube with known gradients.
//
//   ridge-cosine  f(x) = cos(6 pi a.(x - 0.5))
//   log-ridge     f(x) = log(1 + a.x), entries of a kept nonnegative so the
//                 argument stays positive on the cube
//   ackley        the Ackley function evaluated on z = 4x - 2, so the cube
//                 maps onto [-2, 2]^P
//
// The direction a must be unit norm with `sparsity` nonzero entries.  Ackley
// ignores a.
struct SyntheticSpec {
  SyntheticFunction fn = SyntheticFunction::RidgeCosine;
  int dim = 2;
  std::vector<double> direction;
  int sparsity = 2;
  double noise_sd = 0.0;
  InputLaw law = InputLaw::UniformCube;
  double correlation = 0.0;  // equicorrelation of the truncated normal law
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// Unit-norm direction with the first `sparsity` coordinates (after a seeded
// shuffle for sparse cases) drawn from |N(0,1)|.  Nonnegative entries keep
// log-ridge defined everywhere on the cube.
std::vector<double> make_direction(int dim, int sparsity, RngStream& rng);

double synthetic_value(const SyntheticSpec& spec, std::span<const double> x);
std::vector<double> true_gradient(const SyntheticSpec& spec, std::span<const double> x);

// Draws n inputs from the spec's law and attaches noisy responses.  The same
// spec and n always produce the same bytes.
Dataset generate_synthetic(const SyntheticSpec& spec, int n);

// One input draw.  Truncated-normal sampling rejects points outside the cube
// and throws after 1000 consecutive rejections.
std::vector<double> sample_input(const SyntheticSpec& spec, RngStream& rng);

std::string function_name(SyntheticFunction fn);

}  // namespace treegrad
