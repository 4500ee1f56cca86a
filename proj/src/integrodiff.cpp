#include "treegrad/integrodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "treegrad/util.hpp"

namespace treegrad {

// ===========================================================================
// Integrands
// ===========================================================================

Integrand Integrand::identity(int dim) {
  if (dim < 1) throw std::invalid_argument("integrand: dim must be positive");
  return Integrand(Kind::Identity, "identity", dim, dim);
}

Integrand Integrand::outer_product(int dim) {
  if (dim < 1) throw std::invalid_argument("integrand: dim must be positive");
  return Integrand(Kind::OuterProduct, "outer-product", dim, dim * dim);
}

Integrand Integrand::custom(std::string name, int dim, int output_size,
                            std::function<void(std::span<const double>, double, std::span<double>)> fn) {
  if (dim < 1 || output_size < 1) throw std::invalid_argument("integrand: bad dimensions");
  if (!fn) throw std::invalid_argument("integrand: missing function");
  Integrand h(Kind::Custom, std::move(name), dim, output_size);
  h.fn_ = std::move(fn);
  return h;
}

void Integrand::accumulate(std::span<const double> g, double w, std::span<double> acc) const {
  switch (kind_) {
    case Kind::Identity:
      for (int p = 0; p < dim_; ++p) acc[p] += w * g[p];
      return;
    case Kind::OuterProduct:
      for (int i = 0; i < dim_; ++i) {
        double wi = w * g[i];
        double* row = acc.data() + static_cast<std::size_t>(i) * dim_;
        for (int j = 0; j < dim_; ++j) row[j] += wi * g[j];
      }
      return;
    case Kind::Custom:
      fn_(g, w, acc);
      return;
  }
}

// ===========================================================================
// Estimators
// ===========================================================================

std::vector<double> mce(const GradientField& gf, const Integrand& h, const Measure& m,
                        int samples, RngStream& rng) {
  if (h.dim() != gf.dim() || m.dim() != gf.dim())
    throw std::invalid_argument("mce: dimension mismatch");
  if (samples < 1) throw std::invalid_argument("mce: need at least one sample");
  if (!m.can_sample()) throw std::invalid_argument("mce: measure cannot sample");

  std::vector<double> acc(h.output_size(), 0.0);
  std::vector<double> x(gf.dim());
  for (int i = 0; i < samples; ++i) {
    m.sample_point(x, rng);
    h.accumulate(gf.grad_at(x), 1.0, acc);
  }
  double inv = 1.0 / static_cast<double>(samples);
  for (double& v : acc) v *= inv;
  return acc;
}

std::vector<double> pbe(const GradientField& gf, const Integrand& h, const Measure& m) {
  if (h.dim() != gf.dim() || m.dim() != gf.dim())
    throw std::invalid_argument("pbe: dimension mismatch");
  if (!m.can_rect_mass()) throw std::invalid_argument("pbe: measure has no rectangle mass");

  const RegressionTree& t = gf.tree();
  std::vector<int> leaves = t.leaf_indices();
  std::vector<double> acc(h.output_size(), 0.0);

  if (m.kind() == Measure::Kind::Empirical) {
    // Route each support point to its leaf instead of scanning every point
    // per leaf.  Matches rect_mass exactly because locate_leaf and the
    // rectangle membership rule share the ties-left convention; points
    // outside the root cell carry no mass under either.
    std::vector<int> counts(t.node_count(), 0);
    const int n = m.support_size();
    const TreeNode& root = t.node(0);
    for (int i = 0; i < n; ++i) {
      std::span<const double> x = m.support_point(i);
      bool inside = true;
      for (int p = 0; p < gf.dim(); ++p)
        if (x[p] > root.upper[p] || x[p] < root.lower[p] ||
            (x[p] == root.lower[p] && root.lower[p] > 0.0)) {
          inside = false;
          break;
        }
      if (inside) ++counts[t.locate_leaf(x)];
    }
    for (int leaf : leaves) {
      if (counts[leaf] == 0) continue;
      double w = static_cast<double>(counts[leaf]) / static_cast<double>(n);
      h.accumulate(gf.node_gradient(leaf), w, acc);
    }
    return acc;
  }

  for (int leaf : leaves) {
    const TreeNode& nd = t.node(leaf);
    double w = m.rect_mass(nd.lower, nd.upper);
    if (w == 0.0) continue;
    h.accumulate(gf.node_gradient(leaf), w, acc);
  }
  return acc;
}

// ===========================================================================
// Path attribution
// ===========================================================================

namespace {

void descend_segment(const RegressionTree& t, int node, double t0, double t1,
                     std::span<const double> from, std::span<const double> to,
                     std::vector<SegmentPiece>& out) {
  const TreeNode& nd = t.node(node);
  if (nd.is_leaf()) {
    out.push_back({t0, t1, node});
    return;
  }
  const TreeSplit& sp = *nd.split;
  double p0 = from[sp.variable];
  double d = to[sp.variable] - p0;
  if (d == 0.0) {
    descend_segment(t, p0 <= sp.threshold ? sp.left : sp.right, t0, t1, from, to, out);
    return;
  }
  double tc = (sp.threshold - p0) / d;
  double left_lo, left_hi, right_lo, right_hi;
  if (d > 0.0) {
    left_lo = t0;
    left_hi = std::min(t1, tc);
    right_lo = std::max(t0, tc);
    right_hi = t1;
  } else {
    left_lo = std::max(t0, tc);
    left_hi = t1;
    right_lo = t0;
    right_hi = std::min(t1, tc);
  }
  // Children are visited in ascending t so the output stays ordered.
  if (d > 0.0) {
    if (left_hi > left_lo) descend_segment(t, sp.left, left_lo, left_hi, from, to, out);
    if (right_hi > right_lo) descend_segment(t, sp.right, right_lo, right_hi, from, to, out);
  } else {
    if (right_hi > right_lo) descend_segment(t, sp.right, right_lo, right_hi, from, to, out);
    if (left_hi > left_lo) descend_segment(t, sp.left, left_lo, left_hi, from, to, out);
  }
}

}  // namespace

std::vector<SegmentPiece> segment_leaf_intervals(const RegressionTree& tree,
                                                 std::span<const double> from,
                                                 std::span<const double> to) {
  std::vector<double> f = tree.clamp_to_root(from);
  std::vector<double> g = tree.clamp_to_root(to);
  std::vector<SegmentPiece> out;
  descend_segment(tree, 0, 0.0, 1.0, f, g, out);
  return out;
}

AttributionResult tbig(const GradientField& gf, std::span<const double> x,
                       std::span<const double> x_ref, int samples, std::uint64_t seed) {
  AttributionResult r;
  r.x = gf.tree().clamp_to_root(x);
  r.x_ref = gf.tree().clamp_to_root(x_ref);
  r.samples = samples;
  r.seed = seed;
  Measure path = Measure::segment(r.x_ref, r.x);
  RngStream rng(seed);
  std::vector<double> avg = mce(gf, Integrand::identity(gf.dim()), path, samples, rng);
  r.ig.resize(gf.dim());
  for (int p = 0; p < gf.dim(); ++p) r.ig[p] = (r.x[p] - r.x_ref[p]) * avg[p];
  return r;
}

AttributionResult tbig_exact(const GradientField& gf, std::span<const double> x,
                             std::span<const double> x_ref) {
  AttributionResult r;
  r.x = gf.tree().clamp_to_root(x);
  r.x_ref = gf.tree().clamp_to_root(x_ref);
  r.exact = true;
  std::vector<SegmentPiece> pieces = segment_leaf_intervals(gf.tree(), r.x_ref, r.x);
  std::vector<double> avg(gf.dim(), 0.0);
  for (const SegmentPiece& piece : pieces) {
    double w = piece.t1 - piece.t0;
    std::span<const double> g = gf.node_gradient(piece.node);
    for (int p = 0; p < gf.dim(); ++p) avg[p] += w * g[p];
  }
  r.ig.resize(gf.dim());
  for (int p = 0; p < gf.dim(); ++p) r.ig[p] = (r.x[p] - r.x_ref[p]) * avg[p];
  return r;
}

// ===========================================================================
// Active subspace
// ===========================================================================

namespace {

SymmetricMatrix matrix_from_flat(std::span<const double> flat, int dim) {
  SymmetricMatrix c(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) c.set(i, j, flat[static_cast<std::size_t>(i) * dim + j]);
  return c;
}

}  // namespace

SubspaceResult subspace_from_matrix(SymmetricMatrix c, std::string measure, std::string model,
                                    long long samples, std::uint64_t seed, bool sampled) {
  SubspaceResult r;
  EigenDecomposition e = eig_sym(c);
  r.matrix = std::move(c);
  r.eigenvalues = std::move(e.values);
  r.eigenvectors = std::move(e.vectors);
  r.measure = std::move(measure);
  r.model = std::move(model);
  r.samples = samples;
  r.seed = seed;
  r.sampled = sampled;
  return r;
}

SubspaceResult tbas(const GradientField& gf, const Measure& m) {
  if (!m.can_rect_mass())
    throw std::invalid_argument("tbas: measure has no rectangle mass; use tbas_sampled");
  std::vector<double> flat = pbe(gf, Integrand::outer_product(gf.dim()), m);
  return subspace_from_matrix(matrix_from_flat(flat, gf.dim()), m.describe(),
                              describe_tree(gf.tree()), 0, 0, false);
}

SubspaceResult tbas_sampled(const GradientField& gf, const Measure& m, int samples,
                            std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> flat = mce(gf, Integrand::outer_product(gf.dim()), m, samples, rng);
  return subspace_from_matrix(matrix_from_flat(flat, gf.dim()), m.describe(),
                              describe_tree(gf.tree()), samples, seed, true);
}

std::string describe_tree(const RegressionTree& t) {
  const FitConfig& c = t.meta();
  std::string mode = c.mode == FitMode::Cart ? "cart" : "cyclic";
  return "tree(mode=" + mode + ",depth=" + std::to_string(t.depth()) + ",leaves=" +
         std::to_string(t.leaf_count()) + ")";
}

// ===========================================================================
// JSON export
// ===========================================================================

std::string subspace_to_json(const SubspaceResult& r, int indent) {
  nlohmann::ordered_json j;
  j["matrix"] = nlohmann::ordered_json::array();
  for (int i = 0; i < r.matrix.dim; ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int k = 0; k < r.matrix.dim; ++k) row.push_back(r.matrix.at(i, k));
    j["matrix"].push_back(row);
  }
  j["eigenvalues"] = r.eigenvalues;
  j["eigenvectors"] = r.eigenvectors;
  j["measure"] = r.measure;
  j["model"] = r.model;
  if (r.sampled) {
    j["samples"] = r.samples;
    j["seed"] = r.seed;
  } else {
    j["samples"] = nullptr;
    j["seed"] = nullptr;
  }
  return j.dump(indent);
}

std::string attribution_to_json(const AttributionResult& r, int indent) {
  nlohmann::ordered_json j;
  j["x"] = r.x;
  j["x_ref"] = r.x_ref;
  j["ig"] = r.ig;
  if (r.exact) {
    j["samples"] = nullptr;
    j["seed"] = nullptr;
  } else {
    j["samples"] = r.samples;
    j["seed"] = r.seed;
  }
  return j.dump(indent);
}

}  // namespace treegrad
