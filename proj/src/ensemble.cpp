#include "treegrad/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>

#include "treegrad/util.hpp"

namespace treegrad {

Forest Forest::fit(const Dataset& data, const FitConfig& cfg, int tree_count,
                   const BootstrapConfig& boot, int threads) {
  data.validate();
  if (tree_count < 1) throw std::invalid_argument("forest: tree_count must be positive");
  if (boot.sample_fraction <= 0.0 || boot.sample_fraction > 1.0)
    throw std::invalid_argument("forest: sample_fraction must lie in (0, 1]");
  if (boot.feature_fraction <= 0.0 || boot.feature_fraction > 1.0)
    throw std::invalid_argument("forest: feature_fraction must lie in (0, 1]");

  const int n = data.rows;
  int draw = static_cast<int>(std::llround(boot.sample_fraction * n));
  draw = std::max(1, std::min(draw, n));

  std::vector<std::optional<RegressionTree>> slots(tree_count);
  parallel_for(static_cast<std::size_t>(tree_count), threads, [&](std::size_t t) {
    FitConfig tree_cfg = cfg;
    tree_cfg.seed = cfg.seed + t;
    RngStream rng(tree_cfg.seed);
    std::vector<int> rows;
    rows.reserve(draw);
    if (boot.with_replacement) {
      for (int i = 0; i < draw; ++i)
        rows.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(n))));
    } else if (draw == n) {
      for (int i = 0; i < n; ++i) rows.push_back(i);
    } else {
      std::vector<int> all(n);
      for (int i = 0; i < n; ++i) all[i] = i;
      for (int i = 0; i < draw; ++i) {
        int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(all[i], all[j]);
      }
      all.resize(draw);
      std::sort(all.begin(), all.end());
      rows = std::move(all);
    }
    slots[t] = RegressionTree::fit_rows(data, tree_cfg, std::move(rows), boot.feature_fraction, rng);
  });

  std::vector<GradientField> fields;
  fields.reserve(tree_count);
  for (auto& slot : slots)
    fields.push_back(GradientField::extract(std::make_shared<const RegressionTree>(std::move(*slot))));
  return Forest(cfg, boot, std::move(fields));
}

double Forest::predict(std::span<const double> x) const {
  double s = 0.0;
  for (const GradientField& f : fields_) s += f.tree().predict(x);
  return s / static_cast<double>(tree_count());
}

std::vector<double> Forest::grad_at(std::span<const double> x) const {
  std::vector<double> g(dim(), 0.0);
  for (const GradientField& f : fields_) {
    std::span<const double> gt = f.grad_at(x);
    for (int p = 0; p < dim(); ++p) g[p] += gt[p];
  }
  double inv = 1.0 / static_cast<double>(tree_count());
  for (double& v : g) v *= inv;
  return g;
}

SubspaceResult Forest::tbas(const Measure& m) const {
  if (!m.can_rect_mass())
    throw std::invalid_argument("forest tbas: measure has no rectangle mass; use tbas_sampled");
  SymmetricMatrix c(dim());
  Integrand outer = Integrand::outer_product(dim());
  for (const GradientField& f : fields_) {
    std::vector<double> flat = pbe(f, outer, m);
    for (int i = 0; i < dim(); ++i)
      for (int j = i; j < dim(); ++j)
        c.add(i, j, flat[static_cast<std::size_t>(i) * dim() + j]);
  }
  double inv = 1.0 / static_cast<double>(tree_count());
  for (double& v : c.a) v *= inv;
  return subspace_from_matrix(std::move(c), m.describe(), describe(), 0, 0, false);
}

SubspaceResult Forest::tbas_sampled(const Measure& m, int samples, std::uint64_t seed) const {
  SymmetricMatrix c(dim());
  Integrand outer = Integrand::outer_product(dim());
  for (int t = 0; t < tree_count(); ++t) {
    RngStream rng(seed + static_cast<std::uint64_t>(t));
    std::vector<double> flat = mce(fields_[t], outer, m, samples, rng);
    for (int i = 0; i < dim(); ++i)
      for (int j = i; j < dim(); ++j)
        c.add(i, j, flat[static_cast<std::size_t>(i) * dim() + j]);
  }
  double inv = 1.0 / static_cast<double>(tree_count());
  for (double& v : c.a) v *= inv;
  return subspace_from_matrix(std::move(c), m.describe(), describe(), samples, seed, true);
}

AttributionResult Forest::tbig(std::span<const double> x, std::span<const double> x_ref,
                               int samples, std::uint64_t seed) const {
  if (samples < 1) throw std::invalid_argument("forest tbig: need at least one sample");
  AttributionResult r;
  r.x = fields_[0].tree().clamp_to_root(x);
  r.x_ref = fields_[0].tree().clamp_to_root(x_ref);
  r.samples = samples;
  r.seed = seed;
  Measure path = Measure::segment(r.x_ref, r.x);
  RngStream rng(seed);
  std::vector<double> avg(dim(), 0.0);
  std::vector<double> pt(dim());
  for (int i = 0; i < samples; ++i) {
    path.sample_point(pt, rng);
    std::vector<double> g = grad_at(pt);
    for (int p = 0; p < dim(); ++p) avg[p] += g[p];
  }
  double inv = 1.0 / static_cast<double>(samples);
  r.ig.resize(dim());
  for (int p = 0; p < dim(); ++p) r.ig[p] = (r.x[p] - r.x_ref[p]) * avg[p] * inv;
  return r;
}

std::string Forest::describe() const {
  return "forest(trees=" + std::to_string(tree_count()) +
         ",mode=" + (cfg_.mode == FitMode::Cart ? "cart" : "cyclic") + ")";
}

void Forest::save(std::ostream& out) const {
  out << "forest v1\n";
  out << "trees " << tree_count() << "\n";
  out << "sample_fraction " << format_double(boot_.sample_fraction) << "\n";
  out << "with_replacement " << (boot_.with_replacement ? 1 : 0) << "\n";
  out << "feature_fraction " << format_double(boot_.feature_fraction) << "\n";
  out << "seed " << cfg_.seed << "\n";
  for (const GradientField& f : fields_) f.tree().save(out);
  out << "end forest\n";
}

Forest Forest::load(std::istream& in) {
  std::string line;
  auto next = [&](const char* key) {
    if (!std::getline(in, line)) throw std::runtime_error("forest file: unexpected end of input");
    std::vector<std::string> tok = split(trim(line), ' ');
    if (tok.size() != 2 || tok[0] != key)
      throw std::runtime_error(std::string("forest file: expected '") + key + "' line");
    return tok[1];
  };
  if (next("forest") != "v1") throw std::runtime_error("forest file: unsupported version");
  int trees = static_cast<int>(parse_int(next("trees")));
  if (trees < 1) throw std::runtime_error("forest file: bad tree count");
  BootstrapConfig boot;
  boot.sample_fraction = parse_double(next("sample_fraction"));
  boot.with_replacement = parse_int(next("with_replacement")) != 0;
  boot.feature_fraction = parse_double(next("feature_fraction"));
  std::uint64_t seed = static_cast<std::uint64_t>(parse_int(next("seed")));

  std::vector<GradientField> fields;
  fields.reserve(trees);
  for (int t = 0; t < trees; ++t) {
    RegressionTree tree = RegressionTree::load(in);
    fields.push_back(GradientField::extract(std::make_shared<const RegressionTree>(std::move(tree))));
  }
  if (!std::getline(in, line) || trim(line) != "end forest")
    throw std::runtime_error("forest file: missing 'end forest'");
  FitConfig cfg = fields[0].tree().meta();
  cfg.seed = seed;
  for (const GradientField& f : fields)
    if (f.dim() != fields[0].dim()) throw std::runtime_error("forest file: trees disagree on dim");
  return Forest(cfg, boot, std::move(fields));
}

void Forest::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  save(out);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Forest Forest::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return Forest::load(in);
}

}  // namespace treegrad
