// Release gate for the whole library.  Each case checks one shipping
// requirement end to end and prints a single PASS/FAIL line, so the test log
// doubles as a checklist.  Tolerances are fixed here on purpose; loosening
// them is a behavior change, not a test fix.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numbers>
#include <queue>
#include <string>
#include <sys/wait.h>
#include <utility>
#include <vector>

#include "treegrad/dataset.hpp"
#include "treegrad/ensemble.hpp"
#include "treegrad/experiment.hpp"
#include "treegrad/gradfield.hpp"
#include "treegrad/integrodiff.hpp"
#include "treegrad/linalg.hpp"
#include "treegrad/measure.hpp"
#include "treegrad/rng.hpp"
#include "treegrad/synthetic.hpp"
#include "treegrad/tree.hpp"
#include "treegrad/util.hpp"

#include "helpers.hpp"

using namespace treegrad;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int number, const char* label, bool ok) {
  std::printf("criterion %02d %s: %s\n", number, label, ok ? "PASS" : "FAIL");
  std::fflush(stdout);
}

double median(std::vector<double> v) {
  REQUIRE(!v.empty());
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  REQUIRE(!v.empty());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double frobenius(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Complete alternating-split tree on the unit square whose node values are
// the exact average of a.x over each cell.  Medians of the uniform law sit at
// cell midpoints, so midpoint splits are the population version of the
// median rule.
RegressionTree population_median_tree(const std::vector<double>& a, int depth) {
  struct Cell {
    std::vector<double> lo, hi;
  };
  auto cell_mean = [&](const Cell& c) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) s += a[p] * 0.5 * (c.lo[p] + c.hi[p]);
    return s;
  };

  int dim = static_cast<int>(a.size());
  TreeBuilder b(dim);
  std::vector<Cell> cells;
  cells.push_back({std::vector<double>(a.size(), 0.0), std::vector<double>(a.size(), 1.0)});
  b.set_root(cell_mean(cells[0]));

  std::queue<std::pair<int, int>> pending;  // node index, depth
  pending.push({0, 0});
  while (!pending.empty()) {
    auto [node, d] = pending.front();
    pending.pop();
    if (d == depth) continue;
    int var = d % dim;
    double thr = 0.5 * (cells[node].lo[var] + cells[node].hi[var]);
    Cell lc = cells[node];
    lc.hi[var] = thr;
    Cell rc = cells[node];
    rc.lo[var] = thr;
    auto [l, r] = b.split(node, var, thr, cell_mean(lc), cell_mean(rc));
    cells.resize(std::max(cells.size(), static_cast<std::size_t>(r) + 1));
    cells[l] = lc;
    cells[r] = rc;
    pending.push({l, d + 1});
    pending.push({r, d + 1});
  }
  return b.build();
}

// Depth-8 model of the smooth log-ridge surface used by the estimator and
// attribution gates below.
GradientField log_ridge_field() {
  SyntheticSpec spec;
  spec.fn = SyntheticFunction::LogRidge;
  spec.dim = 3;
  spec.direction = {0.36, 0.48, 0.8};
  spec.seed = 21;
  Dataset data = generate_synthetic(spec, 10000);

  FitConfig cfg;
  cfg.mode = FitMode::Cart;
  cfg.max_depth = 8;
  return GradientField::extract(RegressionTree::fit(data, cfg));
}

std::string cli() {
  const char* p = std::getenv("TREEGRAD_CLI");
  REQUIRE_MESSAGE(p != nullptr, "TREEGRAD_CLI must point at the built binary");
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = cli() + " " + args + " > /dev/null 2> /dev/null";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string path_of(const std::string& name) {
  return (testutil::scratch_dir() / name).string();
}

}  // namespace

TEST_CASE("criterion 01: linear surfaces are recovered exactly") {
  Stopwatch watch;
  const std::vector<double> a = {0.6, -0.4};
  RegressionTree tree = population_median_tree(a, 4);
  GradientField field = GradientField::extract(tree);

  REQUIRE(tree.depth() == 4);
  REQUIRE(tree.leaf_count() == 16);

  // Every split reproduces its coordinate of a, and both children agree on
  // the slope they inherit.
  const double kSlopeTol = 1e-12;
  bool slopes_ok = true;
  for (int i = 0; i < tree.node_count(); ++i) {
    const TreeNode& nd = tree.node(i);
    if (nd.is_leaf()) continue;
    int var = nd.split->variable;
    double g = field.node_gradient(nd.split->left)[var];
    slopes_ok &= std::abs(g - a[static_cast<std::size_t>(var)]) <= kSlopeTol;
    slopes_ok &= g == field.node_gradient(nd.split->right)[var];
  }

  // Leaf vectors carry the deepest governing slope for each coordinate, bit
  // for bit, and that slope is a's entry.
  bool leaves_ok = true;
  for (int i = 0; i < tree.node_count(); ++i) {
    const TreeNode& nd = tree.node(i);
    if (!nd.is_leaf()) continue;
    std::span<const double> g = field.node_gradient(i);
    for (int p = 0; p < tree.dim(); ++p) {
      leaves_ok &= std::abs(g[p] - a[static_cast<std::size_t>(p)]) <= kSlopeTol;
      // Walk up to the nearest ancestor that split on p and recompute its
      // slope from child values and cell extent.
      int cur = i;
      bool found = false;
      while (tree.node(cur).parent >= 0 && !found) {
        int par = tree.node(cur).parent;
        const TreeNode& pn = tree.node(par);
        if (pn.split->variable == p) {
          double slope = 2.0 * (tree.node(pn.split->right).value - tree.node(pn.split->left).value) /
                         (pn.upper[static_cast<std::size_t>(p)] - pn.lower[static_cast<std::size_t>(p)]);
          leaves_ok &= g[p] == slope;
          found = true;
        }
        cur = par;
      }
      leaves_ok &= found;  // depth 4 with alternating splits covers both axes
    }
  }

  double elapsed = watch.seconds();
  bool ok = slopes_ok && leaves_ok && elapsed < 1.0;
  report(1, "linear surface exactness", ok);
  CHECK(slopes_ok);
  CHECK(leaves_ok);
  CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 02: hand-built tree indices, bounds, and lookups") {
  // Two-level tree over the unit square, written down node by node: the root
  // splits x1 at 0.5, the left child splits x2 at 0.5, the right child
  // splits x2 at 0.6.
  TreeBuilder b(2);
  b.set_root(0.5);
  auto [n1, n2] = b.split(0, 0, 0.5, 0.2, 0.8);
  auto [n3, n4] = b.split(n1, 1, 0.5, 0.1, 0.3);
  auto [n5, n6] = b.split(n2, 1, 0.6, 1.0, 0.6);
  RegressionTree tree = b.build();

  bool index_ok = n1 == 1 && n2 == 2 && n3 == 3 && n4 == 4 && n5 == 5 && n6 == 6;
  index_ok &= tree.nodes_at_depth(1) == std::vector<int>{1, 2};
  index_ok &= tree.nodes_at_depth(2) == std::vector<int>{3, 4, 5, 6};

  bool bounds_ok = tree.node(5).lower == std::vector<double>{0.5, 0.0} &&
                   tree.node(5).upper == std::vector<double>{1.0, 0.6};

  const std::vector<double> x = {0.75, 0.3};
  auto at1 = tree.locate(x, 1);
  auto at2 = tree.locate(x, 2);
  bool locate_ok = at1.index == 2 && at1.exact_depth && at2.index == 5 && at2.exact_depth;

  bool values_ok = tree.predict(x) == 1.0 && tree.node(2).value == 0.8 && tree.node(6).value == 0.6;

  bool ok = index_ok && bounds_ok && locate_ok && values_ok;
  report(2, "hand-built tree conformance", ok);
  CHECK(index_ok);
  CHECK(bounds_ok);
  CHECK(locate_ok);
  CHECK(values_ok);
}

TEST_CASE("criterion 03: sampled second moments converge to the partition integral") {
  Stopwatch watch;
  GradientField field = log_ridge_field();
  Measure m = Measure::uniform_cube(3);
  Integrand h = Integrand::outer_product(3);

  std::vector<double> exact = pbe(field, h, m);
  double base = frobenius(exact);
  REQUIRE(base > 0.0);

  const long long sample_counts[] = {100, 1000, 10000, 100000, 1000000};
  std::vector<double> log_m, log_gap;
  double final_gap = 0.0;
  for (int i = 0; i < 5; ++i) {
    RngStream rng(900 + static_cast<std::uint64_t>(i));
    std::vector<double> est = mce(field, h, m, static_cast<int>(sample_counts[i]), rng);
    std::vector<double> diff(est.size());
    for (std::size_t k = 0; k < est.size(); ++k) diff[k] = est[k] - exact[k];
    double gap = frobenius(diff) / base;
    REQUIRE(gap > 0.0);
    log_m.push_back(std::log10(static_cast<double>(sample_counts[i])));
    log_gap.push_back(std::log10(gap));
    final_gap = gap;
  }

  // Least-squares slope of log gap against log sample count; root-n error
  // decay shows up as -1/2.
  double mx = mean(log_m), my = mean(log_gap);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < log_m.size(); ++i) {
    sxy += (log_m[i] - mx) * (log_gap[i] - my);
    sxx += (log_m[i] - mx) * (log_m[i] - mx);
  }
  double slope = sxy / sxx;

  double elapsed = watch.seconds();
  bool slope_ok = std::abs(slope - (-0.5)) <= 0.15;
  bool gap_ok = final_gap < 0.01;
  bool time_ok = elapsed < 60.0;
  bool ok = slope_ok && gap_ok && time_ok;
  std::printf("  slope %.3f, relative gap at 1e6 samples %.5f, %.1f s\n", slope, final_gap, elapsed);
  report(3, "sampling agrees with partition integral", ok);
  CHECK(slope_ok);
  CHECK(gap_ok);
  CHECK(time_ok);
}

TEST_CASE("criterion 04: sampled path attribution matches the closed form") {
  Stopwatch watch;
  GradientField field = log_ridge_field();

  RngStream rng(77);
  const double kRelTol = 0.005;
  bool pairs_ok = true;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> x = {rng.uniform(), rng.uniform(), rng.uniform()};
    std::vector<double> ref = {rng.uniform(), rng.uniform(), rng.uniform()};
    AttributionResult ex = tbig_exact(field, x, ref);
    AttributionResult mc = tbig(field, x, ref, 1000000, 1300 + static_cast<std::uint64_t>(k));
    double scale = 0.0;
    for (double v : ex.ig) scale = std::max(scale, std::abs(v));
    REQUIRE(scale > 0.0);
    double diff = 0.0;
    for (std::size_t p = 0; p < ex.ig.size(); ++p) diff = std::max(diff, std::abs(mc.ig[p] - ex.ig[p]));
    worst = std::max(worst, diff / scale);
    pairs_ok &= diff <= kRelTol * scale;
  }

  // Degenerate path: both estimators return exact zeros.
  std::vector<double> same = {0.31, 0.62, 0.57};
  AttributionResult zero_mc = tbig(field, same, same, 1000, 5);
  AttributionResult zero_ex = tbig_exact(field, same, same);
  bool zero_ok = true;
  for (double v : zero_mc.ig) zero_ok &= v == 0.0;
  for (double v : zero_ex.ig) zero_ok &= v == 0.0;

  double elapsed = watch.seconds();
  bool time_ok = elapsed < 60.0;
  bool ok = pairs_ok && zero_ok && time_ok;
  std::printf("  worst pair error %.4f of tolerance %.3f, %.1f s\n", worst, kRelTol, elapsed);
  report(4, "path attribution closed-form agreement", ok);
  CHECK(pairs_ok);
  CHECK(zero_ok);
  CHECK(time_ok);
}

TEST_CASE("criterion 05: direction recovery improves with sample size") {
  Stopwatch watch;
  ExperimentSpec spec;
  spec.id = ExperimentId::SubspaceLowdim;
  std::vector<ResultRow> rows = run_experiment(spec);

  std::map<std::pair<int, int>, std::vector<double>> angles;  // (dim, n) -> values
  for (const ResultRow& r : rows)
    if (r.metric == "angle") angles[{r.dim, r.n}].push_back(r.value);

  const std::vector<int> dims = {2, 3, 4};
  const std::vector<int> sizes = {100, 1000, 10000};
  bool monotone_ok = true;
  for (int dim : dims) {
    double prev = std::numbers::pi;
    for (int n : sizes) {
      double med = median(angles.at({dim, n}));
      std::printf("  dim %d n %5d median angle %.4f\n", dim, n, med);
      monotone_ok &= med < prev;
      prev = med;
    }
  }
  double anchor = median(angles.at({3, 10000}));
  bool anchor_ok = anchor < 0.35;

  double elapsed = watch.seconds();
  bool time_ok = elapsed < 600.0;
  bool ok = monotone_ok && anchor_ok && time_ok;
  std::printf("  anchor median (dim 3, n 10000) %.4f, %.1f s\n", anchor, elapsed);
  report(5, "recovery improves with sample size", ok);
  CHECK(monotone_ok);
  CHECK(anchor_ok);
  CHECK(time_ok);
}

TEST_CASE("criterion 06: sparse signals concentrate the leading eigenvector") {
  Stopwatch watch;
  ExperimentSpec spec;
  spec.id = ExperimentId::SubspaceSparse;
  std::vector<ResultRow> rows = run_experiment(spec);

  std::vector<double> energy;
  for (const ResultRow& r : rows)
    if (r.metric == "support_energy") energy.push_back(r.value);
  REQUIRE(energy.size() == 10);

  double med = median(energy);
  double elapsed = watch.seconds();
  bool energy_ok = med > 0.9;
  bool time_ok = elapsed < 300.0;
  bool ok = energy_ok && time_ok;
  std::printf("  median support energy %.4f over %zu replicates, %.1f s\n", med, energy.size(),
              elapsed);
  report(6, "sparse support concentration", ok);
  CHECK(energy_ok);
  CHECK(time_ok);
}

TEST_CASE("criterion 07: deeper trees and more data sharpen pointwise gradients") {
  Stopwatch watch;
  ExperimentSpec spec;
  spec.id = ExperimentId::GradConvergence;
  std::vector<ResultRow> rows = run_experiment(spec);

  std::map<std::pair<int, int>, std::vector<double>> angles;  // (depth, n) -> values
  for (const ResultRow& r : rows)
    if (r.metric == "mean_angle") angles[{r.depth, r.n}].push_back(r.value);

  double deep_large = mean(angles.at({12, 100000}));
  double shallow_large = mean(angles.at({4, 100000}));
  double deep_small = mean(angles.at({12, 1000}));

  bool depth_ok = deep_large < shallow_large;
  bool size_ok = deep_large < deep_small;
  bool ok = depth_ok && size_ok;
  std::printf("  mean angle: depth 12 n 1e5 %.4f, depth 4 n 1e5 %.4f, depth 12 n 1e3 %.4f, %.1f s\n",
              deep_large, shallow_large, deep_small, watch.seconds());
  report(7, "depth sharpens pointwise gradients", ok);
  CHECK(depth_ok);
  CHECK(size_ok);
}

TEST_CASE("criterion 08: recovery trend survives response noise") {
  Stopwatch watch;
  ExperimentSpec spec;
  spec.id = ExperimentId::Noise;
  std::vector<ResultRow> rows = run_experiment(spec);

  std::map<std::pair<int, int>, std::vector<double>> angles;
  for (const ResultRow& r : rows)
    if (r.metric == "angle") angles[{r.dim, r.n}].push_back(r.value);

  bool monotone_ok = true;
  for (int dim : {2, 3, 4}) {
    double prev = std::numbers::pi;
    for (int n : {100, 1000, 10000}) {
      double med = median(angles.at({dim, n}));
      std::printf("  dim %d n %5d median angle %.4f\n", dim, n, med);
      monotone_ok &= med < prev;
      prev = med;
    }
  }

  std::printf("  %.1f s\n", watch.seconds());
  report(8, "noise keeps the recovery trend", monotone_ok);
  CHECK(monotone_ok);
}

TEST_CASE("criterion 09: strong input correlation degrades gracefully") {
  Stopwatch watch;
  ExperimentSpec spec;
  spec.id = ExperimentId::Correlation;
  std::vector<ResultRow> rows = run_experiment(spec);

  std::map<double, std::vector<double>> angles;
  for (const ResultRow& r : rows)
    if (r.metric == "mean_angle") angles[r.rho].push_back(r.value);

  double at0 = median(angles.at(0.0));
  double at05 = median(angles.at(0.5));
  double at99 = median(angles.at(0.99));

  bool degrade_ok = at99 > at0;
  bool mild_ok = std::abs(at05 - at0) <= 0.20 * at0;
  bool ok = degrade_ok && mild_ok;
  std::printf("  median mean-angle: rho 0 %.4f, rho 0.5 %.4f, rho 0.99 %.4f, %.1f s\n", at0, at05,
              at99, watch.seconds());
  report(9, "correlation degrades gracefully", ok);
  CHECK(degrade_ok);
  CHECK(mild_ok);
}

TEST_CASE("criterion 10: dense symmetric linear algebra and hand angles") {
  Stopwatch watch;
  RngStream rng(4242);

  bool eig_ok = true;
  for (int k = 0; k < 100; ++k) {
    int p = 2 + k % 11;  // dimensions 2 through 12
    SymmetricMatrix m(p);
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) m.set(i, j, rng.normal());

    EigenDecomposition e = eig_sym(m);
    double scale = std::max(1.0, m.max_abs());

    double trace = 0.0, sum = 0.0;
    for (int i = 0; i < p; ++i) {
      trace += m.at(i, i);
      sum += e.values[static_cast<std::size_t>(i)];
    }
    eig_ok &= std::abs(trace - sum) <= 1e-10 * scale;

    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        double dot = 0.0, rec = 0.0;
        for (int l = 0; l < p; ++l) {
          dot += e.vectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] *
                 e.vectors[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
          rec += e.values[static_cast<std::size_t>(l)] *
                 e.vectors[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] *
                 e.vectors[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
        }
        eig_ok &= std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-10;
        eig_ok &= std::abs(rec - m.at(i, j)) <= 1e-9 * scale;
      }
  }

  // Square root defining identity on a random PSD matrix.
  bool sqrt_ok = true;
  {
    int p = 6;
    std::vector<std::vector<double>> b(static_cast<std::size_t>(p),
                                       std::vector<double>(static_cast<std::size_t>(p)));
    for (auto& row : b)
      for (double& v : row) v = rng.normal();
    SymmetricMatrix a(p);
    for (int i = 0; i < p; ++i)
      for (int j = i; j < p; ++j) {
        double s = 0.0;
        for (int l = 0; l < p; ++l)
          s += b[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] *
               b[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
        a.set(i, j, s);
      }
    SymmetricMatrix s = sqrt_psd(a);
    double scale = std::max(1.0, a.max_abs());
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        double prod = 0.0;
        for (int l = 0; l < p; ++l) prod += s.at(i, l) * s.at(l, j);
        sqrt_ok &= std::abs(prod - a.at(i, j)) <= 1e-9 * scale;
      }
  }

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  double zero_angle = principal_angle({{1.0, 0.0}}, {{1.0, 0.0}});
  double right_angle = principal_angle({{1.0, 0.0}}, {{0.0, 1.0}});
  double diag_angle = principal_angle({{1.0, 0.0}}, {{inv_sqrt2, inv_sqrt2}});
  bool angle_ok = std::abs(zero_angle) <= 1e-12 &&
                  std::abs(right_angle - std::numbers::pi / 2.0) <= 1e-12 &&
                  std::abs(diag_angle - std::numbers::pi / 4.0) <= 1e-12;

  double elapsed = watch.seconds();
  bool time_ok = elapsed < 5.0;
  bool ok = eig_ok && sqrt_ok && angle_ok && time_ok;
  std::printf("  100 matrices up to dim 12 in %.2f s\n", elapsed);
  report(10, "dense linear algebra suite", ok);
  CHECK(eig_ok);
  CHECK(sqrt_ok);
  CHECK(angle_ok);
  CHECK(time_ok);
}

TEST_CASE("criterion 11: every command is byte-identical on rerun") {
  // A rerun with the same flags and seed must reproduce output files exactly,
  // and thread count must not change experiment results.
  RngStream rng(3003);
  std::string body = "x1,x2,x3,y\n";
  for (int i = 0; i < 300; ++i) {
    double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    double y = std::sin(4.0 * a) + b * c;
    body += format_double(a) + "," + format_double(b) + "," + format_double(c) + "," +
            format_double(y) + "\n";
  }
  std::string data = testutil::write_file("accept_train.csv", body);

  auto twice = [&](const std::string& args_a, const std::string& args_b, const std::string& out_a,
                   const std::string& out_b) {
    REQUIRE(run_cli(args_a) == 0);
    REQUIRE(run_cli(args_b) == 0);
    return testutil::read_file(out_a) == testutil::read_file(out_b);
  };

  std::string tree_a = path_of("acc_tree_a.model"), tree_b = path_of("acc_tree_b.model");
  bool fit_ok = twice("fit --input " + data + " --target y --max-depth 6 --seed 3 --output " + tree_a,
                      "fit --input " + data + " --target y --max-depth 6 --seed 3 --output " + tree_b,
                      tree_a, tree_b);

  std::string forest_a = path_of("acc_forest_a.model"), forest_b = path_of("acc_forest_b.model");
  std::string forest_flags = " --target y --trees 4 --threads 3 --seed 5 --output ";
  bool forest_ok = twice("fit --input " + data + forest_flags + forest_a,
                         "fit --input " + data + forest_flags + forest_b, forest_a, forest_b);

  std::string grad_a = path_of("acc_grad_a.csv"), grad_b = path_of("acc_grad_b.csv");
  bool grad_ok = twice("grad --model " + tree_a + " --points " + data + " --output " + grad_a,
                       "grad --model " + tree_a + " --points " + data + " --output " + grad_b,
                       grad_a, grad_b);

  std::string tbas_a = path_of("acc_tbas_a.json"), tbas_b = path_of("acc_tbas_b.json");
  bool tbas_ok = twice("tbas --model " + tree_a + " --measure uniform --output " + tbas_a,
                       "tbas --model " + tree_a + " --measure uniform --output " + tbas_b, tbas_a,
                       tbas_b);

  std::string tbig_a = path_of("acc_tbig_a.json"), tbig_b = path_of("acc_tbig_b.json");
  std::string tbig_flags = " --input " + data + " --x-row 7 --samples 4000 --seed 11 --output ";
  bool tbig_ok = twice("tbig --model " + tree_a + tbig_flags + tbig_a,
                       "tbig --model " + tree_a + tbig_flags + tbig_b, tbig_a, tbig_b);

  std::string rot_a = path_of("acc_rot_a.csv"), rot_b = path_of("acc_rot_b.csv");
  bool rotate_ok = twice("rotate --model " + tree_a + " --input " + data + " --output " + rot_a,
                         "rotate --model " + tree_a + " --input " + data + " --output " + rot_b,
                         rot_a, rot_b);

  std::string exp_a = path_of("acc_exp_a"), exp_b = path_of("acc_exp_b"), exp_c = path_of("acc_exp_c");
  std::string exp_flags = "experiment --id subspace-lowdim --dims 2 --ns 300 --reps 3 --seed 6";
  REQUIRE(run_cli(exp_flags + " --threads 2 --output " + exp_a) == 0);
  REQUIRE(run_cli(exp_flags + " --threads 2 --output " + exp_b) == 0);
  REQUIRE(run_cli(exp_flags + " --threads 1 --output " + exp_c) == 0);
  bool exp_rerun_ok = testutil::read_file(exp_a + "/results.csv") ==
                          testutil::read_file(exp_b + "/results.csv") &&
                      testutil::read_file(exp_a + "/run.json") ==
                          testutil::read_file(exp_b + "/run.json");
  bool exp_threads_ok = testutil::read_file(exp_a + "/results.csv") ==
                        testutil::read_file(exp_c + "/results.csv");

  bool ok = fit_ok && forest_ok && grad_ok && tbas_ok && tbig_ok && rotate_ok && exp_rerun_ok &&
            exp_threads_ok;
  report(11, "byte-identical reruns", ok);
  CHECK(fit_ok);
  CHECK(forest_ok);
  CHECK(grad_ok);
  CHECK(tbas_ok);
  CHECK(tbig_ok);
  CHECK(rotate_ok);
  CHECK(exp_rerun_ok);
  CHECK(exp_threads_ok);
}
