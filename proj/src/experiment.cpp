#include "treegrad/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "treegrad/ensemble.hpp"
#include "treegrad/gradfield.hpp"
#include "treegrad/integrodiff.hpp"
#include "treegrad/linalg.hpp"
#include "treegrad/measure.hpp"
#include "treegrad/rotation.hpp"
#include "treegrad/synthetic.hpp"
#include "treegrad/tree.hpp"
#include "treegrad/util.hpp"

namespace treegrad {

ExperimentId parse_experiment(const std::string& name) {
  if (name == "subspace-lowdim") return ExperimentId::SubspaceLowdim;
  if (name == "subspace-sparse") return ExperimentId::SubspaceSparse;
  if (name == "grad-convergence") return ExperimentId::GradConvergence;
  if (name == "noise") return ExperimentId::Noise;
  if (name == "correlation") return ExperimentId::Correlation;
  if (name == "rotation-cv") return ExperimentId::RotationCv;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

std::string experiment_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::SubspaceLowdim: return "subspace-lowdim";
    case ExperimentId::SubspaceSparse: return "subspace-sparse";
    case ExperimentId::GradConvergence: return "grad-convergence";
    case ExperimentId::Noise: return "noise";
    case ExperimentId::Correlation: return "correlation";
    case ExperimentId::RotationCv: return "rotation-cv";
  }
  throw std::invalid_argument("unknown experiment id");
}

void ExperimentSpec::apply_defaults() {
  switch (id) {
    case ExperimentId::SubspaceLowdim:
    case ExperimentId::Noise:
      if (dims.empty()) dims = {2, 3, 4};
      if (sample_sizes.empty()) sample_sizes = {100, 1000, 10000};
      if (repetitions <= 0) repetitions = 20;
      if (noise_sd < 0.0) noise_sd = (id == ExperimentId::Noise) ? 0.1 : 0.0;
      break;
    case ExperimentId::SubspaceSparse:
      if (dims.empty()) dims = {50};
      if (sample_sizes.empty()) sample_sizes = {10000};
      if (depths.empty()) depths = {12};
      if (repetitions <= 0) repetitions = 10;
      if (noise_sd < 0.0) noise_sd = 0.0;
      break;
    case ExperimentId::GradConvergence:
      if (dims.empty()) dims = {5};
      if (sample_sizes.empty()) sample_sizes = {1000, 100000};
      if (depths.empty()) depths = {4, 12};
      if (repetitions <= 0) repetitions = 5;
      if (noise_sd < 0.0) noise_sd = 0.0;
      break;
    case ExperimentId::Correlation:
      if (dims.empty()) dims = {5};
      if (sample_sizes.empty()) sample_sizes = {10000};
      if (depths.empty()) depths = {12};
      if (correlations.empty()) correlations = {0.0, 0.5, 0.9, 0.99};
      if (repetitions <= 0) repetitions = 10;
      if (noise_sd < 0.0) noise_sd = 0.0;
      break;
    case ExperimentId::RotationCv:
      if (dims.empty()) dims = {4};
      if (sample_sizes.empty()) sample_sizes = {2000};
      if (depths.empty()) depths = {4};
      if (folds <= 0) folds = 10;
      if (repetitions <= 0) repetitions = 3;
      if (noise_sd < 0.0) noise_sd = 0.0;
      break;
  }
  if (folds <= 0) folds = 10;
}

namespace {

constexpr double kNoRho = std::numeric_limits<double>::quiet_NaN();

// Leading eigenvector of the field's subspace matrix under the uniform
// measure, plus that matrix's full result for callers that need more.
std::vector<double> leading_direction(const GradientField& gf) {
  SubspaceResult s = tbas(gf, Measure::uniform_cube(gf.dim()));
  return s.eigenvectors[0];
}

double direction_angle(const std::vector<double>& v, const std::vector<double>& a) {
  return principal_angle({v}, {a});
}

struct TaskResult {
  std::vector<ResultRow> rows;
};

// Shared scaffolding: every protocol enumerates (cell, replicate) tasks and
// fills rows; seeds derive from the replicate seed plus cell coordinates so
// scheduling order cannot matter.
using TaskFn = std::function<void(std::vector<ResultRow>&)>;

std::vector<ResultRow> run_tasks(const std::vector<TaskFn>& tasks, int threads, bool wall) {
  std::vector<TaskResult> slots(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    auto start = std::chrono::steady_clock::now();
    tasks[i](slots[i].rows);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (ResultRow& r : slots[i].rows) r.seconds = wall ? secs : 0.0;
  });
  std::vector<ResultRow> rows;
  for (TaskResult& s : slots)
    for (ResultRow& r : s.rows) rows.push_back(std::move(r));
  return rows;
}

// ---------------------------------------------------------------------------
// subspace-lowdim and noise: ridge-cosine, cyclic-median trees grown on the
// loglog schedule, angle between the leading direction and the planted one.
// ---------------------------------------------------------------------------

void lowdim_task(const ExperimentSpec& spec, int dim, int n, int rep, std::vector<ResultRow>& rows) {
  std::uint64_t rep_seed = spec.seed + static_cast<std::uint64_t>(rep);
  RngStream dir_rng(derive_seed(rep_seed, static_cast<std::uint64_t>(dim), 0, 1));
  std::vector<double> a = make_direction(dim, dim, dir_rng);

  SyntheticSpec syn;
  syn.fn = SyntheticFunction::RidgeCosine;
  syn.dim = dim;
  syn.direction = a;
  syn.sparsity = dim;
  syn.noise_sd = spec.noise_sd;
  syn.seed = derive_seed(rep_seed, static_cast<std::uint64_t>(dim), static_cast<std::uint64_t>(n), 2);
  Dataset data = generate_synthetic(syn, n);

  FitConfig cfg;
  cfg.mode = FitMode::CyclicMedian;
  cfg.schedule = DepthSchedule::LogLog;
  cfg.schedule_scale = 1.0;
  RegressionTree tree = RegressionTree::fit(data, cfg);
  GradientField gf = GradientField::extract(tree);

  ResultRow row;
  row.experiment = experiment_name(spec.id);
  row.replicate = rep;
  row.dim = dim;
  row.n = n;
  row.depth = loglog_depth(n, dim, cfg.schedule_scale);
  row.rho = kNoRho;
  row.metric = "angle";
  row.value = direction_angle(leading_direction(gf), a);
  row.seed = rep_seed;
  rows.push_back(std::move(row));
}

// ---------------------------------------------------------------------------
// subspace-sparse: ridge-cosine with 3 active coordinates, fixed-depth trees,
// support energy of the leading direction plus its angle to the truth.
// ---------------------------------------------------------------------------

void sparse_task(const ExperimentSpec& spec, int dim, int n, int depth, int rep,
                 std::vector<ResultRow>& rows) {
  std::uint64_t rep_seed = spec.seed + static_cast<std::uint64_t>(rep);
  RngStream dir_rng(derive_seed(rep_seed, static_cast<std::uint64_t>(dim), 0, 1));
  std::vector<double> a = make_direction(dim, std::min(3, dim), dir_rng);

  SyntheticSpec syn;
  syn.fn = SyntheticFunction::RidgeCosine;
  syn.dim = dim;
  syn.direction = a;
  syn.sparsity = std::min(3, dim);
  syn.noise_sd = spec.noise_sd;
  syn.seed = derive_seed(rep_seed, static_cast<std::uint64_t>(dim), static_cast<std::uint64_t>(n), 2);
  Dataset data = generate_synthetic(syn, n);

  FitConfig cfg;
  cfg.mode = FitMode::Cart;
  cfg.max_depth = depth;
  RegressionTree tree = RegressionTree::fit(data, cfg);
  GradientField gf = GradientField::extract(tree);
  std::vector<double> v = leading_direction(gf);

  double energy = 0.0;
  for (int p = 0; p < dim; ++p)
    if (a[p] != 0.0) energy += v[p] * v[p];

  ResultRow base;
  base.experiment = experiment_name(spec.id);
  base.replicate = rep;
  base.dim = dim;
  base.n = n;
  base.depth = depth;
  base.rho = kNoRho;
  base.seed = rep_seed;

  ResultRow r1 = base;
  r1.metric = "support_energy";
  r1.value = energy;
  rows.push_back(std::move(r1));
  ResultRow r2 = base;
  r2.metric = "angle";
  r2.value = direction_angle(v, a);
  rows.push_back(std::move(r2));
}

// ---------------------------------------------------------------------------
// grad-convergence: log-ridge, fixed-depth trees, mean angle between the
// estimated and true gradient over 100 uniform probe points.
// ---------------------------------------------------------------------------

void gradconv_task(const ExperimentSpec& spec, int dim, int n, int depth, int rep,
                   std::vector<ResultRow>& rows) {
  std::uint64_t rep_seed = spec.seed + static_cast<std::uint64_t>(rep);
  RngStream dir_rng(derive_seed(rep_seed, static_cast<std::uint64_t>(dim), 0, 1));
  std::vector<double> a = make_direction(dim, dim, dir_rng);

  SyntheticSpec syn;
  syn.fn = SyntheticFunction::LogRidge;
  syn.dim = dim;
  syn.direction = a;
  syn.sparsity = dim;
  syn.noise_sd = spec.noise_sd;
  syn.seed = derive_seed(rep_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(depth), 2);
  Dataset data = generate_synthetic(syn, n);

  FitConfig cfg;
  cfg.mode = FitMode::Cart;
  cfg.max_depth = depth;
  RegressionTree tree = RegressionTree::fit(data, cfg);
  GradientField gf = GradientField::extract(tree);

  RngStream probe_rng(derive_seed(rep_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(depth), 3));
  const int probes = 100;
  double sum = 0.0;
  std::vector<double> x(dim);
  for (int i = 0; i < probes; ++i) {
    for (int p = 0; p < dim; ++p) x[p] = probe_rng.uniform();
    std::span<const double> g = gf.grad_at(x);
    std::vector<double> gt = true_gradient(syn, x);
    sum += vector_angle(g, gt);
  }

  ResultRow row;
  row.experiment = experiment_name(spec.id);
  row.replicate = rep;
  row.dim = dim;
  row.n = n;
  row.depth = depth;
  row.rho = kNoRho;
  row.metric = "mean_angle";
  row.value = sum / probes;
  row.seed = rep_seed;
  rows.push_back(std::move(row));
}

// ---------------------------------------------------------------------------
// correlation: Ackley responses, correlated truncated-normal inputs, mean
// angle between estimated and true gradients at points drawn from the same
// input law.
// ---------------------------------------------------------------------------

void correlation_task(const ExperimentSpec& spec, int dim, int n, int depth, double rho, int rep,
                      std::vector<ResultRow>& rows) {
  std::uint64_t rep_seed = spec.seed + static_cast<std::uint64_t>(rep);
  std::uint64_t rho_tag = static_cast<std::uint64_t>(std::llround(rho * 100.0));

  SyntheticSpec syn;
  syn.fn = SyntheticFunction::Ackley;
  syn.dim = dim;
  syn.noise_sd = spec.noise_sd;
  syn.law = InputLaw::TruncatedNormal;
  syn.correlation = rho;
  syn.seed = derive_seed(rep_seed, static_cast<std::uint64_t>(dim), rho_tag, 2);
  Dataset data = generate_synthetic(syn, n);

  FitConfig cfg;
  cfg.mode = FitMode::Cart;
  cfg.max_depth = depth;
  RegressionTree tree = RegressionTree::fit(data, cfg);
  GradientField gf = GradientField::extract(tree);

  // Probe points are uniform on the cube, matching the convergence protocol,
  // so the metric reflects accuracy everywhere rather than only where the
  // correlated law concentrates its mass.
  RngStream eval_rng(derive_seed(rep_seed, static_cast<std::uint64_t>(dim), rho_tag, 3));
  const int probes = 100;
  double sum = 0.0;
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (int i = 0; i < probes; ++i) {
    for (int p = 0; p < dim; ++p) x[static_cast<std::size_t>(p)] = eval_rng.uniform();
    std::span<const double> g = gf.grad_at(x);
    std::vector<double> gt = true_gradient(syn, x);
    sum += vector_angle(g, gt);
  }

  ResultRow row;
  row.experiment = experiment_name(spec.id);
  row.replicate = rep;
  row.dim = dim;
  row.n = n;
  row.depth = depth;
  row.rho = rho;
  row.metric = "mean_angle";
  row.value = sum / probes;
  row.seed = rep_seed;
  rows.push_back(std::move(row));
}

// ---------------------------------------------------------------------------
// rotation-cv: k-fold accuracy of a fixed-depth tree on ridge-cosine data
// with appended feature columns from four rotation choices.  Rotations are
// derived from the training fold only; original columns pass through
// unchanged.
// ---------------------------------------------------------------------------

Dataset take_rows(const Dataset& d, const std::vector<int>& rows) {
  Dataset out;
  out.rows = static_cast<int>(rows.size());
  out.cols = d.cols;
  out.feature_names = d.feature_names;
  out.x.reserve(static_cast<std::size_t>(out.rows) * out.cols);
  out.y.reserve(out.rows);
  for (int r : rows) {
    std::span<const double> xr = d.row(r);
    out.x.insert(out.x.end(), xr.begin(), xr.end());
    out.y.push_back(d.y[r]);
  }
  return out;
}

void rotation_task(const ExperimentSpec& spec, int dim, int n, int depth, int rep,
                   std::vector<ResultRow>& rows) {
  std::uint64_t rep_seed = spec.seed + static_cast<std::uint64_t>(rep);
  RngStream dir_rng(derive_seed(rep_seed, static_cast<std::uint64_t>(dim), 0, 1));
  std::vector<double> a = make_direction(dim, dim, dir_rng);

  SyntheticSpec syn;
  syn.fn = SyntheticFunction::RidgeCosine;
  syn.dim = dim;
  syn.direction = a;
  syn.sparsity = dim;
  syn.noise_sd = spec.noise_sd;
  syn.seed = derive_seed(rep_seed, static_cast<std::uint64_t>(dim), static_cast<std::uint64_t>(n), 2);
  Dataset data = generate_synthetic(syn, n);

  // One fold assignment per replicate, shared by all rotations.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  RngStream fold_rng(derive_seed(rep_seed, static_cast<std::uint64_t>(n), 17, 4));
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(fold_rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  const int k = spec.folds;
  const int d_cols = component_count(dim);

  for (int f = 0; f < k; ++f) {
    int lo = static_cast<int>(static_cast<long long>(n) * f / k);
    int hi = static_cast<int>(static_cast<long long>(n) * (f + 1) / k);
    std::vector<int> test_rows(order.begin() + lo, order.begin() + hi);
    std::vector<int> train_rows;
    train_rows.reserve(n - (hi - lo));
    train_rows.insert(train_rows.end(), order.begin(), order.begin() + lo);
    train_rows.insert(train_rows.end(), order.begin() + hi, order.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    Dataset train = take_rows(data, train_rows);
    Dataset test = take_rows(data, test_rows);

    for (const std::string& kind : {std::string("tbas"), std::string("pca"), std::string("random"),
                                    std::string("identity")}) {
      Dataset train_aug = train, test_aug = test;
      if (kind != "identity") {
        RotationColumns cols;
        if (kind == "tbas") {
          // Rotation source: a deeper tree on the training fold reads the
          // ridge direction better than the shallow downstream model.
          FitConfig src;
          src.mode = FitMode::Cart;
          src.max_depth = std::max(depth, 8);
          RegressionTree source = RegressionTree::fit(train, src);
          GradientField gf = GradientField::extract(source);
          SubspaceResult s = tbas(gf, Measure::empirical(train.x, train.cols));
          cols = subspace_rotation(s, d_cols);
        } else if (kind == "pca") {
          cols = pca_rotation(train, d_cols);
        } else {
          RngStream rot_rng(derive_seed(rep_seed, static_cast<std::uint64_t>(f), 99, 5));
          cols = random_rotation(dim, d_cols, rot_rng);
        }
        train_aug = augment(train, cols, kind + "_");
        test_aug = augment(test, cols, kind + "_");
      }

      auto [train_norm, norm] = normalize_unit_cube(train_aug);
      FitConfig cfg;
      cfg.mode = FitMode::Cart;
      cfg.max_depth = depth;
      RegressionTree model = RegressionTree::fit(train_norm, cfg);

      double sse = 0.0;
      std::vector<double> q(train_aug.cols);
      for (int r = 0; r < test_aug.rows; ++r) {
        std::span<const double> xr = test_aug.row(r);
        for (int p = 0; p < test_aug.cols; ++p) q[p] = norm.forward(p, xr[p]);
        double err = model.predict(q) - test_aug.y[r];
        sse += err * err;
      }
      double rmse = std::sqrt(sse / test_aug.rows);

      ResultRow row;
      row.experiment = experiment_name(spec.id);
      row.replicate = rep;
      row.dim = dim;
      row.n = n;
      row.depth = depth;
      row.rho = kNoRho;
      row.rotation = kind;
      row.fold = f;
      row.metric = "rmse";
      row.value = rmse;
      row.seed = rep_seed;
      rows.push_back(std::move(row));
    }
  }
}

bool row_less(const ResultRow& x, const ResultRow& y) {
  auto rho_key = [](double v) { return std::isnan(v) ? -1.0 : v; };
  auto key = [&](const ResultRow& r) {
    return std::tuple<const std::string&, int, int, int, double, const std::string&, int,
                      const std::string&, int>(
        r.experiment, r.dim, r.n, r.depth, rho_key(r.rho), r.rotation, r.fold, r.metric,
        r.replicate);
  };
  return key(x) < key(y);
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec_in) {
  ExperimentSpec spec = spec_in;
  spec.apply_defaults();

  std::vector<TaskFn> tasks;
  switch (spec.id) {
    case ExperimentId::SubspaceLowdim:
    case ExperimentId::Noise:
      for (int dim : spec.dims)
        for (int n : spec.sample_sizes)
          for (int rep = 0; rep < spec.repetitions; ++rep)
            tasks.push_back([&spec, dim, n, rep](std::vector<ResultRow>& rows) {
              lowdim_task(spec, dim, n, rep, rows);
            });
      break;
    case ExperimentId::SubspaceSparse:
      for (int dim : spec.dims)
        for (int n : spec.sample_sizes)
          for (int depth : spec.depths)
            for (int rep = 0; rep < spec.repetitions; ++rep)
              tasks.push_back([&spec, dim, n, depth, rep](std::vector<ResultRow>& rows) {
                sparse_task(spec, dim, n, depth, rep, rows);
              });
      break;
    case ExperimentId::GradConvergence:
      for (int dim : spec.dims)
        for (int n : spec.sample_sizes)
          for (int depth : spec.depths)
            for (int rep = 0; rep < spec.repetitions; ++rep)
              tasks.push_back([&spec, dim, n, depth, rep](std::vector<ResultRow>& rows) {
                gradconv_task(spec, dim, n, depth, rep, rows);
              });
      break;
    case ExperimentId::Correlation:
      for (int dim : spec.dims)
        for (int n : spec.sample_sizes)
          for (int depth : spec.depths)
            for (double rho : spec.correlations)
              for (int rep = 0; rep < spec.repetitions; ++rep)
                tasks.push_back([&spec, dim, n, depth, rho, rep](std::vector<ResultRow>& rows) {
                  correlation_task(spec, dim, n, depth, rho, rep, rows);
                });
      break;
    case ExperimentId::RotationCv:
      for (int dim : spec.dims)
        for (int n : spec.sample_sizes)
          for (int depth : spec.depths)
            for (int rep = 0; rep < spec.repetitions; ++rep)
              tasks.push_back([&spec, dim, n, depth, rep](std::vector<ResultRow>& rows) {
                rotation_task(spec, dim, n, depth, rep, rows);
              });
      break;
  }

  std::vector<ResultRow> rows = run_tasks(tasks, spec.threads, spec.wall_timings);
  std::stable_sort(rows.begin(), rows.end(), row_less);
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "experiment,replicate,dim,n,depth,rho,rotation,fold,metric,value,seconds,seed\n";
  for (const ResultRow& r : rows) {
    out << r.experiment << ',' << r.replicate << ',' << r.dim << ',' << r.n << ',' << r.depth
        << ',';
    if (!std::isnan(r.rho)) out << format_double(r.rho);
    out << ',' << r.rotation << ',';
    if (r.fold >= 0) out << r.fold;
    out << ',' << r.metric << ',' << format_double(r.value) << ',' << format_double(r.seconds)
        << ',' << r.seed << "\n";
  }
}

void write_results_csv_file(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_results_csv(out, rows);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace treegrad
