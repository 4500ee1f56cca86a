#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace treegrad {

// Reproducible benchmark protocols over synthetic surfaces.  Each run yields
// a flat table of rows keyed by (experiment, replicate, grid cell, metric).
enum class ExperimentId {
  SubspaceLowdim,   // direction recovery vs sample size, 2 to 4 dims
  SubspaceSparse,   // support recovery with 3 active out of 50 coordinates
  GradConvergence,  // pointwise gradient error vs depth and sample size
  Noise,            // SubspaceLowdim with noisy responses
  Correlation,      // direction recovery under correlated inputs
  RotationCv,       // cross-validated accuracy with appended rotated features
};

ExperimentId parse_experiment(const std::string& name);
std::string experiment_name(ExperimentId id);

// Unset grid fields (empty lists, zero counts, negative noise) fall back to
// the per-protocol defaults in apply_defaults.
struct ExperimentSpec {
  ExperimentId id = ExperimentId::SubspaceLowdim;
  std::vector<int> dims;
  std::vector<int> sample_sizes;
  std::vector<int> depths;
  int repetitions = 0;
  double noise_sd = -1.0;
  std::vector<double> correlations;
  int folds = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  bool wall_timings = false;  // off by default so reruns stay byte-identical

  void apply_defaults();
};

struct ResultRow {
  std::string experiment;
  int replicate = 0;
  int dim = 0;
  int n = 0;
  int depth = 0;
  double rho = 0.0;  // NaN when the protocol has no correlation axis
  std::string rotation;
  int fold = -1;  // -1 when the protocol has no folds
  std::string metric;
  double value = 0.0;
  double seconds = 0.0;
  std::uint64_t seed = 0;  // replicate seed (base + replicate)
};

// Runs the protocol.  Tasks may execute on several threads; rows come back in
// a canonical order independent of scheduling, and all randomness derives
// from spec.seed, so equal specs give equal rows.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_results_csv_file(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace treegrad
