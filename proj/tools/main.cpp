// Command-line front end: fit models, evaluate gradient fields, and run the
// benchmark protocols.  Every command is deterministic given --seed; output
// files are written with full-precision round-trip formatting so a rerun is
// byte-identical.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treegrad/dataset.hpp"
#include "treegrad/ensemble.hpp"
#include "treegrad/experiment.hpp"
#include "treegrad/gradfield.hpp"
#include "treegrad/integrodiff.hpp"
#include "treegrad/measure.hpp"
#include "treegrad/rotation.hpp"
#include "treegrad/tree.hpp"
#include "treegrad/util.hpp"

namespace tg = treegrad;

namespace {

// ===========================================================================
// Model files: normalization metadata plus a tree or forest block
// ===========================================================================

struct Model {
  tg::Normalizer norm;
  std::vector<std::string> feature_names;
  std::string target;
  std::optional<tg::RegressionTree> tree;
  std::optional<tg::Forest> forest;

  int dim() const { return norm.dim(); }
  bool is_forest() const { return forest.has_value(); }

  const tg::RegressionTree& first_tree() const { return tree ? *tree : forest->tree(0); }

  std::vector<double> grad_cube(std::span<const double> q) const {
    if (tree) {
      auto g = gf->grad_at(q);
      return {g.begin(), g.end()};
    }
    return forest->grad_at(q);
  }

  std::shared_ptr<tg::GradientField> gf;  // only for single trees
};

void save_model(const std::string& path, const tg::Normalizer& norm,
                const std::vector<std::string>& names, const std::string& target,
                const tg::RegressionTree* tree, const tg::Forest* forest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "model v1\n";
  out << "target " << target << "\n";
  out << "features " << norm.dim() << "\n";
  for (int p = 0; p < norm.dim(); ++p) {
    out << "feature " << tg::format_double(norm.lo[p]) << ' ' << tg::format_double(norm.hi[p])
        << ' ' << (norm.constant[p] ? 1 : 0) << ' ' << names[p] << "\n";
  }
  if (tree)
    tree->save(out);
  else
    forest->save(out);
  out << "end model\n";
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || tg::trim(line) != "model v1")
    throw std::runtime_error("'" + path + "' is not a model file");

  Model m;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "': truncated model header");
  {
    auto tok = tg::split(tg::trim(line), ' ');
    if (tok.size() != 2 || tok[0] != "target")
      throw std::runtime_error("'" + path + "': expected 'target' line");
    m.target = tok[1];
  }
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "': truncated model header");
  auto tok = tg::split(tg::trim(line), ' ');
  if (tok.size() != 2 || tok[0] != "features")
    throw std::runtime_error("'" + path + "': expected 'features' line");
  int p_count = static_cast<int>(tg::parse_int(tok[1]));
  if (p_count < 1) throw std::runtime_error("'" + path + "': bad feature count");

  for (int p = 0; p < p_count; ++p) {
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "': truncated feature list");
    auto ft = tg::split(tg::trim(line), ' ');
    if (ft.size() < 5 || ft[0] != "feature")
      throw std::runtime_error("'" + path + "': malformed feature line");
    m.norm.lo.push_back(tg::parse_double(ft[1]));
    m.norm.hi.push_back(tg::parse_double(ft[2]));
    m.norm.constant.push_back(tg::parse_int(ft[3]) != 0);
    std::string name = ft[4];
    for (std::size_t i = 5; i < ft.size(); ++i) name += " " + ft[i];
    m.feature_names.push_back(name);
  }

  // Peek at the next keyword to choose tree or forest.
  std::streampos pos = in.tellg();
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "': missing model body");
  std::string head = tg::split(tg::trim(line), ' ')[0];
  in.seekg(pos);
  if (head == "tree") {
    m.tree = tg::RegressionTree::load(in);
    m.gf = std::make_shared<tg::GradientField>(
        tg::GradientField::extract(std::make_shared<const tg::RegressionTree>(*m.tree)));
  } else if (head == "forest") {
    m.forest = tg::Forest::load(in);
  } else {
    throw std::runtime_error("'" + path + "': expected a tree or forest block");
  }
  if (static_cast<int>(m.feature_names.size()) != m.first_tree().dim())
    throw std::runtime_error("'" + path + "': feature metadata does not match the model body");
  if (!std::getline(in, line) || tg::trim(line) != "end model")
    throw std::runtime_error("'" + path + "': missing 'end model'");
  return m;
}

// ===========================================================================
// Point input
// ===========================================================================

// Reads the model's feature columns (by name) from a CSV, in original units.
std::vector<std::vector<double>> load_points(const std::string& path,
                                             const std::vector<std::string>& names) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");
  auto header = tg::split(tg::trim(line), ',');
  for (auto& h : header) h = tg::trim(h);
  std::vector<int> where(names.size(), -1);
  for (std::size_t j = 0; j < names.size(); ++j) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == names[j]) where[j] = static_cast<int>(i);
    if (where[j] < 0)
      throw std::runtime_error("'" + path + "' has no column named '" + names[j] + "'");
  }
  std::vector<std::vector<double>> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (tg::trim(line).empty()) continue;
    auto fields = tg::split(line, ',');
    if (fields.size() != header.size())
      throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) +
                               ": wrong field count");
    std::vector<double> pt(names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
      try {
        pt[j] = tg::parse_double(fields[where[j]]);
      } catch (const std::exception&) {
        throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) + ", column '" +
                                 names[j] + "': not a number");
      }
    }
    out.push_back(std::move(pt));
  }
  if (out.empty()) throw std::runtime_error("'" + path + "' has no data rows");
  return out;
}

std::vector<double> parse_point(const std::string& csv, int dim) {
  auto parts = tg::split(csv, ',');
  if (static_cast<int>(parts.size()) != dim)
    throw CLI::ValidationError("point", "expected " + std::to_string(dim) + " comma-separated values");
  std::vector<double> out(dim);
  for (int i = 0; i < dim; ++i) out[i] = tg::parse_double(parts[i]);
  return out;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << body;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void emit(const std::string& output, const std::string& body) {
  if (output.empty())
    std::cout << body;
  else
    write_text_file(output, body);
}

// ===========================================================================
// Subcommand bodies
// ===========================================================================

struct FitArgs {
  std::string input, target, output;
  std::string mode = "cart";
  std::string schedule = "fixed";
  double schedule_scale = 1.0;
  int max_depth = 6;
  int min_leaf = 1;
  int trees = 1;
  double sample_fraction = 1.0;
  double feature_fraction = 1.0;
  bool without_replacement = false;
  int threads = 1;
  std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a) {
  tg::Dataset raw = tg::load_csv(a.input, a.target);
  auto [data, norm] = tg::normalize_unit_cube(raw);

  tg::FitConfig cfg;
  cfg.mode = a.mode == "cart" ? tg::FitMode::Cart : tg::FitMode::CyclicMedian;
  cfg.max_depth = a.max_depth;
  cfg.min_leaf = a.min_leaf;
  cfg.schedule = a.schedule == "loglog" ? tg::DepthSchedule::LogLog : tg::DepthSchedule::Fixed;
  cfg.schedule_scale = a.schedule_scale;
  cfg.seed = a.seed;

  double train_sse = 0.0;
  if (a.trees == 1) {
    tg::RegressionTree tree = tg::RegressionTree::fit(data, cfg);
    for (int r = 0; r < data.rows; ++r) {
      double e = tree.predict(data.row(r)) - data.y[r];
      train_sse += e * e;
    }
    save_model(a.output, norm, data.feature_names, a.target, &tree, nullptr);
    std::cout << "tree: depth " << tree.depth() << ", " << tree.leaf_count() << " leaves, "
              << tree.node_count() << " nodes\n";
  } else {
    tg::BootstrapConfig boot;
    boot.sample_fraction = a.sample_fraction;
    boot.feature_fraction = a.feature_fraction;
    boot.with_replacement = !a.without_replacement;
    tg::Forest forest = tg::Forest::fit(data, cfg, a.trees, boot, a.threads);
    for (int r = 0; r < data.rows; ++r) {
      double e = forest.predict(data.row(r)) - data.y[r];
      train_sse += e * e;
    }
    save_model(a.output, norm, data.feature_names, a.target, nullptr, &forest);
    std::cout << "forest: " << forest.tree_count() << " trees\n";
  }
  std::cout << "train rmse " << tg::format_double(std::sqrt(train_sse / data.rows)) << "\n";
  std::cout << "wrote " << a.output << "\n";
  return 0;
}

struct GradArgs {
  std::string model, points, output;
};

int cmd_grad(const GradArgs& a) {
  Model m = load_model(a.model);
  std::vector<std::vector<double>> pts = load_points(a.points, m.feature_names);

  std::ostringstream body;
  for (int p = 0; p < m.dim(); ++p) body << (p ? "," : "") << "g_" << m.feature_names[p];
  body << "\n";
  for (const auto& pt : pts) {
    std::vector<double> q = m.norm.forward_point(pt);
    std::vector<double> g = m.grad_cube(q);
    for (int p = 0; p < m.dim(); ++p) {
      // Chain rule back to original units; constant features carry slope 0.
      double gp = m.norm.constant[p] ? 0.0 : g[p] / (m.norm.hi[p] - m.norm.lo[p]);
      body << (p ? "," : "") << tg::format_double(gp);
    }
    body << "\n";
  }
  emit(a.output, body.str());
  return 0;
}

struct TbasArgs {
  std::string model, input, output, rotate_output;
  std::string measure = "empirical";
  int components = 0;
};

tg::Measure build_measure(const std::string& kind, const Model& m,
                          const std::vector<std::vector<double>>* pts_cube) {
  if (kind == "uniform") return tg::Measure::uniform_cube(m.dim());
  if (kind == "empirical") {
    if (!pts_cube)
      throw CLI::ValidationError("--measure", "empirical measure needs --input data");
    std::vector<double> flat;
    flat.reserve(pts_cube->size() * m.dim());
    for (const auto& q : *pts_cube) flat.insert(flat.end(), q.begin(), q.end());
    return tg::Measure::empirical(std::move(flat), m.dim());
  }
  throw CLI::ValidationError("--measure", "unknown measure '" + kind + "'");
}

int cmd_tbas(const TbasArgs& a) {
  Model m = load_model(a.model);
  std::optional<std::vector<std::vector<double>>> pts_raw;
  std::optional<std::vector<std::vector<double>>> pts_cube;
  if (!a.input.empty()) {
    pts_raw = load_points(a.input, m.feature_names);
    pts_cube.emplace();
    pts_cube->reserve(pts_raw->size());
    for (const auto& pt : *pts_raw) pts_cube->push_back(m.norm.forward_point(pt));
  }

  tg::Measure measure = build_measure(a.measure, m, pts_cube ? &*pts_cube : nullptr);
  tg::SubspaceResult s = m.is_forest() ? m.forest->tbas(measure) : tg::tbas(*m.gf, measure);
  emit(a.output, tg::subspace_to_json(s) + "\n");

  if (!a.rotate_output.empty()) {
    if (!pts_raw) throw CLI::ValidationError("--rotate", "rotated output needs --input data");
    int d = a.components > 0 ? a.components : tg::component_count(m.dim());
    tg::RotationColumns cols = tg::subspace_rotation(s, d);

    // Projections come from normalized coordinates; original columns pass
    // through in their original units.
    std::ostringstream body;
    for (int p = 0; p < m.dim(); ++p) body << (p ? "," : "") << m.feature_names[p];
    for (int j = 0; j < d; ++j) body << ",as_" << (j + 1);
    body << "\n";
    for (std::size_t i = 0; i < pts_raw->size(); ++i) {
      for (int p = 0; p < m.dim(); ++p)
        body << (p ? "," : "") << tg::format_double((*pts_raw)[i][p]);
      for (int j = 0; j < d; ++j)
        body << ',' << tg::format_double(cols.scales[j] * tg::dot((*pts_cube)[i], cols.directions[j]));
      body << "\n";
    }
    write_text_file(a.rotate_output, body.str());
  }
  return 0;
}

struct TbigArgs {
  std::string model, input, output;
  std::string x_text, ref_text;
  int x_row = -1, ref_row = -1;
  int samples = 500;
  std::uint64_t seed = 0;
  bool exact = false;
};

int cmd_tbig(const TbigArgs& a) {
  Model m = load_model(a.model);
  std::optional<std::vector<std::vector<double>>> pts;
  if (!a.input.empty()) pts = load_points(a.input, m.feature_names);

  auto pick = [&](const std::string& text, int row, const char* what) -> std::vector<double> {
    if (!text.empty()) return parse_point(text, m.dim());
    if (row >= 0) {
      if (!pts) throw CLI::ValidationError(what, "row selection needs --input data");
      if (row >= static_cast<int>(pts->size()))
        throw CLI::ValidationError(what, "row index past the end of --input");
      return (*pts)[row];
    }
    throw CLI::ValidationError(what, "no point given");
  };

  std::vector<double> x = pick(a.x_text, a.x_row, "--x");
  std::vector<double> ref;
  std::string ref_kind = "explicit";
  if (!a.ref_text.empty() || a.ref_row >= 0) {
    ref = pick(a.ref_text, a.ref_row, "--ref");
  } else {
    if (!pts)
      throw CLI::ValidationError("--ref", "default reference needs --input data to average");
    ref.assign(m.dim(), 0.0);
    for (const auto& pt : *pts)
      for (int p = 0; p < m.dim(); ++p) ref[p] += pt[p];
    for (double& v : ref) v /= static_cast<double>(pts->size());
    ref_kind = "input-mean";
  }

  std::vector<double> xq = m.norm.forward_point(x);
  std::vector<double> refq = m.norm.forward_point(ref);

  tg::AttributionResult r;
  std::string aggregation;
  if (m.is_forest()) {
    if (a.exact)
      throw CLI::ValidationError("--exact", "closed form is only available for single trees");
    r = m.forest->tbig(xq, refq, a.samples, a.seed);
    aggregation = "field-average";
  } else if (a.exact) {
    r = tg::tbig_exact(*m.gf, xq, refq);
  } else {
    r = tg::tbig(*m.gf, xq, refq, a.samples, a.seed);
  }

  nlohmann::ordered_json j = nlohmann::ordered_json::parse(tg::attribution_to_json(r));
  nlohmann::ordered_json meta;
  meta["reference"] = ref_kind;
  meta["units"] = "normalized";
  if (!aggregation.empty()) meta["aggregation"] = aggregation;
  j["metadata"] = meta;
  emit(a.output, j.dump(2) + "\n");
  return 0;
}

struct RotateArgs {
  std::string model, input, output;
  std::string measure = "empirical";
  int components = 0;
};

int cmd_rotate(const RotateArgs& a) {
  TbasArgs t;
  t.model = a.model;
  t.input = a.input;
  t.output = "/dev/null";
  t.rotate_output = a.output;
  t.measure = a.measure;
  t.components = a.components;
  return cmd_tbas(t);
}

struct ExperimentArgs {
  std::string id = "subspace-lowdim";
  std::string output_dir = ".";
  std::string dims, ns, depths, rhos;
  int reps = 0;
  int folds = 0;
  double noise = -1.0;
  std::uint64_t seed = 0;
  int threads = 1;
  bool wall_timings = false;
};

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& text, Parse parse) {
  std::vector<T> out;
  if (text.empty()) return out;
  for (const std::string& item : tg::split(text, ','))
    out.push_back(static_cast<T>(parse(item)));
  return out;
}

int cmd_experiment(const ExperimentArgs& a) {
  tg::ExperimentSpec spec;
  spec.id = tg::parse_experiment(a.id);
  spec.dims = parse_list<int>(a.dims, tg::parse_int);
  spec.sample_sizes = parse_list<int>(a.ns, tg::parse_int);
  spec.depths = parse_list<int>(a.depths, tg::parse_int);
  spec.correlations = parse_list<double>(a.rhos, tg::parse_double);
  spec.repetitions = a.reps;
  spec.folds = a.folds;
  spec.noise_sd = a.noise;
  spec.seed = a.seed;
  spec.threads = a.threads;
  spec.wall_timings = a.wall_timings;

  std::vector<tg::ResultRow> rows = tg::run_experiment(spec);

  std::filesystem::create_directories(a.output_dir);
  std::string results = a.output_dir + "/results.csv";
  tg::write_results_csv_file(results, rows);

  tg::ExperimentSpec resolved = spec;
  resolved.apply_defaults();
  nlohmann::ordered_json j;
  j["experiment"] = tg::experiment_name(resolved.id);
  j["seed"] = resolved.seed;
  j["dims"] = resolved.dims;
  j["ns"] = resolved.sample_sizes;
  j["depths"] = resolved.depths;
  j["repetitions"] = resolved.repetitions;
  j["noise_sd"] = resolved.noise_sd;
  j["correlations"] = resolved.correlations;
  j["folds"] = resolved.folds;
  j["threads"] = resolved.threads;
  j["wall_timings"] = resolved.wall_timings;
  nlohmann::ordered_json notes;
  switch (resolved.id) {
    case tg::ExperimentId::SubspaceLowdim:
    case tg::ExperimentId::Noise:
      notes["depth_schedule"] = "ceil(P * log2 log2 N)";
      break;
    case tg::ExperimentId::Correlation:
      notes["response"] = "ackley on [-2,2]^P via z = 4x - 2";
      notes["inputs"] = "truncated normal, mean 0.5, sd 0.15, equicorrelated";
      break;
    case tg::ExperimentId::RotationCv:
      notes["rotations"] = "derived from the training fold; original columns unchanged";
      break;
    default:
      break;
  }
  j["notes"] = notes;
  write_text_file(a.output_dir + "/run.json", j.dump(2) + "\n");

  std::cout << "wrote " << results << " (" << rows.size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient fields and sensitivity estimates from regression trees"};
  app.require_subcommand(1);

  FitArgs fit;
  CLI::App* cfit = app.add_subcommand("fit", "Fit a tree or forest to a CSV dataset");
  cfit->add_option("--input", fit.input, "training CSV with a header row")->required();
  cfit->add_option("--target", fit.target, "response column name")->required();
  cfit->add_option("--output", fit.output, "model file to write")->required();
  cfit->add_option("--mode", fit.mode, "split policy")->check(CLI::IsMember({"cart", "cyclic"}));
  cfit->add_option("--max-depth", fit.max_depth, "depth limit")->check(CLI::Range(1, 40));
  cfit->add_option("--min-leaf", fit.min_leaf, "minimum points per leaf")->check(CLI::PositiveNumber);
  cfit->add_option("--depth-schedule", fit.schedule, "fixed depth or loglog growth (cyclic only)")
      ->check(CLI::IsMember({"fixed", "loglog"}));
  cfit->add_option("--schedule-scale", fit.schedule_scale, "loglog schedule multiplier")
      ->check(CLI::PositiveNumber);
  cfit->add_option("--trees", fit.trees, "tree count; above 1 fits a bagged forest")
      ->check(CLI::PositiveNumber);
  cfit->add_option("--sample-fraction", fit.sample_fraction, "bootstrap row fraction per tree");
  cfit->add_option("--feature-fraction", fit.feature_fraction, "candidate feature fraction per split");
  cfit->add_flag("--without-replacement", fit.without_replacement, "draw bootstrap rows without replacement");
  cfit->add_option("--threads", fit.threads, "threads for forest fitting")->check(CLI::PositiveNumber);
  cfit->add_option("--seed", fit.seed, "random seed");

  GradArgs grad;
  CLI::App* cgrad = app.add_subcommand("grad", "Gradient estimates at points from a CSV");
  cgrad->add_option("--model", grad.model, "model file from fit")->required();
  cgrad->add_option("--points", grad.points, "CSV of evaluation points")->required();
  cgrad->add_option("--output", grad.output, "output CSV (stdout when omitted)");

  TbasArgs tbas_args;
  CLI::App* ctbas = app.add_subcommand("tbas", "Active-subspace matrix of the gradient field");
  ctbas->add_option("--model", tbas_args.model, "model file from fit")->required();
  ctbas->add_option("--measure", tbas_args.measure, "weighting measure")
      ->check(CLI::IsMember({"uniform", "empirical"}));
  ctbas->add_option("--input", tbas_args.input, "CSV whose rows form the empirical measure");
  ctbas->add_option("--output", tbas_args.output, "output JSON (stdout when omitted)");
  ctbas->add_option("--rotate", tbas_args.rotate_output, "also write --input with appended subspace columns");
  ctbas->add_option("--components", tbas_args.components, "appended column count (default ceil(sqrt(P)))")
      ->check(CLI::PositiveNumber);

  TbigArgs tbig_args;
  CLI::App* ctbig = app.add_subcommand("tbig", "Path attribution between a reference and a point");
  ctbig->add_option("--model", tbig_args.model, "model file from fit")->required();
  ctbig->add_option("--input", tbig_args.input, "CSV for row lookups and the default reference");
  ctbig->add_option("--x", tbig_args.x_text, "evaluation point as comma-separated values");
  ctbig->add_option("--x-row", tbig_args.x_row, "evaluation point as a row of --input");
  ctbig->add_option("--ref", tbig_args.ref_text, "reference point as comma-separated values");
  ctbig->add_option("--ref-row", tbig_args.ref_row, "reference point as a row of --input");
  ctbig->add_option("--samples", tbig_args.samples, "path sample count")->check(CLI::PositiveNumber);
  ctbig->add_option("--seed", tbig_args.seed, "random seed");
  ctbig->add_flag("--exact", tbig_args.exact, "closed-form path integral (single trees)");
  ctbig->add_option("--output", tbig_args.output, "output JSON (stdout when omitted)");

  RotateArgs rot;
  CLI::App* crot = app.add_subcommand("rotate", "Append active-subspace feature columns to a CSV");
  crot->add_option("--model", rot.model, "model file from fit")->required();
  crot->add_option("--input", rot.input, "CSV to augment")->required();
  crot->add_option("--output", rot.output, "augmented CSV to write")->required();
  crot->add_option("--measure", rot.measure, "weighting measure")
      ->check(CLI::IsMember({"uniform", "empirical"}));
  crot->add_option("--components", rot.components, "appended column count (default ceil(sqrt(P)))")
      ->check(CLI::PositiveNumber);

  ExperimentArgs exp;
  CLI::App* cexp = app.add_subcommand("experiment", "Run a benchmark protocol");
  cexp->add_option("--id", exp.id, "protocol name")
      ->check(CLI::IsMember({"subspace-lowdim", "subspace-sparse", "grad-convergence", "noise",
                             "correlation", "rotation-cv"}));
  cexp->add_option("--output", exp.output_dir, "directory for results.csv and run.json");
  cexp->add_option("--dims", exp.dims, "comma-separated dimensions");
  cexp->add_option("--ns", exp.ns, "comma-separated sample sizes");
  cexp->add_option("--depths", exp.depths, "comma-separated depths");
  cexp->add_option("--rhos", exp.rhos, "comma-separated correlations");
  cexp->add_option("--reps", exp.reps, "repetitions per grid cell");
  cexp->add_option("--folds", exp.folds, "cross-validation folds");
  cexp->add_option("--noise", exp.noise, "response noise standard deviation");
  cexp->add_option("--seed", exp.seed, "base seed; replicate r uses seed + r");
  cexp->add_option("--threads", exp.threads, "worker threads")->check(CLI::PositiveNumber);
  cexp->add_flag("--wall-timings", exp.wall_timings,
                 "record wall-clock seconds (makes reruns differ)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cfit->parsed()) return cmd_fit(fit);
    if (cgrad->parsed()) return cmd_grad(grad);
    if (ctbas->parsed()) return cmd_tbas(tbas_args);
    if (ctbig->parsed()) return cmd_tbig(tbig_args);
    if (crot->parsed()) return cmd_rotate(rot);
    if (cexp->parsed()) return cmd_experiment(exp);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
