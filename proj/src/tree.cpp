#include "treegrad/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "treegrad/util.hpp"

namespace treegrad {

int loglog_depth(int n, int dim, double scale) {
  double inner = std::log2(std::max(2.0, static_cast<double>(n)));
  double outer = std::log2(inner);
  int k = static_cast<int>(std::ceil(scale * dim * outer));
  return std::max(1, k);
}

// ===========================================================================
// Validation
// ===========================================================================

namespace {

void validate_tree(int dim, const std::vector<TreeNode>& nodes) {
  if (dim < 1) throw std::invalid_argument("tree: dim must be positive");
  if (nodes.empty()) throw std::invalid_argument("tree: no nodes");
  if (nodes[0].parent != -1 || nodes[0].depth != 0)
    throw std::invalid_argument("tree: node 0 must be the root");

  std::vector<int> referenced(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& nd = nodes[i];
    if (nd.lower.size() != static_cast<std::size_t>(dim) ||
        nd.upper.size() != static_cast<std::size_t>(dim))
      throw std::invalid_argument("tree: node bounds have wrong dimension");
    for (int p = 0; p < dim; ++p)
      if (!(nd.lower[p] < nd.upper[p]))
        throw std::invalid_argument("tree: node cell has empty extent");
    if (!std::isfinite(nd.value)) throw std::invalid_argument("tree: non-finite node value");
    if (nd.count < 0) throw std::invalid_argument("tree: negative sample count");
    if (nd.is_leaf()) continue;

    const TreeSplit& sp = *nd.split;
    if (sp.variable < 0 || sp.variable >= dim)
      throw std::invalid_argument("tree: split variable out of range");
    if (!(nd.lower[sp.variable] < sp.threshold && sp.threshold < nd.upper[sp.variable]))
      throw std::invalid_argument("tree: split threshold outside the open cell");
    for (int child : {sp.left, sp.right}) {
      if (child <= static_cast<int>(i) || child >= static_cast<int>(nodes.size()))
        throw std::invalid_argument("tree: child index must come after its parent");
      ++referenced[child];
      const TreeNode& c = nodes[child];
      if (c.parent != static_cast<int>(i))
        throw std::invalid_argument("tree: child parent link is wrong");
      if (c.depth != nd.depth + 1)
        throw std::invalid_argument("tree: child depth is not parent depth + 1");
    }
    if (sp.left == sp.right) throw std::invalid_argument("tree: split children coincide");
    const TreeNode& l = nodes[sp.left];
    const TreeNode& r = nodes[sp.right];
    for (int p = 0; p < dim; ++p) {
      double wl_lo = nd.lower[p], wl_hi = (p == sp.variable) ? sp.threshold : nd.upper[p];
      double wr_lo = (p == sp.variable) ? sp.threshold : nd.lower[p], wr_hi = nd.upper[p];
      if (l.lower[p] != wl_lo || l.upper[p] != wl_hi || r.lower[p] != wr_lo || r.upper[p] != wr_hi)
        throw std::invalid_argument("tree: child cells do not partition the parent cell");
    }
    if (!(l.count == 0 && r.count == 0) && nd.count != l.count + r.count)
      throw std::invalid_argument("tree: child sample counts do not sum to the parent's");
  }
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (referenced[i] != 1)
      throw std::invalid_argument("tree: node " + std::to_string(i) + " is not referenced exactly once");
}

}  // namespace

RegressionTree::RegressionTree(int dim, std::vector<TreeNode> nodes, FitConfig meta)
    : dim_(dim), nodes_(std::move(nodes)), meta_(meta) {
  validate_tree(dim_, nodes_);
}

// ===========================================================================
// Fitting
// ===========================================================================

namespace {

double subset_mean(const Dataset& d, const std::vector<int>& rows) {
  double s = 0.0;
  for (int r : rows) s += d.y[r];
  return s / static_cast<double>(rows.size());
}

double subset_sse(const Dataset& d, const std::vector<int>& rows, double mean) {
  double s = 0.0;
  for (int r : rows) {
    double dv = d.y[r] - mean;
    s += dv * dv;
  }
  return s;
}

struct SplitChoice {
  int variable = -1;
  double threshold = 0.0;
  double gain = -std::numeric_limits<double>::infinity();
};

// Best variance-reduction split over the given candidate variables.  Ties
// break toward the earliest candidate and then the lowest threshold, which
// the ascending scan delivers by keeping only strict improvements.
SplitChoice cart_best_split(const Dataset& d, const std::vector<int>& rows,
                            const TreeNode& cell, const std::vector<int>& variables,
                            int min_leaf) {
  const int n = static_cast<int>(rows.size());
  SplitChoice best;
  std::vector<int> order(rows);
  std::vector<double> prefix_y(n + 1), prefix_yy(n + 1);
  for (int var : variables) {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      double va = d.at(a, var), vb = d.at(b, var);
      if (va != vb) return va < vb;
      return a < b;  // fixed order among ties keeps sums reproducible
    });
    prefix_y[0] = prefix_yy[0] = 0.0;
    for (int i = 0; i < n; ++i) {
      double yv = d.y[order[i]];
      prefix_y[i + 1] = prefix_y[i] + yv;
      prefix_yy[i + 1] = prefix_yy[i] + yv * yv;
    }
    double total = prefix_y[n];
    double base = total * total / n;
    for (int i = 0; i + 1 < n; ++i) {
      double v0 = d.at(order[i], var), v1 = d.at(order[i + 1], var);
      if (v0 == v1) continue;
      int nl = i + 1, nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      double thr = v0 + (v1 - v0) / 2.0;
      if (thr >= v1) thr = v0;  // adjacent doubles; v0 still separates
      if (thr <= cell.lower[var] || thr >= cell.upper[var]) continue;
      double sl = prefix_y[nl];
      double gain = sl * sl / nl + (total - sl) * (total - sl) / nr - base;
      if (gain > best.gain) best = {var, thr, gain};
    }
  }
  return best;
}

std::vector<int> pick_variables(int dim, double feature_fraction, RngStream& rng) {
  std::vector<int> vars(dim);
  for (int i = 0; i < dim; ++i) vars[i] = i;
  if (feature_fraction >= 1.0) return vars;
  int k = static_cast<int>(std::ceil(feature_fraction * dim));
  k = std::max(1, std::min(k, dim));
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(dim - i)));
    std::swap(vars[i], vars[j]);
  }
  vars.resize(k);
  std::sort(vars.begin(), vars.end());
  return vars;
}

}  // namespace

RegressionTree RegressionTree::fit_rows(const Dataset& data, const FitConfig& cfg,
                                        std::vector<int> rows, double feature_fraction,
                                        RngStream& rng) {
  data.validate();
  if (cfg.min_leaf < 1) throw std::invalid_argument("fit: min_leaf must be at least 1");
  if (cfg.max_depth < 0) throw std::invalid_argument("fit: max_depth must be nonnegative");
  if (cfg.schedule_scale <= 0.0) throw std::invalid_argument("fit: schedule scale must be positive");
  if (rows.empty()) throw std::invalid_argument("fit: no rows");
  for (double v : data.x)
    if (v < 0.0 || v > 1.0)
      throw std::invalid_argument("fit: features must lie in the unit cube; normalize first");

  const int dim = data.cols;
  int max_depth = cfg.max_depth;
  if (cfg.mode == FitMode::CyclicMedian && cfg.schedule == DepthSchedule::LogLog)
    max_depth = loglog_depth(static_cast<int>(rows.size()), dim, cfg.schedule_scale);

  std::vector<TreeNode> nodes;
  TreeNode root;
  root.lower.assign(dim, 0.0);
  root.upper.assign(dim, 1.0);
  root.count = static_cast<int>(rows.size());
  root.value = subset_mean(data, rows);
  nodes.push_back(std::move(root));

  struct Task {
    int index;
    std::vector<int> rows;
  };
  std::deque<Task> queue;
  queue.push_back({0, std::move(rows)});

  while (!queue.empty()) {
    Task task = std::move(queue.front());
    queue.pop_front();
    const int idx = task.index;
    const int n = static_cast<int>(task.rows.size());
    const int depth = nodes[idx].depth;

    if (depth >= max_depth || n < 2 * cfg.min_leaf) continue;
    if (subset_sse(data, task.rows, nodes[idx].value) == 0.0) continue;

    int var = -1;
    double thr = 0.0;
    if (cfg.mode == FitMode::Cart) {
      std::vector<int> vars = pick_variables(dim, feature_fraction, rng);
      SplitChoice choice = cart_best_split(data, task.rows, nodes[idx], vars, cfg.min_leaf);
      if (choice.variable < 0 || choice.gain <= 0.0) continue;
      var = choice.variable;
      thr = choice.threshold;
    } else {
      var = depth % dim;
      std::vector<double> vals(n);
      for (int i = 0; i < n; ++i) vals[i] = data.at(task.rows[i], var);
      std::sort(vals.begin(), vals.end());
      if (n % 2 == 1)
        thr = vals[n / 2];
      else
        thr = vals[n / 2 - 1] + (vals[n / 2] - vals[n / 2 - 1]) / 2.0;
      // A median on the cell boundary cannot split the cell; the node stays a
      // leaf even though it is above the depth limit.
      if (thr <= nodes[idx].lower[var] || thr >= nodes[idx].upper[var]) continue;
    }

    std::vector<int> left_rows, right_rows;
    for (int r : task.rows)
      (data.at(r, var) <= thr ? left_rows : right_rows).push_back(r);
    if (static_cast<int>(left_rows.size()) < cfg.min_leaf ||
        static_cast<int>(right_rows.size()) < cfg.min_leaf)
      continue;

    TreeNode left, right;
    left.parent = right.parent = idx;
    left.depth = right.depth = depth + 1;
    left.lower = nodes[idx].lower;
    left.upper = nodes[idx].upper;
    left.upper[var] = thr;
    right.lower = nodes[idx].lower;
    right.upper = nodes[idx].upper;
    right.lower[var] = thr;
    left.count = static_cast<int>(left_rows.size());
    right.count = static_cast<int>(right_rows.size());
    left.value = subset_mean(data, left_rows);
    right.value = subset_mean(data, right_rows);

    int li = static_cast<int>(nodes.size());
    nodes.push_back(std::move(left));
    int ri = static_cast<int>(nodes.size());
    nodes.push_back(std::move(right));
    nodes[idx].split = TreeSplit{var, thr, li, ri};
    queue.push_back({li, std::move(left_rows)});
    queue.push_back({ri, std::move(right_rows)});
  }

  FitConfig meta = cfg;
  return RegressionTree(dim, std::move(nodes), meta);
}

RegressionTree RegressionTree::fit(const Dataset& data, const FitConfig& cfg) {
  std::vector<int> rows(data.rows);
  for (int i = 0; i < data.rows; ++i) rows[i] = i;
  RngStream rng(cfg.seed);
  return fit_rows(data, cfg, std::move(rows), 1.0, rng);
}

// ===========================================================================
// Navigation
// ===========================================================================

int RegressionTree::depth() const {
  int d = 0;
  for (const TreeNode& nd : nodes_) d = std::max(d, nd.depth);
  return d;
}

int RegressionTree::leaf_count() const {
  int c = 0;
  for (const TreeNode& nd : nodes_) c += nd.is_leaf() ? 1 : 0;
  return c;
}

std::vector<int> RegressionTree::leaf_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].is_leaf()) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> RegressionTree::nodes_at_depth(int k) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].depth == k) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<double> RegressionTree::clamp_to_root(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dim_))
    throw std::invalid_argument("tree: query point has wrong dimension");
  const TreeNode& root = nodes_[0];
  std::vector<double> out(x.begin(), x.end());
  for (int p = 0; p < dim_; ++p) {
    if (out[p] < root.lower[p]) out[p] = root.lower[p];
    if (out[p] > root.upper[p]) out[p] = root.upper[p];
  }
  return out;
}

RegressionTree::Located RegressionTree::locate(std::span<const double> x, int target_depth) const {
  if (target_depth < 0) throw std::invalid_argument("tree: negative target depth");
  std::vector<double> q = clamp_to_root(x);
  int cur = 0;
  while (nodes_[cur].depth < target_depth && !nodes_[cur].is_leaf()) {
    const TreeSplit& sp = *nodes_[cur].split;
    cur = (q[sp.variable] <= sp.threshold) ? sp.left : sp.right;
  }
  return {cur, nodes_[cur].depth == target_depth};
}

int RegressionTree::locate_leaf(std::span<const double> x) const {
  std::vector<double> q = clamp_to_root(x);
  int cur = 0;
  while (!nodes_[cur].is_leaf()) {
    const TreeSplit& sp = *nodes_[cur].split;
    cur = (q[sp.variable] <= sp.threshold) ? sp.left : sp.right;
  }
  return cur;
}

double RegressionTree::predict(std::span<const double> x) const {
  return nodes_[locate_leaf(x)].value;
}

RegressionTree RegressionTree::with_values(const std::vector<double>& values) const {
  if (values.size() != nodes_.size())
    throw std::invalid_argument("with_values: need one value per node");
  std::vector<TreeNode> nodes = nodes_;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    nodes[i].value = values[i];
    nodes[i].count = 0;  // replaced values no longer describe sample means
  }
  return RegressionTree(dim_, std::move(nodes), meta_);
}

// ===========================================================================
// Serialization
// ===========================================================================

namespace {

const char* mode_name(FitMode m) { return m == FitMode::Cart ? "cart" : "cyclic"; }
const char* schedule_name(DepthSchedule s) { return s == DepthSchedule::Fixed ? "fixed" : "loglog"; }

FitMode parse_mode(const std::string& s) {
  if (s == "cart") return FitMode::Cart;
  if (s == "cyclic") return FitMode::CyclicMedian;
  throw std::runtime_error("tree file: unknown mode '" + s + "'");
}

DepthSchedule parse_schedule(const std::string& s) {
  if (s == "fixed") return DepthSchedule::Fixed;
  if (s == "loglog") return DepthSchedule::LogLog;
  throw std::runtime_error("tree file: unknown schedule '" + s + "'");
}

std::vector<std::string> expect_line(std::istream& in, const std::string& keyword) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("tree file: unexpected end of input");
  std::vector<std::string> tok = split(trim(line), ' ');
  if (tok.empty() || tok[0] != keyword)
    throw std::runtime_error("tree file: expected '" + keyword + "', got '" + line + "'");
  return tok;
}

}  // namespace

void RegressionTree::save(std::ostream& out) const {
  out << "tree v1\n";
  out << "dim " << dim_ << "\n";
  out << "mode " << mode_name(meta_.mode) << "\n";
  out << "max_depth " << meta_.max_depth << "\n";
  out << "min_leaf " << meta_.min_leaf << "\n";
  out << "schedule " << schedule_name(meta_.schedule) << "\n";
  out << "schedule_scale " << format_double(meta_.schedule_scale) << "\n";
  out << "seed " << meta_.seed << "\n";
  out << "nodes " << nodes_.size() << "\n";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& nd = nodes_[i];
    out << "node " << i << " parent " << nd.parent << " depth " << nd.depth << " count "
        << nd.count << " value " << format_double(nd.value) << " lower";
    for (double v : nd.lower) out << ' ' << format_double(v);
    out << " upper";
    for (double v : nd.upper) out << ' ' << format_double(v);
    if (nd.is_leaf()) {
      out << " leaf\n";
    } else {
      out << " split " << nd.split->variable << ' ' << format_double(nd.split->threshold) << ' '
          << nd.split->left << ' ' << nd.split->right << "\n";
    }
  }
  out << "end tree\n";
}

RegressionTree RegressionTree::load(std::istream& in) {
  std::vector<std::string> tok = expect_line(in, "tree");
  if (tok.size() != 2 || tok[1] != "v1")
    throw std::runtime_error("tree file: unsupported version");

  auto one_value = [&](const char* key) {
    std::vector<std::string> t = expect_line(in, key);
    if (t.size() != 2) throw std::runtime_error(std::string("tree file: malformed '") + key + "' line");
    return t[1];
  };

  int dim = static_cast<int>(parse_int(one_value("dim")));
  FitConfig meta;
  meta.mode = parse_mode(one_value("mode"));
  meta.max_depth = static_cast<int>(parse_int(one_value("max_depth")));
  meta.min_leaf = static_cast<int>(parse_int(one_value("min_leaf")));
  meta.schedule = parse_schedule(one_value("schedule"));
  meta.schedule_scale = parse_double(one_value("schedule_scale"));
  meta.seed = static_cast<std::uint64_t>(parse_int(one_value("seed")));
  int count = static_cast<int>(parse_int(one_value("nodes")));
  if (dim < 1 || count < 1) throw std::runtime_error("tree file: bad dim or node count");

  std::vector<TreeNode> nodes;
  nodes.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::vector<std::string> t = expect_line(in, "node");
    // node <i> parent <p> depth <d> count <c> value <v> lower <dim> upper <dim> (leaf | split <var> <thr> <l> <r>)
    std::size_t base = 12 + 2 * static_cast<std::size_t>(dim);  // tokens before the tail keyword
    if (t.size() != base + 1 && t.size() != base + 5)
      throw std::runtime_error("tree file: malformed node line for node " + std::to_string(i));
    if (parse_int(t[1]) != i || t[2] != "parent" || t[4] != "depth" || t[6] != "count" ||
        t[8] != "value" || t[10] != "lower")
      throw std::runtime_error("tree file: malformed node line for node " + std::to_string(i));
    TreeNode nd;
    nd.parent = static_cast<int>(parse_int(t[3]));
    nd.depth = static_cast<int>(parse_int(t[5]));
    nd.count = static_cast<int>(parse_int(t[7]));
    nd.value = parse_double(t[9]);
    std::size_t pos = 11;
    for (int p = 0; p < dim; ++p) nd.lower.push_back(parse_double(t[pos++]));
    if (t[pos++] != "upper") throw std::runtime_error("tree file: missing 'upper'");
    for (int p = 0; p < dim; ++p) nd.upper.push_back(parse_double(t[pos++]));
    if (t[pos] == "leaf") {
      if (pos + 1 != t.size()) throw std::runtime_error("tree file: trailing tokens on leaf line");
    } else if (t[pos] == "split") {
      if (pos + 5 != t.size()) throw std::runtime_error("tree file: malformed split record");
      TreeSplit sp;
      sp.variable = static_cast<int>(parse_int(t[pos + 1]));
      sp.threshold = parse_double(t[pos + 2]);
      sp.left = static_cast<int>(parse_int(t[pos + 3]));
      sp.right = static_cast<int>(parse_int(t[pos + 4]));
      nd.split = sp;
    } else {
      throw std::runtime_error("tree file: node line must end in 'leaf' or 'split ...'");
    }
    nodes.push_back(std::move(nd));
  }
  expect_line(in, "end");
  return RegressionTree(dim, std::move(nodes), meta);
}

void RegressionTree::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  save(out);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

RegressionTree RegressionTree::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return load(in);
}

// ===========================================================================
// Manual construction
// ===========================================================================

TreeBuilder::TreeBuilder(int dim)
    : TreeBuilder(dim, std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)) {}

TreeBuilder::TreeBuilder(int dim, std::vector<double> lower, std::vector<double> upper) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("builder: dim must be positive");
  if (lower.size() != static_cast<std::size_t>(dim) || upper.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument("builder: root bounds have wrong dimension");
  TreeNode root;
  root.lower = std::move(lower);
  root.upper = std::move(upper);
  nodes_.push_back(std::move(root));
}

void TreeBuilder::set_root(double value, int count) {
  nodes_[0].value = value;
  nodes_[0].count = count;
}

std::pair<int, int> TreeBuilder::split(int node, int variable, double threshold,
                                       double left_value, double right_value,
                                       int left_count, int right_count) {
  if (node < 0 || node >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("builder: no such node");
  if (!nodes_[node].is_leaf()) throw std::invalid_argument("builder: node already split");
  if (variable < 0 || variable >= dim_) throw std::invalid_argument("builder: variable out of range");
  if (!(nodes_[node].lower[variable] < threshold && threshold < nodes_[node].upper[variable]))
    throw std::invalid_argument("builder: threshold outside the open cell");

  TreeNode left, right;
  left.parent = right.parent = node;
  left.depth = right.depth = nodes_[node].depth + 1;
  left.lower = nodes_[node].lower;
  left.upper = nodes_[node].upper;
  left.upper[variable] = threshold;
  right.lower = nodes_[node].lower;
  right.upper = nodes_[node].upper;
  right.lower[variable] = threshold;
  left.value = left_value;
  right.value = right_value;
  left.count = left_count;
  right.count = right_count;

  int li = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(left));
  int ri = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(right));
  nodes_[node].split = TreeSplit{variable, threshold, li, ri};
  return {li, ri};
}

RegressionTree TreeBuilder::build(FitConfig meta) const {
  return RegressionTree(dim_, nodes_, meta);
}

}  // namespace treegrad
