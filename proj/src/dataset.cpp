#include "treegrad/dataset.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "treegrad/util.hpp"

namespace treegrad {

void Dataset::validate() const {
  if (rows < 1) throw std::runtime_error("dataset has no rows");
  if (cols < 1) throw std::runtime_error("dataset has no feature columns");
  if (x.size() != static_cast<std::size_t>(rows) * cols)
    throw std::runtime_error("dataset feature buffer has wrong size");
  if (y.size() != static_cast<std::size_t>(rows))
    throw std::runtime_error("dataset response has wrong length");
  if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(cols))
    throw std::runtime_error("dataset feature name count mismatch");
  for (double v : x)
    if (!std::isfinite(v)) throw std::runtime_error("dataset contains a non-finite feature value");
  for (double v : y)
    if (!std::isfinite(v)) throw std::runtime_error("dataset contains a non-finite response value");
}

std::vector<double> Normalizer::forward_point(std::span<const double> v) const {
  std::vector<double> out(v.size());
  for (std::size_t p = 0; p < v.size(); ++p) out[p] = forward(static_cast<int>(p), v[p]);
  return out;
}

Normalizer Normalizer::fit(const Dataset& d) {
  Normalizer n;
  n.lo.resize(d.cols);
  n.hi.resize(d.cols);
  n.constant.resize(d.cols);
  for (int p = 0; p < d.cols; ++p) {
    double lo = d.at(0, p), hi = lo;
    for (int r = 1; r < d.rows; ++r) {
      double v = d.at(r, p);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    n.lo[p] = lo;
    n.hi[p] = hi;
    n.constant[p] = (lo == hi);
  }
  return n;
}

namespace {

// One CSV record, honoring quotes; may consume several physical lines when a
// quoted field contains newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields, int& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int ch;
  while ((ch = in.get()) != EOF) {
    any = true;
    char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c == '\n') {
      ++line_no;
      fields.push_back(field);
      return true;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!any) return false;
  fields.push_back(field);
  ++line_no;
  return true;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::vector<std::string> header;
  int line_no = 0;
  if (!read_record(in, header, line_no)) throw std::runtime_error("'" + path + "' is empty");
  for (auto& h : header) h = trim(h);

  int target_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == target) target_col = static_cast<int>(i);
  if (target_col < 0)
    throw std::runtime_error("'" + path + "' has no column named '" + target + "'");
  if (header.size() < 2)
    throw std::runtime_error("'" + path + "' has no feature columns besides the target");

  Dataset d;
  d.cols = static_cast<int>(header.size()) - 1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (static_cast<int>(i) != target_col) d.feature_names.push_back(header[i]);

  std::vector<std::string> fields;
  while (read_record(in, fields, line_no)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // trailing blank line
    if (fields.size() != header.size())
      throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v;
      try {
        v = parse_double(fields[i]);
      } catch (const std::exception&) {
        throw std::runtime_error("'" + path + "' line " + std::to_string(line_no) + ", column '" +
                                 header[i] + "': not a number: '" + trim(fields[i]) + "'");
      }
      if (static_cast<int>(i) == target_col)
        d.y.push_back(v);
      else
        d.x.push_back(v);
    }
    ++d.rows;
  }
  if (d.rows == 0) throw std::runtime_error("'" + path + "' has a header but no data rows");
  d.validate();
  return d;
}

std::pair<Dataset, Normalizer> normalize_unit_cube(const Dataset& d) {
  d.validate();
  Normalizer n = Normalizer::fit(d);
  Dataset out = d;
  for (int r = 0; r < d.rows; ++r)
    for (int p = 0; p < d.cols; ++p)
      out.x[static_cast<std::size_t>(r) * d.cols + p] = n.forward(p, d.at(r, p));
  return {std::move(out), std::move(n)};
}

}  // namespace treegrad
