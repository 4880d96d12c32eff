#include "subbfgs/libsvm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

namespace subbfgs {

std::string to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::binary: return "binary";
    case LabelKind::multiclass: return "multiclass";
    case LabelKind::multilabel: return "multilabel";
  }
  return "unknown";
}

ParseError::ParseError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

DatasetStats Dataset::stats() const {
  DatasetStats s;
  s.n = x.rows();
  s.d = x.cols();
  s.nnz = x.nonZeros();
  const double cells = static_cast<double>(s.n) * static_cast<double>(s.d);
  s.sparsity_percent = cells > 0 ? (1.0 - static_cast<double>(s.nnz) / cells) * 100.0 : 100.0;
  return s;
}

namespace {

bool parse_number(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_index(std::string_view text, Index& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos > start) tokens.push_back(line.substr(start, pos - start));
  }
  return tokens;
}

struct RawRow {
  std::vector<double> labels;
  std::size_t line;
};

}  // namespace

Dataset read_libsvm(std::istream& in, LabelKind kind, std::optional<Index> dim_override,
                    const std::string& source) {
  if (dim_override && *dim_override < 1) {
    throw ParseError("dimension override must be positive", 0);
  }
  std::vector<Eigen::Triplet<double, Index>> entries;
  std::vector<RawRow> rows;
  Index max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tokens = split_ws(view);
    if (tokens.empty()) continue;

    RawRow row{{}, line_no};
    std::string_view label_text = tokens[0];
    if (label_text.find(':') != std::string_view::npos) {
      throw ParseError("missing label before features", line_no);
    }
    const bool has_comma = label_text.find(',') != std::string_view::npos;
    if (has_comma && kind != LabelKind::multilabel) {
      throw LabelKindError("comma-separated labels require multilabel kind", line_no);
    }
    while (true) {
      const auto comma = label_text.find(',');
      double v;
      if (!parse_number(label_text.substr(0, comma), v)) {
        throw ParseError("malformed label '" + std::string(tokens[0]) + "'", line_no);
      }
      row.labels.push_back(v);
      if (comma == std::string_view::npos) break;
      label_text.remove_prefix(comma + 1);
    }

    const Index r = static_cast<Index>(rows.size());
    Index prev = 0;
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const auto tok = tokens[k];
      const auto colon = tok.find(':');
      Index idx;
      double v;
      if (colon == std::string_view::npos || !parse_index(tok.substr(0, colon), idx) ||
          !parse_number(tok.substr(colon + 1), v)) {
        throw ParseError("malformed feature '" + std::string(tok) + "'", line_no);
      }
      if (idx < 1) throw ParseError("feature indices are 1-based", line_no);
      if (idx <= prev) throw ParseError("feature indices must be strictly ascending", line_no);
      if (dim_override && idx > *dim_override) {
        throw ParseError("feature index " + std::to_string(idx) + " exceeds dimension " +
                             std::to_string(*dim_override),
                         line_no);
      }
      prev = idx;
      max_index = std::max(max_index, idx);
      entries.emplace_back(r, idx - 1, v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no examples in " + source, 0);

  Dataset data;
  data.kind = kind;
  data.source = source;
  const Index n = static_cast<Index>(rows.size());
  const Index d = dim_override ? *dim_override : max_index;
  data.x.resize(n, d);
  data.x.setFromTriplets(entries.begin(), entries.end());
  data.x.makeCompressed();

  if (kind == LabelKind::binary) {
    bool zero_one = true;
    bool plus_minus = true;
    for (const auto& row : rows) {
      const double v = row.labels[0];
      zero_one &= v == 0.0 || v == 1.0;
      plus_minus &= v == -1.0 || v == 1.0;
    }
    if (!zero_one && !plus_minus) {
      for (const auto& row : rows) {
        const double v = row.labels[0];
        if (v != 0.0 && v != 1.0 && v != -1.0) {
          throw LabelKindError("label " + format_double(v) + " is not binary", row.line);
        }
      }
      throw LabelKindError("binary labels mix 0 and -1", 0);
    }
    data.binary.resize(n);
    for (Index i = 0; i < n; ++i) data.binary[i] = rows[i].labels[0] == 1.0 ? 1.0 : -1.0;
    data.num_classes = 2;
    data.label_values = {-1.0, 1.0};
    return data;
  }

  std::map<double, Index> ids;
  for (const auto& row : rows) {
    for (double v : row.labels) ids.emplace(v, 0);
  }
  Index next = 0;
  for (auto& [value, id] : ids) {
    id = next++;
    data.label_values.push_back(value);
  }
  data.num_classes = next;
  if (kind == LabelKind::multiclass) {
    data.classes.reserve(rows.size());
    for (const auto& row : rows) data.classes.push_back(ids.at(row.labels[0]));
  } else {
    data.label_sets.reserve(rows.size());
    for (const auto& row : rows) {
      std::vector<Index> set;
      for (double v : row.labels) set.push_back(ids.at(v));
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      data.label_sets.push_back(std::move(set));
    }
  }
  return data;
}

Dataset load_libsvm(const std::string& path, LabelKind kind, std::optional<Index> dim_override) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path, 0);
  return read_libsvm(in, kind, dim_override, path);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_libsvm(std::ostream& out, const Dataset& data) {
  for (Index i = 0; i < data.x.rows(); ++i) {
    switch (data.kind) {
      case LabelKind::binary:
        out << (data.binary[i] > 0 ? "+1" : "-1");
        break;
      case LabelKind::multiclass:
        out << format_double(data.label_values[static_cast<std::size_t>(data.classes[i])]);
        break;
      case LabelKind::multilabel: {
        const auto& set = data.label_sets[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < set.size(); ++k) {
          if (k) out << ',';
          out << format_double(data.label_values[static_cast<std::size_t>(set[k])]);
        }
        break;
      }
    }
    for (SparseMatrix::InnerIterator it(data.x, i); it; ++it) {
      out << ' ' << (it.col() + 1) << ':' << format_double(it.value());
    }
    out << '\n';
  }
}

}  // namespace subbfgs
