#pragma once

// Reading and writing datasets in the LIBSVM text format
//   <label>[,<label>...] <index>:<value> <index>:<value> ...
// with 1-based, strictly ascending feature indices.

#include "subbfgs/linalg.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subbfgs {

enum class LabelKind { binary, multiclass, multilabel };

std::string to_string(LabelKind kind);

/// Malformed input; `line()` is 1-based, or 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Labels that do not fit the requested kind.
class LabelKindError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct DatasetStats {
  Index n = 0;
  Index d = 0;
  Index nnz = 0;
  double sparsity_percent = 0.0;
};

struct Dataset {
  SparseMatrix x;
  LabelKind kind = LabelKind::binary;
  Vector binary;                               // +-1 labels (binary)
  std::vector<Index> classes;                  // class ids (multiclass)
  std::vector<std::vector<Index>> label_sets;  // sorted id sets (multilabel)
  Index num_classes = 0;
  // Original label for each id: binary uses {-1, +1}, others the sorted
  // distinct labels found in the file.
  std::vector<double> label_values;
  std::string source;

  DatasetStats stats() const;
};

Dataset read_libsvm(std::istream& in, LabelKind kind,
                    std::optional<Index> dim_override = std::nullopt,
                    const std::string& source = "<stream>");

Dataset load_libsvm(const std::string& path, LabelKind kind,
                    std::optional<Index> dim_override = std::nullopt);

/// Writes labels with their original values and features with shortest
/// round-trip formatting, so reading the output back gives the same data.
void write_libsvm(std::ostream& out, const Dataset& data);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace subbfgs
