#pragma once

// Raw-table ingestion, preprocessing (sparse-column dropping, quantile
// binning), train/validation/test splitting and one-hot block encoding.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "synthpop/matrix.hpp"

namespace synthpop::data {

enum class VariableKind { categorical, numerical };

/// Label given to the explicit category that replaces missing values.
inline constexpr const char* kMissingLabel = "<missing>";

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::categorical;
  std::size_t cardinality = 0;
  // Numerical only: right-closed bin boundaries, strictly ascending.
  std::vector<double> bin_edges;
  // Categorical only: one label per code.
  std::vector<std::string> labels;
  // Numerical only: the last code stands for "value missing".
  bool missing_category = false;

  void validate() const;
  bool operator==(const VariableSpec&) const = default;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<VariableSpec> variables);

  const std::vector<VariableSpec>& variables() const { return variables_; }
  std::size_t size() const { return variables_.size(); }
  const VariableSpec& operator[](std::size_t i) const { return variables_[i]; }

  /// Position of `name`; throws SchemaError if absent.
  std::size_t index_of(const std::string& name) const;
  std::vector<std::size_t> indices_of(std::span<const std::string> names) const;
  std::vector<std::string> names() const;

  std::vector<std::size_t> cardinalities() const;
  std::size_t one_hot_width() const;
  /// Start column of each variable's one-hot block.
  std::vector<std::size_t> block_offsets() const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Schema load(const std::filesystem::path& path);

  /// Stable 64-bit digest of the canonical JSON, as 16 hex digits.
  std::string hash() const;

  bool operator==(const Schema&) const = default;

 private:
  std::vector<VariableSpec> variables_;
};

/// Agents as rows of category codes, stored row-major.
class CodedTable {
 public:
  CodedTable() = default;
  explicit CodedTable(Schema schema);
  CodedTable(Schema schema, std::vector<std::uint32_t> codes);

  const Schema& schema() const { return schema_; }
  std::size_t rows() const;
  std::size_t cols() const { return schema_.size(); }

  std::span<const std::uint32_t> row(std::size_t r) const;
  std::uint32_t operator()(std::size_t r, std::size_t c) const { return codes_[r * cols() + c]; }
  const std::vector<std::uint32_t>& codes() const { return codes_; }

  /// Appends one agent; throws EncodingError for out-of-range codes.
  void push_row(std::span<const std::uint32_t> codes);
  void reserve(std::size_t rows) { codes_.reserve(rows * cols()); }

  CodedTable select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const CodedTable&) const = default;

 private:
  Schema schema_;
  std::vector<std::uint32_t> codes_;
};

struct RawColumn {
  std::string name;
  VariableKind kind = VariableKind::categorical;
  std::vector<std::optional<double>> numbers;       // numerical columns
  std::vector<std::optional<std::string>> labels;   // categorical columns

  std::size_t size() const;
  std::size_t missing_count() const;
};

struct RawTable {
  std::vector<RawColumn> columns;
  std::size_t rows = 0;
};

/// Parses comma-separated text with a header row. Columns named in
/// `numerical` are parsed as numbers; all others are kept as labels. Empty
/// fields are recorded as missing.
RawTable read_csv(std::istream& in, const std::set<std::string>& numerical,
                  const std::string& source = "<stream>");
RawTable load_csv(const std::filesystem::path& path, const std::set<std::string>& numerical);

/// Removes every column whose missing fraction strictly exceeds `threshold`.
RawTable drop_sparse_columns(const RawTable& table, double threshold = 0.2,
                             std::vector<std::string>* dropped = nullptr);

struct CodedColumn {
  VariableSpec spec;
  std::vector<std::uint32_t> codes;
};

/// Quantile binning into at most k right-closed bins. Edges are the
/// nearest-rank i/k quantiles of the non-missing values; edges that repeat
/// or reach the maximum are merged away. Missing values get an extra code.
CodedColumn quantile_bin(const std::string& name, std::span<const std::optional<double>> values,
                         std::size_t k = 5);

/// Code of `value` for a bin-edge vector: index of the first edge >= value.
std::uint32_t bin_code(std::span<const double> edges, double value);

/// Codes labels in sorted order (numerically when every label is an integer).
CodedColumn code_categorical(const std::string& name, std::span<const std::optional<std::string>> labels);

/// Bins numerical columns and codes categorical ones.
CodedTable code_table(const RawTable& table, std::size_t bins = 5);

struct Split {
  CodedTable train;
  CodedTable validation;
  CodedTable test;
};

/// Seeded shuffle then contiguous partition; validation and test take
/// floor(N * f) rows, train takes the remainder.
Split split(const CodedTable& table, std::array<double, 3> fractions, std::uint64_t seed);
std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<double, 3> fractions);

struct EncodedMatrix {
  Schema schema;
  Matrix matrix;
};

EncodedMatrix one_hot_encode(const CodedTable& table);
/// Per-block argmax.
std::vector<std::uint32_t> decode_row(std::span<const double> row, const Schema& schema);
CodedTable decode(const EncodedMatrix& encoded);

void write_coded_csv(std::ostream& out, const CodedTable& table);
void save_coded_csv(const std::filesystem::path& path, const CodedTable& table);
/// Reads integer codes whose header must list the schema's variables in order.
CodedTable read_coded_csv(std::istream& in, const Schema& schema, const std::string& source = "<stream>");
CodedTable load_coded_csv(const std::filesystem::path& path, const Schema& schema);

}  // namespace synthpop::data
