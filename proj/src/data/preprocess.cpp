#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

#include "synthpop/data.hpp"
#include "synthpop/error.hpp"
#include "synthpop/rng.hpp"

namespace synthpop::data {

RawTable drop_sparse_columns(const RawTable& table, double threshold, std::vector<std::string>* dropped) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("missing-value threshold must lie in (0, 1]");
  RawTable out;
  out.rows = table.rows;
  for (const auto& col : table.columns) {
    const double fraction =
        table.rows == 0 ? 0.0 : static_cast<double>(col.missing_count()) / static_cast<double>(table.rows);
    if (fraction > threshold) {
      if (dropped) dropped->push_back(col.name);
      continue;
    }
    out.columns.push_back(col);
  }
  if (out.columns.empty()) throw SchemaError("every column exceeded the missing-value threshold; schema is empty");
  return out;
}

std::uint32_t bin_code(std::span<const double> edges, double value) {
  return static_cast<std::uint32_t>(std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

CodedColumn quantile_bin(const std::string& name, std::span<const std::optional<double>> values, std::size_t k) {
  if (k < 1) throw ConfigError("bin count must be at least 1");
  std::vector<double> sorted;
  bool any_missing = false;
  for (const auto& v : values) {
    if (v) {
      sorted.push_back(*v);
    } else {
      any_missing = true;
    }
  }
  if (sorted.empty()) throw SchemaError("column '" + name + "' has no non-missing values to bin");
  std::sort(sorted.begin(), sorted.end());

  const std::size_t n = sorted.size();
  const double top = sorted.back();
  std::vector<double> edges;
  for (std::size_t i = 1; i < k; ++i) {
    const std::size_t rank = (i * n + k - 1) / k;  // nearest rank, 1-based
    const double edge = sorted[std::max<std::size_t>(rank, 1) - 1];
    if (edge >= top) break;
    if (edges.empty() || edge > edges.back()) edges.push_back(edge);
  }

  CodedColumn out;
  out.spec.name = name;
  out.spec.kind = VariableKind::numerical;
  out.spec.bin_edges = edges;
  out.spec.missing_category = any_missing;
  out.spec.cardinality = edges.size() + 1 + (any_missing ? 1 : 0);
  const auto missing_code = static_cast<std::uint32_t>(edges.size() + 1);
  out.codes.reserve(values.size());
  for (const auto& v : values) out.codes.push_back(v ? bin_code(edges, *v) : missing_code);
  return out;
}

namespace {

std::optional<long long> as_integer(const std::string& s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

CodedColumn code_categorical(const std::string& name, std::span<const std::optional<std::string>> labels) {
  std::vector<std::string> distinct;
  bool any_missing = false;
  for (const auto& l : labels) {
    if (l) {
      distinct.push_back(*l);
    } else {
      any_missing = true;
    }
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const bool all_integer =
      std::all_of(distinct.begin(), distinct.end(), [](const std::string& s) { return as_integer(s).has_value(); });
  if (all_integer)
    std::sort(distinct.begin(), distinct.end(),
              [](const std::string& a, const std::string& b) { return *as_integer(a) < *as_integer(b); });
  if (any_missing) distinct.emplace_back(kMissingLabel);
  if (distinct.empty()) throw SchemaError("column '" + name + "' has no values");

  std::map<std::string, std::uint32_t> index;
  for (std::size_t i = 0; i < distinct.size(); ++i) index[distinct[i]] = static_cast<std::uint32_t>(i);

  CodedColumn out;
  out.spec.name = name;
  out.spec.kind = VariableKind::categorical;
  out.spec.cardinality = distinct.size();
  out.spec.labels = distinct;
  out.codes.reserve(labels.size());
  for (const auto& l : labels) out.codes.push_back(index.at(l ? *l : std::string(kMissingLabel)));
  return out;
}

CodedTable code_table(const RawTable& table, std::size_t bins) {
  std::vector<VariableSpec> specs;
  std::vector<std::vector<std::uint32_t>> columns;
  for (const auto& col : table.columns) {
    CodedColumn coded = col.kind == VariableKind::numerical ? quantile_bin(col.name, col.numbers, bins)
                                                            : code_categorical(col.name, col.labels);
    specs.push_back(std::move(coded.spec));
    columns.push_back(std::move(coded.codes));
  }
  const std::size_t width = specs.size();
  std::vector<std::uint32_t> codes(table.rows * width);
  for (std::size_t c = 0; c < width; ++c)
    for (std::size_t r = 0; r < table.rows; ++r) codes[r * width + c] = columns[c][r];
  return CodedTable(Schema(std::move(specs)), std::move(codes));
}

std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<double, 3> fractions) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ConfigError("split fractions must be positive");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  if (n < 3) throw SchemaError("too few rows to split: need at least 3, have " + std::to_string(n));
  const auto validation = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[1]));
  const auto test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[2]));
  return {n - validation - test, validation, test};
}

Split split(const CodedTable& table, std::array<double, 3> fractions, std::uint64_t seed) {
  const auto sizes = split_sizes(table.rows(), fractions);
  std::vector<std::size_t> order(table.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::stream(seed, "split");
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);

  std::span<const std::size_t> all(order);
  Split out;
  out.train = table.select_rows(all.subspan(0, sizes[0]));
  out.validation = table.select_rows(all.subspan(sizes[0], sizes[1]));
  out.test = table.select_rows(all.subspan(sizes[0] + sizes[1], sizes[2]));
  return out;
}

}  // namespace synthpop::data
