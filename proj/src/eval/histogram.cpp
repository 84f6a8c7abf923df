#include <algorithm>
#include <limits>
#include <numeric>

#include "synthpop/error.hpp"
#include "synthpop/eval.hpp"
#include "synthpop/kernels.hpp"

namespace synthpop::eval {

ComboCodec::ComboCodec(const data::Schema& schema, std::span<const std::string> variables)
    : names_(variables.begin(), variables.end()) {
  if (names_.empty()) throw SchemaError("variable subset is empty");
  columns_ = schema.indices_of(names_);
  std::vector<std::size_t> sorted = columns_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw SchemaError("variable subset repeats a variable");
  for (auto c : columns_) {
    const std::uint64_t card = schema[c].cardinality;
    if (n_cells_ > std::numeric_limits<std::uint64_t>::max() / card)
      throw SchemaError("variable subset has more cells than a 64-bit combo index can address");
    n_cells_ *= card;
    cardinalities_.push_back(schema[c].cardinality);
  }
}

Combo ComboCodec::encode_row(std::span<const std::uint32_t> row) const {
  Combo key = 0;
  for (std::size_t i = 0; i < columns_.size(); ++i) key = key * cardinalities_[i] + row[columns_[i]];
  return key;
}

Combo ComboCodec::encode_codes(std::span<const std::uint32_t> subset_codes) const {
  if (subset_codes.size() != columns_.size()) throw ShapeError("code tuple length does not match the subset");
  Combo key = 0;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (subset_codes[i] >= cardinalities_[i]) throw EncodingError("code out of range in combo");
    key = key * cardinalities_[i] + subset_codes[i];
  }
  return key;
}

std::vector<std::uint32_t> ComboCodec::decode(Combo combo) const {
  std::vector<std::uint32_t> codes(columns_.size());
  for (std::size_t i = columns_.size(); i-- > 0;) {
    codes[i] = static_cast<std::uint32_t>(combo % cardinalities_[i]);
    combo /= cardinalities_[i];
  }
  return codes;
}

std::string ComboCodec::label(Combo combo) const {
  std::string out;
  for (auto c : decode(combo)) {
    if (!out.empty()) out.push_back('-');
    out += std::to_string(c);
  }
  return out;
}

std::vector<Combo> ComboCodec::keys(const data::CodedTable& table) const {
  std::vector<Combo> out(table.rows());
  const long n = static_cast<long>(table.rows());
#pragma omp parallel for schedule(static) if (table.rows() * columns_.size() >= kernels::kParallelThreshold)
  for (long r = 0; r < n; ++r) out[static_cast<std::size_t>(r)] = encode_row(table.row(static_cast<std::size_t>(r)));
  return out;
}

double JointHistogram::frequency(Combo combo) const {
  auto it = std::lower_bound(frequencies.begin(), frequencies.end(), combo,
                             [](const auto& cell, Combo c) { return cell.first < c; });
  return it != frequencies.end() && it->first == combo ? it->second : 0.0;
}

double JointHistogram::total_frequency() const {
  double total = 0.0;
  for (const auto& [combo, f] : frequencies) total += f;
  return total;
}

JointHistogram empirical_joint(const data::CodedTable& table, std::span<const std::string> variables) {
  ComboCodec codec(table.schema(), variables);
  JointHistogram h;
  h.variables = codec.variables();
  h.cardinalities = codec.cardinalities();
  h.n_cells = codec.n_cells();
  h.total_rows = table.rows();
  const auto keys = codec.keys(table);
  h.counts = kernels::count_keys(keys);
  h.frequencies.reserve(h.counts.size());
  const double total = static_cast<double>(h.total_rows);
  for (const auto& [combo, count] : h.counts) h.frequencies.emplace_back(combo, static_cast<double>(count) / total);
  return h;
}

JointHistogram probability_histogram(std::vector<std::string> variables, std::vector<std::size_t> cardinalities,
                                     std::vector<std::pair<Combo, double>> probabilities) {
  JointHistogram h;
  h.variables = std::move(variables);
  h.cardinalities = std::move(cardinalities);
  h.n_cells = 1;
  for (auto c : h.cardinalities) h.n_cells *= c;
  std::sort(probabilities.begin(), probabilities.end());
  for (const auto& cell : probabilities) {
    if (cell.first >= h.n_cells) throw EncodingError("probability cell outside the subset universe");
    if (cell.second < 0.0) throw Error("negative probability in histogram");
    if (cell.second == 0.0) continue;
    if (!h.frequencies.empty() && h.frequencies.back().first == cell.first) {
      h.frequencies.back().second += cell.second;
    } else {
      h.frequencies.push_back(cell);
    }
  }
  return h;
}

ComboSet combo_set(const data::CodedTable& table, std::span<const std::string> variables) {
  ComboCodec codec(table.schema(), variables);
  ComboSet s;
  s.variables = codec.variables();
  s.combos = codec.keys(table);
  std::sort(s.combos.begin(), s.combos.end());
  s.combos.erase(std::unique(s.combos.begin(), s.combos.end()), s.combos.end());
  return s;
}

bool ComboSet::contains(Combo c) const { return std::binary_search(combos.begin(), combos.end(), c); }

}  // namespace synthpop::eval
