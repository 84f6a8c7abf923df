#pragma once

// Partial joint distributions, goodness-of-fit metrics and the
// sampling-zero / structural-zero accounting.
//
// A "combo" is a tuple of category codes over an ordered variable subset. It
// is stored as its mixed-radix index (first variable most significant), so
// subsets must have at most 2^64 - 1 cells.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthpop/data.hpp"

namespace synthpop::eval {

using Combo = std::uint64_t;

class ComboCodec {
 public:
  ComboCodec(const data::Schema& schema, std::span<const std::string> variables);

  const std::vector<std::string>& variables() const { return names_; }
  const std::vector<std::size_t>& cardinalities() const { return cardinalities_; }
  std::uint64_t n_cells() const { return n_cells_; }

  Combo encode_row(std::span<const std::uint32_t> row) const;
  Combo encode_codes(std::span<const std::uint32_t> subset_codes) const;
  std::vector<std::uint32_t> decode(Combo combo) const;
  /// Decimal codes joined by '-', e.g. "3-0-2".
  std::string label(Combo combo) const;

  /// Keys for every row of `table`, computed in parallel.
  std::vector<Combo> keys(const data::CodedTable& table) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> columns_;
  std::vector<std::size_t> cardinalities_;
  std::uint64_t n_cells_ = 1;
};

struct JointHistogram {
  std::vector<std::string> variables;
  std::vector<std::size_t> cardinalities;
  std::uint64_t n_cells = 0;
  // Rows counted; 0 for exact (probability) histograms.
  std::uint64_t total_rows = 0;
  // Nonzero cells sorted by combo: normalized frequency and raw count.
  std::vector<std::pair<Combo, double>> frequencies;
  std::vector<std::pair<Combo, std::uint64_t>> counts;

  double frequency(Combo combo) const;
  double total_frequency() const;
};

JointHistogram empirical_joint(const data::CodedTable& table, std::span<const std::string> variables);

/// Builds a probability histogram from (combo, probability) cells.
JointHistogram probability_histogram(std::vector<std::string> variables, std::vector<std::size_t> cardinalities,
                                     std::vector<std::pair<Combo, double>> probabilities);

/// sqrt(sum over cells of (generated - reference)^2 * N_c); absent cells count as 0.
double srmse(const JointHistogram& generated, const JointHistogram& reference);

/// Pearson r over the union of cells observed in either histogram.
/// Empty when either side has zero variance over those cells.
std::optional<double> pearson(const JointHistogram& generated, const JointHistogram& reference);

/// 1 - SS_res / SS_tot of generated against reference over the same cells.
/// Empty when the reference has zero variance.
std::optional<double> r2(const JointHistogram& generated, const JointHistogram& reference);

struct ScatterPoint {
  double reference = 0.0;
  double generated = 0.0;
};

/// One point per cell observed in either histogram.
std::vector<ScatterPoint> scatter_data(const JointHistogram& generated, const JointHistogram& reference);

struct ComboSet {
  std::vector<std::string> variables;
  std::vector<Combo> combos;  // sorted, distinct

  std::size_t size() const { return combos.size(); }
  bool contains(Combo c) const;
};

ComboSet combo_set(const data::CodedTable& table, std::span<const std::string> variables);

struct ZeroReport {
  std::size_t n_sampling_zeros = 0;     // |test \ train|
  std::size_t n_recovered = 0;          // |generated & (test \ train)|
  double recovered_fraction = 0.0;
  std::size_t n_structural_proxy = 0;   // |generated \ (train | test)|
  std::size_t n_seen_in_train = 0;      // |generated & train|
  std::size_t n_generated_distinct = 0;
  // Structural proxies per recovered sampling zero; empty when nothing was recovered.
  std::optional<double> ratio;

  bool operator==(const ZeroReport&) const = default;
};

ZeroReport zero_analysis(const ComboSet& train, const ComboSet& test, const ComboSet& generated);
ZeroReport zero_analysis(const data::CodedTable& train, const data::CodedTable& test,
                         const data::CodedTable& generated, std::span<const std::string> variables);

struct CurvePoint {
  std::size_t generated = 0;
  ZeroReport report;
};

/// Cumulative zero report after every `step` generated rows (and at the end).
std::vector<CurvePoint> ratio_curve(const data::CodedTable& train, const data::CodedTable& test,
                                    const data::CodedTable& generated, std::span<const std::string> variables,
                                    std::size_t step);

struct NamedSampler {
  std::string name;
  std::function<data::CodedTable(std::size_t n, std::uint64_t seed)> sample;
};

struct SweepRow {
  std::vector<std::string> subset;
  std::uint64_t n_cells = 0;
  std::string model;
  ZeroReport report;
};

/// Seed dimension_sweep hands to the sampler named `model`.
std::uint64_t sweep_sample_seed(std::uint64_t seed, const std::string& model);

/// Samples `n` rows once per model and runs zero_analysis on every subset of
/// the ladder. Rows are ordered by N_c ascending, then ladder order, then
/// model order.
std::vector<SweepRow> dimension_sweep(const data::CodedTable& train, const data::CodedTable& test,
                                      std::span<const NamedSampler> models,
                                      std::span<const std::vector<std::string>> ladder, std::size_t n,
                                      std::uint64_t seed);

/// Ratio increase of `model` over `base` in percent: (model / base - 1) * 100.
std::optional<double> additional_ratio_percent(std::optional<double> model, std::optional<double> base);

struct MetricsRow {
  std::string subset;  // variable names joined by '+'
  std::string model;
  std::uint64_t n_cells = 0;
  double srmse = 0.0;
  std::optional<double> pearson;
  std::optional<double> r2;
  ZeroReport zeros;
};

MetricsRow evaluate_subset(const data::CodedTable& train, const data::CodedTable& test,
                           const data::CodedTable& generated, std::span<const std::string> variables,
                           const std::string& model);

std::string subset_label(std::span<const std::string> variables);

/// Shortest round-trip decimal; empty string for an absent value.
std::string format_number(std::optional<double> v);

void write_metrics_csv(std::ostream& out, std::span<const MetricsRow> rows);
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace synthpop::eval
