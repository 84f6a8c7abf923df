#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "synthpop/error.hpp"
#include "synthpop/eval.hpp"
#include "synthpop/rng.hpp"

namespace synthpop::eval {

namespace {

void finish(ZeroReport& r) {
  r.recovered_fraction = r.n_sampling_zeros == 0
                             ? 0.0
                             : static_cast<double>(r.n_recovered) / static_cast<double>(r.n_sampling_zeros);
  if (r.n_recovered > 0)
    r.ratio = static_cast<double>(r.n_structural_proxy) / static_cast<double>(r.n_recovered);
  else
    r.ratio.reset();
}

void require_same_schema(const data::CodedTable& a, const data::CodedTable& b) {
  if (!(a.schema() == b.schema())) throw ComparabilityError("tables do not share a schema");
}

std::size_t count_difference(const std::vector<Combo>& a, const std::vector<Combo>& b) {
  std::size_t n = 0;
  for (auto c : a) n += !std::binary_search(b.begin(), b.end(), c);
  return n;
}

}  // namespace

ZeroReport zero_analysis(const ComboSet& train, const ComboSet& test, const ComboSet& generated) {
  if (train.variables != test.variables || train.variables != generated.variables)
    throw ComparabilityError("combo sets are over different variable subsets");
  ZeroReport r;
  r.n_sampling_zeros = count_difference(test.combos, train.combos);
  r.n_generated_distinct = generated.size();
  for (auto c : generated.combos) {
    if (train.contains(c))
      ++r.n_seen_in_train;
    else if (test.contains(c))
      ++r.n_recovered;
    else
      ++r.n_structural_proxy;
  }
  finish(r);
  return r;
}

ZeroReport zero_analysis(const data::CodedTable& train, const data::CodedTable& test,
                         const data::CodedTable& generated, std::span<const std::string> variables) {
  require_same_schema(train, test);
  require_same_schema(train, generated);
  return zero_analysis(combo_set(train, variables), combo_set(test, variables), combo_set(generated, variables));
}

std::vector<CurvePoint> ratio_curve(const data::CodedTable& train, const data::CodedTable& test,
                                    const data::CodedTable& generated, std::span<const std::string> variables,
                                    std::size_t step) {
  if (step < 1) throw ConfigError("curve step must be at least 1");
  require_same_schema(train, test);
  require_same_schema(train, generated);
  const ComboSet train_set = combo_set(train, variables);
  const ComboSet test_set = combo_set(test, variables);
  const ComboCodec codec(train.schema(), variables);
  const auto keys = codec.keys(generated);

  ZeroReport running;
  running.n_sampling_zeros = count_difference(test_set.combos, train_set.combos);
  std::unordered_set<Combo> seen;
  std::vector<CurvePoint> curve;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (seen.insert(keys[i]).second) {
      ++running.n_generated_distinct;
      if (train_set.contains(keys[i]))
        ++running.n_seen_in_train;
      else if (test_set.contains(keys[i]))
        ++running.n_recovered;
      else
        ++running.n_structural_proxy;
    }
    const std::size_t generated_so_far = i + 1;
    if (generated_so_far % step == 0 || generated_so_far == keys.size()) {
      finish(running);
      curve.push_back({generated_so_far, running});
    }
  }
  return curve;
}

std::uint64_t sweep_sample_seed(std::uint64_t seed, const std::string& model) {
  return Rng::stream(seed, "sweep/" + model).next_u64();
}

std::vector<SweepRow> dimension_sweep(const data::CodedTable& train, const data::CodedTable& test,
                                      std::span<const NamedSampler> models,
                                      std::span<const std::vector<std::string>> ladder, std::size_t n,
                                      std::uint64_t seed) {
  std::vector<data::CodedTable> samples;
  for (const auto& model : models) {
    samples.push_back(model.sample(n, sweep_sample_seed(seed, model.name)));
    require_same_schema(train, samples.back());
  }

  std::vector<SweepRow> rows(ladder.size() * models.size());
  const long cells = static_cast<long>(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (long idx = 0; idx < cells; ++idx) {
    const std::size_t s = static_cast<std::size_t>(idx) / models.size();
    const std::size_t m = static_cast<std::size_t>(idx) % models.size();
    SweepRow row;
    row.subset = ladder[s];
    row.n_cells = ComboCodec(train.schema(), ladder[s]).n_cells();
    row.model = models[m].name;
    row.report = zero_analysis(train, test, samples[m], ladder[s]);
    rows[static_cast<std::size_t>(idx)] = std::move(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.n_cells < b.n_cells; });
  return rows;
}

std::optional<double> additional_ratio_percent(std::optional<double> model, std::optional<double> base) {
  if (!model || !base || *base == 0.0) return std::nullopt;
  return (*model / *base - 1.0) * 100.0;
}

}  // namespace synthpop::eval
