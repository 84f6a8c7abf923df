#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support/oracles.hpp"
#include "synthpop/error.hpp"
#include "synthpop/eval.hpp"

using namespace synthpop;
using namespace synthpop::eval;
using data::CodedTable;
using data::Schema;

namespace {

Schema schema_of(std::vector<std::size_t> cards) {
  std::vector<data::VariableSpec> vars;
  for (std::size_t i = 0; i < cards.size(); ++i) {
    data::VariableSpec v;
    v.name = std::string(1, static_cast<char>('a' + i));
    v.cardinality = cards[i];
    for (std::size_t c = 0; c < cards[i]; ++c) v.labels.push_back(std::to_string(c));
    vars.push_back(v);
  }
  return Schema(vars);
}

JointHistogram hist(std::vector<double> probs) {
  std::vector<std::pair<Combo, double>> cells;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (probs[i] > 0) cells.emplace_back(i, probs[i]);
  return probability_histogram({"a"}, {probs.size()}, cells);
}

}  // namespace

TEST_CASE("empirical_joint hand cases") {
  auto s = schema_of({2});
  const std::vector<std::string> a{"a"};
  auto h = empirical_joint(CodedTable(s, {0, 0, 1, 1}), a);
  CHECK(h.n_cells == 2);
  CHECK(h.frequency(0) == 0.5);
  CHECK(h.frequency(1) == 0.5);
  auto one = empirical_joint(CodedTable(s, {1}), a);
  CHECK(one.frequencies.size() == 1);
  CHECK(one.frequency(1) == 1.0);

  auto s23 = schema_of({2, 3});
  const std::vector<std::string> ab{"a", "b"};
  auto full = empirical_joint(CodedTable(s23, {0, 0, 0, 1, 0, 2, 1, 0, 1, 1, 1, 2}), ab);
  CHECK(full.frequencies.size() == 6);
  for (auto [c, f] : full.frequencies) CHECK(f == doctest::Approx(1.0 / 6));
  CHECK(std::abs(full.total_frequency() - 1.0) < 1e-9);

  const std::vector<std::string> bad{"zz"};
  CHECK_THROWS_AS(empirical_joint(CodedTable(s, {0}), bad), SchemaError);
}

TEST_CASE("histogram counts are independent of row order") {
  Rng rng(21);
  auto u = oracles::random_universe(rng);
  std::vector<std::size_t> rev(u.generated.rows());
  for (std::size_t i = 0; i < rev.size(); ++i) rev[i] = rev.size() - 1 - i;
  const auto names = u.schema.names();
  CHECK(empirical_joint(u.generated, names).counts == empirical_joint(u.generated.select_rows(rev), names).counts);
}

TEST_CASE("srmse hand values and properties") {
  CHECK(srmse(hist({0.5, 0.5}), hist({0.5, 0.5})) == 0.0);
  CHECK(std::abs(srmse(hist({1, 0}), hist({0.5, 0.5})) - 1.0) < 1e-9);
  CHECK(std::abs(srmse(hist({0.25, 0.25, 0.5}), hist({0.5, 0.5, 0})) - std::sqrt(0.375 * 3)) < 1e-9);
  CHECK(std::abs(srmse(hist({0.5, 0.5, 0}), hist({0.25, 0.25, 0.5})) - std::sqrt(0.375 * 3)) < 1e-12);
  // Zero-padding doubles N_c and multiplies SRMSE by sqrt(2).
  const double base = srmse(hist({1, 0}), hist({0.5, 0.5}));
  CHECK(std::abs(srmse(hist({1, 0, 0, 0}), hist({0.5, 0.5, 0, 0})) - base * std::sqrt(2.0)) < 1e-12);

  auto other = probability_histogram({"b"}, {2}, {{0, 1.0}});
  CHECK_THROWS_AS(srmse(hist({1, 0}), other), ComparabilityError);
}

TEST_CASE("pearson and r2 hand cases") {
  CHECK(*pearson(hist({0.7, 0.2, 0.1}), hist({0.7, 0.2, 0.1})) == doctest::Approx(1.0));
  CHECK(*r2(hist({0.7, 0.2, 0.1}), hist({0.7, 0.2, 0.1})) == doctest::Approx(1.0));
  CHECK(*pearson(hist({0.2, 0.8}), hist({0.8, 0.2})) == doctest::Approx(-1.0));
  CHECK_FALSE(pearson(hist({0.7, 0.3}), hist({0.5, 0.5})).has_value());
  CHECK_FALSE(r2(hist({0.7, 0.3}), hist({0.5, 0.5})).has_value());
}

TEST_CASE("scatter data covers the union of observed cells") {
  const auto pts = scatter_data(hist({0.5, 0.5, 0, 0}), hist({0.5, 0, 0.5, 0}));
  CHECK(pts.size() == 3);
  bool saw_reference_only = false;
  for (auto p : pts)
    if (p.reference == 0.5 && p.generated == 0.0) saw_reference_only = true;
  CHECK(saw_reference_only);
  for (auto p : scatter_data(hist({0.3, 0.7}), hist({0.3, 0.7}))) CHECK(p.reference == p.generated);
}

TEST_CASE("combo sets") {
  auto s = schema_of({2, 2});
  const std::vector<std::string> ab{"a", "b"};
  CHECK(combo_set(CodedTable(s), ab).size() == 0);
  CHECK(combo_set(CodedTable(s, {1, 1, 1, 1, 1, 1}), ab).size() == 1);
  CHECK(combo_set(CodedTable(s, {0, 0, 0, 1, 1, 0, 1, 1}), ab).size() == 4);
}

TEST_CASE("combo codec labels and round trip") {
  auto s = schema_of({4, 1, 3});
  const std::vector<std::string> cab{"c", "a", "b"};
  ComboCodec codec(s, cab);
  CHECK(codec.n_cells() == 12);
  for (Combo c = 0; c < codec.n_cells(); ++c) CHECK(codec.encode_codes(codec.decode(c)) == c);
  const std::uint32_t row[] = {3, 0, 2};  // a=3, b=0, c=2
  CHECK(codec.label(codec.encode_row(row)) == "2-3-0");
}

TEST_CASE("zero_analysis hand example and undefined ratio") {
  auto s = schema_of({2, 2});
  const std::vector<std::string> ab{"a", "b"};
  CodedTable train(s, {0, 0, 0, 1}), test(s, {0, 0, 1, 0}), gen(s, {0, 0, 1, 0, 1, 1});
  const auto r = zero_analysis(train, test, gen, ab);
  CHECK(r.n_sampling_zeros == 1);
  CHECK(r.n_recovered == 1);
  CHECK(r.recovered_fraction == 1.0);
  CHECK(r.n_structural_proxy == 1);
  CHECK(r.ratio == 1.0);

  const auto none = zero_analysis(train, test, CodedTable(s, {0, 1, 0, 0}), ab);
  CHECK(none.n_recovered == 0);
  CHECK(none.n_structural_proxy == 0);
  CHECK_FALSE(none.ratio.has_value());

  CHECK_THROWS_AS(zero_analysis(train, test, CodedTable(schema_of({2, 3})), ab), ComparabilityError);
}

TEST_CASE("zero_analysis matches set arithmetic on random universes") {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    auto u = oracles::random_universe(rng);
    const auto names = u.schema.names();
    const auto r = zero_analysis(u.train, u.test, u.generated, names);
    const auto o = oracles::zero_accounting(u.train, u.test, u.generated);
    CHECK(r.n_sampling_zeros == o.sampling_zeros);
    CHECK(r.n_recovered == o.recovered);
    CHECK(r.n_structural_proxy == o.structural);
    CHECK(r.n_seen_in_train == o.seen_in_train);
    CHECK(r.n_generated_distinct == o.distinct);
    CHECK(r.n_seen_in_train + r.n_recovered + r.n_structural_proxy == r.n_generated_distinct);
    CHECK(r.n_recovered <= r.n_sampling_zeros);

    // Duplicating and reversing generated rows changes nothing.
    std::vector<std::size_t> idx;
    for (std::size_t i = u.generated.rows(); i-- > 0;) idx.insert(idx.end(), {i, i});
    CHECK(zero_analysis(u.train, u.test, u.generated.select_rows(idx), names) == r);
  }
}

TEST_CASE("ratio curve is cumulative and ends at the full report") {
  Rng rng(41);
  auto u = oracles::random_universe(rng);
  while (u.generated.rows() < 20) u = oracles::random_universe(rng);
  const auto names = u.schema.names();
  const auto curve = ratio_curve(u.train, u.test, u.generated, names, 7);
  REQUIRE(!curve.empty());
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].generated > curve[i - 1].generated);
    CHECK(curve[i].report.n_recovered >= curve[i - 1].report.n_recovered);
    CHECK(curve[i].report.n_structural_proxy >= curve[i - 1].report.n_structural_proxy);
  }
  for (const auto& p : curve) CHECK(p.report.recovered_fraction <= 1.0);
  CHECK(curve.back().generated == u.generated.rows());
  CHECK(curve.back().report == zero_analysis(u.train, u.test, u.generated, names));
  CHECK_THROWS_AS(ratio_curve(u.train, u.test, u.generated, names, 0), ConfigError);
}

TEST_CASE("dimension sweep rows match direct analysis and ascend in N_c") {
  auto s = schema_of({3, 4, 5});
  Rng rng(51);
  auto make = [&](std::size_t n) {
    CodedTable t(s);
    for (std::size_t r = 0; r < n; ++r) {
      const std::uint32_t row[] = {static_cast<std::uint32_t>(rng.uniform_index(3)),
                                   static_cast<std::uint32_t>(rng.uniform_index(4)),
                                   static_cast<std::uint32_t>(rng.uniform_index(5))};
      t.push_row(row);
    }
    return t;
  };
  const auto train = make(30), test = make(30), fixed = make(500);
  std::vector<NamedSampler> models{{"fixed", [&](std::size_t, std::uint64_t) { return fixed; }}};
  std::vector<std::vector<std::string>> ladder{{"a", "b", "c"}, {"a"}, {"a", "b"}};
  const auto rows = dimension_sweep(train, test, models, ladder, 500, 1);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].n_cells == 3);
  CHECK(rows[1].n_cells == 12);
  CHECK(rows[2].n_cells == 60);
  for (const auto& row : rows) CHECK(row.report == zero_analysis(train, test, fixed, row.subset));
}

TEST_CASE("additional ratio percent and number formatting") {
  CHECK(*additional_ratio_percent(30.0, 20.0) == doctest::Approx(50.0));
  CHECK_FALSE(additional_ratio_percent(std::nullopt, 20.0).has_value());
  CHECK_FALSE(additional_ratio_percent(30.0, std::nullopt).has_value());
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::nullopt).empty());
}

TEST_CASE("metrics CSV has the documented columns and flags undefined ratios") {
  auto s = schema_of({2, 2});
  const std::vector<std::string> ab{"a", "b"};
  CodedTable train(s, {0, 0, 0, 1}), test(s, {0, 0, 1, 0});
  const auto same = evaluate_subset(train, test, test, ab, "copy");
  CHECK(same.srmse == 0.0);
  CHECK(same.subset == "a+b");
  std::vector<MetricsRow> rows{same, evaluate_subset(train, test, train, ab, "train")};
  std::ostringstream out;
  write_metrics_csv(out, rows);
  std::istringstream lines(out.str());
  std::string header, first, second;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  CHECK(header ==
        "subset,model,n_c,srmse,pearson,r2,n_sampling_zeros,n_recovered,recovered_fraction,n_structural_proxy,ratio,"
        "undefined_flag");
  CHECK(first.substr(first.size() - 2) == ",0");
  CHECK(second.substr(second.size() - 3) == ",,1");
}
