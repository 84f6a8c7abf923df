#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include "synthpop/error.hpp"
#include "synthpop/oracle.hpp"
#include "synthpop/rng.hpp"

namespace synthpop::oracle {

void GroundTruthSpec::validate() const {
  const std::size_t k = schema.size();
  if (k == 0) throw SchemaError("ground truth needs at least one variable");
  if (root.size() != schema[0].cardinality) throw SchemaError("root distribution does not match the first variable");
  if (transitions.size() != k - 1) throw SchemaError("need one transition table per variable after the first");
  auto check_row = [](std::span<const double> row, const std::string& where) {
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw SchemaError(where + ": negative or non-finite probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw SchemaError(where + ": probabilities do not sum to 1");
  };
  check_row(root, "root distribution");
  for (std::size_t t = 0; t < transitions.size(); ++t) {
    const auto& m = transitions[t];
    if (m.rows() != schema[t].cardinality || m.cols() != schema[t + 1].cardinality)
      throw SchemaError("transition " + std::to_string(t + 1) + " has the wrong shape");
    for (std::size_t r = 0; r < m.rows(); ++r)
      check_row(m.row(r), "transition " + std::to_string(t + 1) + " row " + std::to_string(r));
  }
}

std::uint64_t GroundTruthSpec::n_cells() const {
  std::uint64_t n = 1;
  for (auto c : schema.cardinalities()) n *= c;
  return n;
}

double GroundTruthSpec::probability(std::span<const std::uint32_t> codes) const {
  if (codes.size() != schema.size()) throw ShapeError("code vector length does not match the schema");
  double p = root.at(codes[0]);
  for (std::size_t k = 1; k < codes.size(); ++k) p *= transitions[k - 1](codes[k - 1], codes[k]);
  return p;
}

namespace {

// Visits every full-joint cell in mixed-radix order with its chain probability.
template <typename Visit>
void enumerate(const GroundTruthSpec& spec, Visit visit) {
  const auto cards = spec.schema.cardinalities();
  std::vector<std::uint32_t> codes(cards.size(), 0);
  auto recurse = [&](auto& self, std::size_t depth, double p) -> void {
    if (depth == cards.size()) {
      visit(std::span<const std::uint32_t>(codes), p);
      return;
    }
    for (std::uint32_t c = 0; c < cards[depth]; ++c) {
      codes[depth] = c;
      const double q = depth == 0 ? spec.root[c] : p * spec.transitions[depth - 1](codes[depth - 1], c);
      self(self, depth + 1, q);
    }
  };
  recurse(recurse, 0, 1.0);
}

}  // namespace

std::vector<eval::Combo> GroundTruthSpec::zero_cells() const {
  std::vector<eval::Combo> zeros;
  eval::Combo index = 0;
  enumerate(*this, [&](std::span<const std::uint32_t>, double p) {
    if (p == 0.0) zeros.push_back(index);
    ++index;
  });
  return zeros;
}

double GroundTruthSpec::structural_zero_fraction() const {
  return static_cast<double>(zero_cells().size()) / static_cast<double>(n_cells());
}

nlohmann::json GroundTruthSpec::to_json() const {
  auto tables = nlohmann::json::array();
  for (const auto& m : transitions) {
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    tables.push_back(std::move(rows));
  }
  return {{"schema", schema.to_json()}, {"root", root}, {"transitions", std::move(tables)}};
}

GroundTruthSpec GroundTruthSpec::from_json(const nlohmann::json& j) {
  GroundTruthSpec spec;
  try {
    spec.schema = data::Schema::from_json(j.at("schema"));
    spec.root = j.at("root").get<std::vector<double>>();
    for (const auto& table : j.at("transitions")) {
      const auto rows = table.get<std::vector<std::vector<double>>>();
      const std::size_t cols = rows.empty() ? 0 : rows.front().size();
      Matrix m(rows.size(), cols);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) throw SchemaError("ragged transition table");
        std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
      }
      spec.transitions.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed ground-truth document: ") + e.what());
  }
  spec.validate();
  return spec;
}

void GroundTruthSpec::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SchemaError("cannot open " + path.string() + " for writing");
  out << to_json().dump(2) << '\n';
}

GroundTruthSpec GroundTruthSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string GroundTruthSpec::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

data::CodedTable generate_population(const GroundTruthSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  Rng rng = Rng::stream(seed, "population");
  data::CodedTable out(spec.schema);
  out.reserve(n);
  std::vector<std::uint32_t> codes(spec.schema.size());
  for (std::size_t r = 0; r < n; ++r) {
    codes[0] = static_cast<std::uint32_t>(rng.categorical(spec.root));
    for (std::size_t k = 1; k < codes.size(); ++k)
      codes[k] = static_cast<std::uint32_t>(rng.categorical(spec.transitions[k - 1].row(codes[k - 1])));
    out.push_row(codes);
  }
  return out;
}

eval::JointHistogram exact_joint(const GroundTruthSpec& spec, std::span<const std::string> variables) {
  const eval::ComboCodec codec(spec.schema, variables);
  std::unordered_map<eval::Combo, double> cells;
  enumerate(spec, [&](std::span<const std::uint32_t> codes, double p) {
    if (p > 0.0) cells[codec.encode_row(codes)] += p;
  });
  return eval::probability_histogram(codec.variables(), codec.cardinalities(),
                                     std::vector<std::pair<eval::Combo, double>>(cells.begin(), cells.end()));
}

namespace {

// Normalized row of a banded conditional table: weights[d] applies at
// column center + d - back; columns outside [0, cols) are dropped.
std::vector<double> band_row(std::size_t cols, long center, std::span<const double> weights, long back) {
  std::vector<double> row(cols, 0.0);
  for (std::size_t d = 0; d < weights.size(); ++d) {
    const long c = center + static_cast<long>(d) - back;
    if (c >= 0 && c < static_cast<long>(cols)) row[static_cast<std::size_t>(c)] = weights[d];
  }
  double total = 0.0;
  for (double w : row) total += w;
  for (double& w : row) w /= total;
  return row;
}

Matrix band_table(std::size_t rows, std::size_t cols, std::span<const double> weights, long back) {
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto center = static_cast<long>(r * cols / rows);
    const auto row = band_row(cols, center, weights, back);
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

data::VariableSpec categorical(const std::string& name, std::size_t cardinality) {
  data::VariableSpec v;
  v.name = name;
  v.kind = data::VariableKind::categorical;
  v.cardinality = cardinality;
  for (std::size_t i = 0; i < cardinality; ++i) v.labels.push_back(std::to_string(i));
  return v;
}

}  // namespace

GroundTruthSpec default_benchmark() {
  GroundTruthSpec spec;
  spec.schema = data::Schema({categorical("age_band", 8), categorical("income_band", 8), categorical("education", 6),
                              categorical("household_size", 5), categorical("car_count", 4)});
  const std::vector<double> root_weights{4, 7, 9, 8, 6, 4, 2, 1};
  double total = 0.0;
  for (double w : root_weights) total += w;
  for (double w : root_weights) spec.root.push_back(w / total);

  // Band weights run from `back` columns below the center upward; the small
  // trailing weights are the rare-but-possible cells that become sampling zeros.
  const std::vector<double> income{2.0, 5.0, 3.0, 0.4};
  const std::vector<double> education{2.0, 4.0, 2.0, 0.15};
  const std::vector<double> household{1.0, 4.0, 2.0, 0.3};
  const std::vector<double> cars{1.0, 3.0, 1.0, 0.1};
  spec.transitions.push_back(band_table(8, 8, income, 1));
  spec.transitions.push_back(band_table(8, 6, education, 1));
  spec.transitions.push_back(band_table(6, 5, household, 1));
  spec.transitions.push_back(band_table(5, 4, cars, 1));
  spec.validate();
  return spec;
}

void write_exact_joint_csv(std::ostream& out, const eval::JointHistogram& joint) {
  for (const auto& v : joint.variables) out << v << ',';
  out << "probability\n";
  for (const auto& [combo, p] : joint.frequencies) {
    std::vector<std::uint32_t> codes(joint.cardinalities.size());
    auto rest = combo;
    for (std::size_t i = codes.size(); i-- > 0;) {
      codes[i] = static_cast<std::uint32_t>(rest % joint.cardinalities[i]);
      rest /= joint.cardinalities[i];
    }
    for (auto c : codes) out << c << ',';
    out << eval::format_number(p) << '\n';
  }
}

}  // namespace synthpop::oracle
