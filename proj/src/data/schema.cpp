#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "synthpop/data.hpp"
#include "synthpop/error.hpp"
#include "synthpop/rng.hpp"

namespace synthpop::data {

void VariableSpec::validate() const {
  if (name.empty()) throw SchemaError("variable with an empty name");
  if (cardinality < 1) throw SchemaError("variable '" + name + "' has cardinality 0");
  if (kind == VariableKind::categorical) {
    if (labels.size() != cardinality)
      throw SchemaError("variable '" + name + "': label count does not equal cardinality");
    if (!bin_edges.empty() || missing_category)
      throw SchemaError("variable '" + name + "': categorical variables carry no bin edges");
  } else {
    if (bin_edges.size() + 1 + (missing_category ? 1 : 0) != cardinality)
      throw SchemaError("variable '" + name + "': bin count does not equal cardinality");
    for (std::size_t i = 1; i < bin_edges.size(); ++i)
      if (!(bin_edges[i - 1] < bin_edges[i]))
        throw SchemaError("variable '" + name + "': bin edges not strictly ascending");
  }
}

Schema::Schema(std::vector<VariableSpec> variables) : variables_(std::move(variables)) {
  std::unordered_set<std::string> seen;
  for (const auto& v : variables_) {
    v.validate();
    if (!seen.insert(v.name).second) throw SchemaError("duplicate variable name '" + v.name + "'");
  }
}

std::size_t Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (variables_[i].name == name) return i;
  throw SchemaError("unknown variable '" + name + "'");
}

std::vector<std::size_t> Schema::indices_of(std::span<const std::string> names) const {
  std::vector<std::size_t> out;
  for (const auto& n : names) out.push_back(index_of(n));
  return out;
}

std::vector<std::string> Schema::names() const {
  std::vector<std::string> out;
  for (const auto& v : variables_) out.push_back(v.name);
  return out;
}

std::vector<std::size_t> Schema::cardinalities() const {
  std::vector<std::size_t> out;
  for (const auto& v : variables_) out.push_back(v.cardinality);
  return out;
}

std::size_t Schema::one_hot_width() const {
  std::size_t w = 0;
  for (const auto& v : variables_) w += v.cardinality;
  return w;
}

std::vector<std::size_t> Schema::block_offsets() const {
  std::vector<std::size_t> out;
  std::size_t offset = 0;
  for (const auto& v : variables_) {
    out.push_back(offset);
    offset += v.cardinality;
  }
  return out;
}

nlohmann::json Schema::to_json() const {
  auto vars = nlohmann::json::array();
  for (const auto& v : variables_) {
    nlohmann::json j;
    j["name"] = v.name;
    j["kind"] = v.kind == VariableKind::categorical ? "categorical" : "numerical";
    j["cardinality"] = v.cardinality;
    j["edges"] = v.bin_edges;
    j["labels"] = v.labels;
    j["missing_category"] = v.missing_category;
    vars.push_back(std::move(j));
  }
  return nlohmann::json{{"variables", std::move(vars)}};
}

Schema Schema::from_json(const nlohmann::json& j) {
  try {
    std::vector<VariableSpec> vars;
    for (const auto& jv : j.at("variables")) {
      VariableSpec v;
      v.name = jv.at("name").get<std::string>();
      const auto kind = jv.at("kind").get<std::string>();
      if (kind == "categorical") {
        v.kind = VariableKind::categorical;
      } else if (kind == "numerical") {
        v.kind = VariableKind::numerical;
      } else {
        throw SchemaError("variable '" + v.name + "': unknown kind '" + kind + "'");
      }
      v.cardinality = jv.at("cardinality").get<std::size_t>();
      v.bin_edges = jv.value("edges", std::vector<double>{});
      v.labels = jv.value("labels", std::vector<std::string>{});
      v.missing_category = jv.value("missing_category", false);
      vars.push_back(std::move(v));
    }
    return Schema(std::move(vars));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema document: ") + e.what());
  }
}

void Schema::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw SchemaError("cannot open " + path.string() + " for writing");
  out << to_json().dump(2) << '\n';
}

Schema Schema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string Schema::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

CodedTable::CodedTable(Schema schema) : schema_(std::move(schema)) {}

CodedTable::CodedTable(Schema schema, std::vector<std::uint32_t> codes)
    : schema_(std::move(schema)), codes_(std::move(codes)) {
  const std::size_t width = schema_.size();
  if (width == 0 ? !codes_.empty() : codes_.size() % width != 0)
    throw EncodingError("code buffer is not a whole number of rows");
  for (std::size_t i = 0; i < codes_.size(); ++i)
    if (codes_[i] >= schema_[i % width].cardinality)
      throw EncodingError("code " + std::to_string(codes_[i]) + " out of range for variable '" +
                          schema_[i % width].name + "'");
}

std::size_t CodedTable::rows() const { return cols() == 0 ? 0 : codes_.size() / cols(); }

std::span<const std::uint32_t> CodedTable::row(std::size_t r) const {
  return {codes_.data() + r * cols(), cols()};
}

void CodedTable::push_row(std::span<const std::uint32_t> codes) {
  if (codes.size() != cols()) throw EncodingError("row width does not match the schema");
  for (std::size_t c = 0; c < codes.size(); ++c)
    if (codes[c] >= schema_[c].cardinality)
      throw EncodingError("code " + std::to_string(codes[c]) + " out of range for variable '" +
                          schema_[c].name + "' (cardinality " + std::to_string(schema_[c].cardinality) + ")");
  codes_.insert(codes_.end(), codes.begin(), codes.end());
}

CodedTable CodedTable::select_rows(std::span<const std::size_t> indices) const {
  CodedTable out(schema_);
  out.codes_.reserve(indices.size() * cols());
  for (auto i : indices) {
    auto r = row(i);
    out.codes_.insert(out.codes_.end(), r.begin(), r.end());
  }
  return out;
}

}  // namespace synthpop::data
