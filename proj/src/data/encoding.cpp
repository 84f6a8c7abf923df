#include "synthpop/data.hpp"
#include "synthpop/error.hpp"

namespace synthpop::data {

EncodedMatrix one_hot_encode(const CodedTable& table) {
  const auto& schema = table.schema();
  const auto offsets = schema.block_offsets();
  EncodedMatrix out{schema, Matrix(table.rows(), schema.one_hot_width())};
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto dst = out.matrix.row(r);
    auto codes = table.row(r);
    for (std::size_t v = 0; v < codes.size(); ++v) {
      if (codes[v] >= schema[v].cardinality) throw EncodingError("code out of range for variable '" + schema[v].name + "'");
      dst[offsets[v] + codes[v]] = 1.0;
    }
  }
  return out;
}

std::vector<std::uint32_t> decode_row(std::span<const double> row, const Schema& schema) {
  if (row.size() != schema.one_hot_width()) throw ShapeError("encoded row width does not match the schema");
  std::vector<std::uint32_t> codes;
  codes.reserve(schema.size());
  std::size_t offset = 0;
  for (const auto& v : schema.variables()) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < v.cardinality; ++k)
      if (row[offset + k] > row[offset + best]) best = k;
    codes.push_back(static_cast<std::uint32_t>(best));
    offset += v.cardinality;
  }
  return codes;
}

CodedTable decode(const EncodedMatrix& encoded) {
  CodedTable out(encoded.schema);
  out.reserve(encoded.matrix.rows());
  for (std::size_t r = 0; r < encoded.matrix.rows(); ++r) out.push_row(decode_row(encoded.matrix.row(r), encoded.schema));
  return out;
}

}  // namespace synthpop::data
