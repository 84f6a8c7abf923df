#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_set>

#include "synthpop/data.hpp"
#include "synthpop/error.hpp"

namespace synthpop::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// One CSV record; double quotes may wrap fields and "" escapes a quote.
std::vector<std::string> split_record(std::string_view line, std::size_t line_no, const std::string& source) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw IngestionError(source + ": unterminated quote on row " + std::to_string(line_no));
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::vector<std::string> read_header(std::istream& in, const std::string& source) {
  std::string line;
  if (!next_line(in, line)) throw IngestionError(source + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_record(line, 1, source);
  std::unordered_set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw IngestionError(source + ": empty column name in header, column " + std::to_string(c + 1));
    if (!seen.insert(header[c]).second)
      throw IngestionError(source + ": duplicate header '" + header[c] + "' at column " + std::to_string(c + 1));
  }
  return header;
}

}  // namespace

std::size_t RawColumn::size() const { return kind == VariableKind::numerical ? numbers.size() : labels.size(); }

std::size_t RawColumn::missing_count() const {
  std::size_t n = 0;
  if (kind == VariableKind::numerical) {
    for (const auto& v : numbers) n += !v.has_value();
  } else {
    for (const auto& v : labels) n += !v.has_value();
  }
  return n;
}

RawTable read_csv(std::istream& in, const std::set<std::string>& numerical, const std::string& source) {
  const auto header = read_header(in, source);
  for (const auto& name : numerical)
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw IngestionError(source + ": declared numerical column '" + name + "' is not in the header");

  RawTable table;
  for (const auto& name : header) {
    RawColumn col;
    col.name = name;
    col.kind = numerical.contains(name) ? VariableKind::numerical : VariableKind::categorical;
    table.columns.push_back(std::move(col));
  }

  std::string line;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_record(line, line_no, source);
    if (fields.size() != header.size())
      throw IngestionError(source + ": ragged row " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto& col = table.columns[c];
      const std::string& f = fields[c];
      if (col.kind == VariableKind::categorical) {
        col.labels.push_back(f.empty() ? std::nullopt : std::optional<std::string>(f));
        continue;
      }
      if (f.empty()) {
        col.numbers.push_back(std::nullopt);
        continue;
      }
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(value))
        throw IngestionError(source + ": unparsable number '" + f + "' at row " + std::to_string(line_no) +
                             ", column '" + col.name + "'");
      col.numbers.push_back(value);
    }
    ++table.rows;
  }
  return table;
}

RawTable load_csv(const std::filesystem::path& path, const std::set<std::string>& numerical) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  return read_csv(in, numerical, path.string());
}

void write_coded_csv(std::ostream& out, const CodedTable& table) {
  const auto names = table.schema().names();
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    auto row = table.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
}

void save_coded_csv(const std::filesystem::path& path, const CodedTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IngestionError("cannot open " + path.string() + " for writing");
  write_coded_csv(out, table);
  if (!out) throw IngestionError("failed writing " + path.string());
}

CodedTable read_coded_csv(std::istream& in, const Schema& schema, const std::string& source) {
  const auto header = read_header(in, source);
  if (header != schema.names())
    throw SchemaError(source + ": header does not list the schema variables in schema order");
  CodedTable table(schema);
  std::vector<std::uint32_t> codes(schema.size());
  std::string line;
  std::size_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_record(line, line_no, source);
    if (fields.size() != header.size())
      throw IngestionError(source + ": ragged row " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto& f = fields[c];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), codes[c]);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty())
        throw IngestionError(source + ": invalid code '" + f + "' at row " + std::to_string(line_no) +
                             ", column '" + header[c] + "'");
    }
    try {
      table.push_row(codes);
    } catch (const EncodingError& e) {
      throw EncodingError(source + ": row " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

CodedTable load_coded_csv(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  return read_coded_csv(in, schema, path.string());
}

}  // namespace synthpop::data
