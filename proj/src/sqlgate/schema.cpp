#include "sqlgate/schema.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sqlgate/sql_words.hpp"

namespace sqlgate {
namespace {

using nlohmann::json;

void check_name(const std::string& name, std::string_view what) {
  if (!is_valid_identifier(name)) {
    throw SchemaError(SchemaError::Kind::Integrity,
                      std::string(what) + " name '" + name + "' is not a plain identifier");
  }
  if (keyword_from_text(name)) {
    throw SchemaError(SchemaError::Kind::Integrity,
                      std::string(what) + " name '" + name + "' collides with an SQL keyword");
  }
}

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] void format_error(const std::string& message) {
  throw SchemaError(SchemaError::Kind::Format, message);
}

}  // namespace

SqlSchema::SqlSchema(std::string db_id, std::vector<Table> tables)
    : db_id_(std::move(db_id)), tables_(std::move(tables)) {
  if (tables_.empty()) throw SchemaError(SchemaError::Kind::Integrity, "schema has no tables");
  std::set<std::string> seen_tables;
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    Table& table = tables_[t];
    table.name = fold_ascii(table.name);
    check_name(table.name, "table");
    if (!seen_tables.insert(table.name).second) {
      throw SchemaError(SchemaError::Kind::Integrity, "duplicate table '" + table.name + "'");
    }
    if (table.columns.empty()) {
      throw SchemaError(SchemaError::Kind::Integrity, "table '" + table.name + "' has no columns");
    }
    std::set<std::string> seen_columns;
    for (std::string& column : table.columns) {
      column = fold_ascii(column);
      check_name(column, "column");
      if (!seen_columns.insert(column).second) {
        throw SchemaError(SchemaError::Kind::Integrity,
                          "duplicate column '" + column + "' in table '" + table.name + "'");
      }
      column_index_.emplace_back(column, t);
    }
    table_names_.push_back(table.name);
  }
  std::sort(column_index_.begin(), column_index_.end());
  for (const auto& [column, _] : column_index_) {
    if (column_names_.empty() || column_names_.back() != column) column_names_.push_back(column);
  }
  std::sort(table_names_.begin(), table_names_.end());
  std::set_union(table_names_.begin(), table_names_.end(), column_names_.begin(),
                 column_names_.end(), std::back_inserter(all_names_));
  all_names_.erase(std::unique(all_names_.begin(), all_names_.end()), all_names_.end());
}

const Table* SqlSchema::find_table(std::string_view name) const {
  const std::string folded = fold_ascii(name);
  for (const Table& table : tables_) {
    if (table.name == folded) return &table;
  }
  return nullptr;
}

bool SqlSchema::has_column(std::string_view column) const {
  return std::binary_search(column_names_.begin(), column_names_.end(), fold_ascii(column));
}

bool SqlSchema::table_has_column(std::string_view table, std::string_view column) const {
  const Table* t = find_table(table);
  if (t == nullptr) return false;
  const std::string folded = fold_ascii(column);
  return std::find(t->columns.begin(), t->columns.end(), folded) != t->columns.end();
}

std::vector<std::string> SqlSchema::tables_containing(std::string_view column) const {
  const std::string folded = fold_ascii(column);
  auto lo = std::lower_bound(column_index_.begin(), column_index_.end(),
                             std::make_pair(folded, std::size_t{0}));
  std::vector<std::size_t> indices;
  for (; lo != column_index_.end() && lo->first == folded; ++lo) indices.push_back(lo->second);
  std::sort(indices.begin(), indices.end());
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(tables_[i].name);
  return out;
}

std::span<const std::string> SqlSchema::with_prefix(std::span<const std::string> sorted,
                                                    std::string_view prefix) {
  auto lo = std::lower_bound(sorted.begin(), sorted.end(), prefix,
                             [](const std::string& a, std::string_view b) { return a < b; });
  auto hi = lo;
  while (hi != sorted.end() && std::string_view(*hi).substr(0, prefix.size()) == prefix) ++hi;
  return {lo, hi};
}

bool SqlSchema::is_identifier_prefix(std::string_view fragment) const {
  return !with_prefix(all_names_, fold_ascii(fragment)).empty();
}

bool SqlSchema::is_table_prefix(std::string_view fragment) const {
  return !with_prefix(table_names_, fold_ascii(fragment)).empty();
}

bool SqlSchema::is_column_prefix(std::string_view fragment) const {
  return !with_prefix(column_names_, fold_ascii(fragment)).empty();
}

bool SqlSchema::is_name(std::string_view name) const {
  return std::binary_search(all_names_.begin(), all_names_.end(), fold_ascii(name));
}

std::size_t SqlSchema::longest_name_prefix(std::string_view word) const {
  const std::string folded = fold_ascii(word);
  std::size_t n = folded.size();
  while (n > 0 && with_prefix(all_names_, std::string_view(folded).substr(0, n)).empty()) --n;
  return n;
}

bool operator==(const Table& a, const Table& b) {
  return a.name == b.name && a.columns == b.columns;
}

bool operator==(const SqlSchema& a, const SqlSchema& b) {
  return a.db_id_ == b.db_id_ && a.tables_ == b.tables_;
}

SqlSchema load_schema_string(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    format_error("malformed schema document at " + line_context(text, e.byte == 0 ? 0 : e.byte - 1) +
                 ": " + e.what());
  }
  if (!doc.is_object()) format_error("schema document must be a JSON object");
  std::string db_id;
  if (auto it = doc.find("db_id"); it != doc.end()) {
    if (!it->is_string()) format_error("'db_id' must be a string");
    db_id = it->get<std::string>();
  }
  auto tables_it = doc.find("tables");
  if (tables_it == doc.end() || !tables_it->is_array()) format_error("'tables' must be an array");
  std::vector<Table> tables;
  for (const json& entry : *tables_it) {
    if (!entry.is_object()) format_error("table entries must be objects");
    auto name = entry.find("name");
    auto columns = entry.find("columns");
    if (name == entry.end() || !name->is_string()) format_error("table entry needs a string 'name'");
    if (columns == entry.end() || !columns->is_array()) {
      format_error("table '" + name->get<std::string>() + "' needs a 'columns' array");
    }
    Table table{name->get<std::string>(), {}};
    for (const json& column : *columns) {
      if (!column.is_string()) format_error("column names must be strings");
      table.columns.push_back(column.get<std::string>());
    }
    tables.push_back(std::move(table));
  }
  return SqlSchema(std::move(db_id), std::move(tables));
}

SqlSchema load_schema(std::istream& source) {
  std::stringstream buffer;
  buffer << source.rdbuf();
  return load_schema_string(buffer.str());
}

SqlSchema load_schema_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open schema file '" + path + "'");
  return load_schema(in);
}

std::string serialize_schema(const SqlSchema& schema) {
  json tables = json::array();
  for (const Table& table : schema.tables()) {
    tables.push_back({{"name", table.name}, {"columns", table.columns}});
  }
  return json{{"db_id", schema.db_id()}, {"tables", tables}}.dump();
}

}  // namespace sqlgate
