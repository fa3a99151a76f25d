#pragma once

#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sqlgate {

class SchemaError : public std::runtime_error {
 public:
  enum class Kind { Format, Integrity };
  SchemaError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
};

// Table and column names with column-to-table membership. Names are stored
// folded to lowercase; every lookup folds its argument first. Immutable after
// construction and safe to share between decoding sessions.
class SqlSchema {
 public:
  // Throws SchemaError(Integrity) on duplicate, empty, keyword or non-identifier names.
  SqlSchema(std::string db_id, std::vector<Table> tables);

  const std::string& db_id() const { return db_id_; }
  std::span<const Table> tables() const { return tables_; }

  const Table* find_table(std::string_view name) const;
  bool has_column(std::string_view column) const;
  bool table_has_column(std::string_view table, std::string_view column) const;

  // Tables (in schema order) whose column list contains `column`.
  std::vector<std::string> tables_containing(std::string_view column) const;

  // Whether `fragment` is a case-insensitive prefix of any table or column name.
  bool is_identifier_prefix(std::string_view fragment) const;
  bool is_table_prefix(std::string_view fragment) const;
  bool is_column_prefix(std::string_view fragment) const;
  bool is_name(std::string_view name) const;

  // Sorted, de-duplicated name lists; ranges sharing a prefix are contiguous.
  std::span<const std::string> table_names() const { return table_names_; }
  std::span<const std::string> column_names() const { return column_names_; }
  std::span<const std::string> all_names() const { return all_names_; }

  // Names in `sorted` that start with `prefix`.
  static std::span<const std::string> with_prefix(std::span<const std::string> sorted,
                                                  std::string_view prefix);

  // Length of the longest prefix of `word` that extends to some name.
  std::size_t longest_name_prefix(std::string_view word) const;

  friend bool operator==(const SqlSchema& a, const SqlSchema& b);

 private:
  std::string db_id_;
  std::vector<Table> tables_;
  // Each entry: (column, table index); sorted. Inverse of tables_.
  std::vector<std::pair<std::string, std::size_t>> column_index_;
  std::vector<std::string> table_names_;
  std::vector<std::string> column_names_;
  std::vector<std::string> all_names_;
};

bool operator==(const Table& a, const Table& b);

// Canonical JSON schema file: {"db_id": "...", "tables": [{"name": "...", "columns": [...]}]}.
SqlSchema load_schema(std::istream& source);
SqlSchema load_schema_string(std::string_view text);
SqlSchema load_schema_file(const std::string& path);
std::string serialize_schema(const SqlSchema& schema);

}  // namespace sqlgate
