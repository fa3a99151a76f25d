#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sqlgate {

using ColumnList = std::vector<std::string>;

// Something brought into a select scope by its from clause: a schema table or
// a sub-query, optionally bound to an alias.
struct FromTarget {
  std::optional<std::string> alias;
  std::string table;  // empty for sub-queries
  std::shared_ptr<const ColumnList> exports;

  bool is_subquery() const { return table.empty(); }
  bool exports_column(std::string_view column) const;
  std::size_t export_count(std::string_view column) const;
};

// Which column a qualified reference selects. `Any` stands for "some column
// of the qualifier" and only appears while probing admissibility of a
// partially emitted name.
enum class ColumnSel : std::uint8_t { Named, Any, Star };

struct ColumnRef {
  enum class Form : std::uint8_t { Bare, Table, Alias };
  Form form = Form::Bare;
  std::string qualifier;
  std::string column;
  ColumnSel sel = ColumnSel::Named;
  std::size_t offset = 0;
};

// Whether `target` provides what `ref` asks of it (named column, any column, star).
bool target_satisfies(const FromTarget& target, const std::string& column, ColumnSel sel);

// Alias lookups over the bindings of one scope.
const FromTarget* find_alias(const std::vector<FromTarget>& targets, std::string_view alias);

}  // namespace sqlgate
