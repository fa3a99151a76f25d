#include "sqlgate/scope.hpp"

#include <algorithm>

namespace sqlgate {

bool FromTarget::exports_column(std::string_view column) const {
  return export_count(column) > 0;
}

std::size_t FromTarget::export_count(std::string_view column) const {
  if (!exports) return 0;
  return static_cast<std::size_t>(std::count(exports->begin(), exports->end(), column));
}

bool target_satisfies(const FromTarget& target, const std::string& column, ColumnSel sel) {
  switch (sel) {
    case ColumnSel::Star:
      return true;
    case ColumnSel::Any:
      return target.exports && !target.exports->empty();
    case ColumnSel::Named:
      return target.exports_column(column);
  }
  return false;
}

const FromTarget* find_alias(const std::vector<FromTarget>& targets, std::string_view alias) {
  for (const FromTarget& t : targets) {
    if (t.alias && *t.alias == alias) return &t;
  }
  return nullptr;
}

}  // namespace sqlgate
