#include "sqlgate/ast.hpp"

#include <nlohmann/json.hpp>

namespace sqlgate {
namespace {

using nlohmann::json;

bool same_query(const QueryPtr& a, const QueryPtr& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}

std::string_view kind_name(ExprKind kind) {
  switch (kind) {
    case ExprKind::Column: return "column";
    case ExprKind::Star: return "star";
    case ExprKind::Number: return "number";
    case ExprKind::String: return "string";
    case ExprKind::Unary: return "unary";
    case ExprKind::Binary: return "binary";
    case ExprKind::Not: return "not";
    case ExprKind::Aggregate: return "aggregate";
    case ExprKind::Subquery: return "subquery";
    case ExprKind::Exists: return "exists";
    case ExprKind::In: return "in";
    case ExprKind::Between: return "between";
    case ExprKind::Like: return "like";
    case ExprKind::IsNull: return "is_null";
  }
  return "?";
}

json core_json(const SelectCore& core) {
  json items = json::array();
  for (const SelectItem& item : core.items) {
    json j{{"expr", to_json(item.expr)}};
    if (item.alias) j["alias"] = *item.alias;
    items.push_back(std::move(j));
  }
  json from = json::array();
  for (const FromItem& f : core.from) {
    json j;
    if (!f.join.empty()) j["join"] = f.join;
    if (f.subquery) {
      j["subquery"] = to_json(*f.subquery);
    } else {
      j["table"] = f.table;
    }
    if (f.alias) j["alias"] = *f.alias;
    if (f.on) j["on"] = to_json(*f.on);
    from.push_back(std::move(j));
  }
  json out{{"select", items}, {"from", from}};
  if (core.distinct) out["distinct"] = true;
  if (core.where) out["where"] = to_json(*core.where);
  if (!core.group_by.empty()) {
    json g = json::array();
    for (const Expr& e : core.group_by) g.push_back(to_json(e));
    out["group_by"] = std::move(g);
  }
  if (core.having) out["having"] = to_json(*core.having);
  if (!core.order_by.empty()) {
    json o = json::array();
    for (const OrderItem& item : core.order_by) {
      json j{{"expr", to_json(item.expr)}};
      if (!item.direction.empty()) j["direction"] = item.direction;
      o.push_back(std::move(j));
    }
    out["order_by"] = std::move(o);
  }
  if (core.limit) out["limit"] = *core.limit;
  return out;
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.text == b.text && a.qualifier == b.qualifier &&
         a.distinct == b.distinct && a.negated == b.negated && a.args == b.args &&
         same_query(a.query, b.query);
}

bool operator==(const SelectItem& a, const SelectItem& b) {
  return a.expr == b.expr && a.alias == b.alias;
}

bool operator==(const FromItem& a, const FromItem& b) {
  return a.join == b.join && a.table == b.table && same_query(a.subquery, b.subquery) &&
         a.alias == b.alias && a.on == b.on;
}

bool operator==(const OrderItem& a, const OrderItem& b) {
  return a.expr == b.expr && a.direction == b.direction;
}

bool operator==(const SelectCore& a, const SelectCore& b) {
  return a.distinct == b.distinct && a.items == b.items && a.from == b.from && a.where == b.where &&
         a.group_by == b.group_by && a.having == b.having && a.order_by == b.order_by &&
         a.limit == b.limit;
}

bool operator==(const Query& a, const Query& b) {
  if (a.set_ops != b.set_ops || a.operands.size() != b.operands.size()) return false;
  for (std::size_t i = 0; i < a.operands.size(); ++i) {
    const auto& x = a.operands[i];
    const auto& y = b.operands[i];
    if (x.index() != y.index()) return false;
    if (x.index() == 0) {
      if (!(std::get<SelectCore>(x) == std::get<SelectCore>(y))) return false;
    } else if (!same_query(std::get<QueryPtr>(x), std::get<QueryPtr>(y))) {
      return false;
    }
  }
  return true;
}

json to_json(const Expr& expr) {
  json j{{"kind", kind_name(expr.kind)}};
  if (!expr.text.empty()) j["text"] = expr.text;
  if (!expr.qualifier.empty()) j["qualifier"] = expr.qualifier;
  if (expr.distinct) j["distinct"] = true;
  if (expr.negated) j["negated"] = true;
  if (!expr.args.empty()) {
    json args = json::array();
    for (const Expr& a : expr.args) args.push_back(to_json(a));
    j["args"] = std::move(args);
  }
  if (expr.query) j["query"] = to_json(*expr.query);
  return j;
}

json to_json(const Query& query) {
  json operands = json::array();
  for (const auto& op : query.operands) {
    if (op.index() == 0) {
      operands.push_back(core_json(std::get<SelectCore>(op)));
    } else {
      operands.push_back(json{{"query", to_json(*std::get<QueryPtr>(op))}});
    }
  }
  json out{{"operands", operands}};
  if (!query.set_ops.empty()) out["set_ops"] = query.set_ops;
  return out;
}

}  // namespace sqlgate
