#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sqlgate {

struct Query;
using QueryPtr = std::shared_ptr<const Query>;

enum class ExprKind : std::uint8_t {
  Column,      // [qualifier.]text
  Star,        // [qualifier.]*
  Number,
  String,
  Unary,       // text = operator, args[0]
  Binary,      // text = operator, args[0..1]; includes and/or and comparisons
  Not,         // args[0]
  Aggregate,   // text = function, distinct, args[0]
  Subquery,    // query
  Exists,      // query
  In,          // args[0] in (args[1..]) or (query); negated
  Between,     // args[0] between args[1] and args[2]; negated
  Like,        // args[0] like args[1]; negated
  IsNull,      // args[0] is [not] null
};

struct Expr {
  ExprKind kind = ExprKind::Column;
  std::string text;
  std::string qualifier;
  bool distinct = false;
  bool negated = false;
  std::vector<Expr> args;
  QueryPtr query;
};

struct SelectItem {
  Expr expr;
  std::optional<std::string> alias;
};

struct FromItem {
  std::string join;  // "" for the first item, "," or "join"
  std::string table;
  QueryPtr subquery;
  std::optional<std::string> alias;
  std::optional<Expr> on;
};

struct OrderItem {
  Expr expr;
  std::string direction;  // "", "asc" or "desc"
};

struct SelectCore {
  bool distinct = false;
  std::vector<SelectItem> items;
  std::vector<FromItem> from;
  std::optional<Expr> where;
  std::vector<Expr> group_by;
  std::optional<Expr> having;
  std::vector<OrderItem> order_by;
  std::optional<std::string> limit;
};

// A chain of operands joined by union / intersect / except.
struct Query {
  std::vector<std::variant<SelectCore, QueryPtr>> operands;
  std::vector<std::string> set_ops;
};

// The parsed form of a complete query.
using SqlAst = Query;

bool operator==(const Expr& a, const Expr& b);
bool operator==(const SelectItem& a, const SelectItem& b);
bool operator==(const FromItem& a, const FromItem& b);
bool operator==(const OrderItem& a, const OrderItem& b);
bool operator==(const SelectCore& a, const SelectCore& b);
bool operator==(const Query& a, const Query& b);

// JSON debug form mirroring the structure above.
nlohmann::json to_json(const Query& query);
nlohmann::json to_json(const Expr& expr);

}  // namespace sqlgate
