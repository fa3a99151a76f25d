#include "sqlgate/reason.hpp"

#include <array>
#include <utility>

namespace sqlgate {
namespace {

constexpr std::array<std::pair<Reason, std::string_view>, 13> kNames = {{
    {Reason::UnknownKeyword, "unknown-keyword"},
    {Reason::InvalidIdentifier, "invalid-identifier"},
    {Reason::MalformedNumber, "malformed-number"},
    {Reason::UnterminatedConstruct, "unterminated-construct-impossible"},
    {Reason::IllegalCharacter, "illegal-character"},
    {Reason::IncompleteItem, "incomplete-item"},
    {Reason::Syntax, "syntax"},
    {Reason::UnknownTable, "unknown-table"},
    {Reason::ColumnNotInTable, "column-not-in-table"},
    {Reason::AliasColumnMismatch, "alias-column-mismatch"},
    {Reason::DuplicateAlias, "duplicate-alias"},
    {Reason::IncompleteQuery, "incomplete-query"},
    {Reason::GuardViolation, "guard-violation"},
}};

}  // namespace

std::string_view reason_name(Reason reason) {
  for (const auto& [r, name] : kNames) {
    if (r == reason) return name;
  }
  return "unknown";
}

std::optional<Reason> reason_from_name(std::string_view name) {
  for (const auto& [r, n] : kNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

ReasonCategory reason_category(Reason reason) {
  switch (reason) {
    case Reason::UnknownKeyword:
    case Reason::InvalidIdentifier:
    case Reason::MalformedNumber:
    case Reason::UnterminatedConstruct:
    case Reason::IllegalCharacter:
    case Reason::IncompleteItem:
      return ReasonCategory::Lexical;
    case Reason::Syntax:
    case Reason::IncompleteQuery:
      return ReasonCategory::Grammar;
    case Reason::UnknownTable:
    case Reason::ColumnNotInTable:
    case Reason::AliasColumnMismatch:
    case Reason::DuplicateAlias:
      return ReasonCategory::Schema;
    case Reason::GuardViolation:
      return ReasonCategory::Guard;
  }
  return ReasonCategory::Grammar;
}

}  // namespace sqlgate
