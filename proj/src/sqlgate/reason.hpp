#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace sqlgate {

enum class Reason {
  // lexical
  UnknownKeyword,
  InvalidIdentifier,
  MalformedNumber,
  UnterminatedConstruct,
  IllegalCharacter,
  IncompleteItem,
  // grammatical and schema composition
  Syntax,
  UnknownTable,
  ColumnNotInTable,
  AliasColumnMismatch,
  DuplicateAlias,
  IncompleteQuery,
  // deferred semantic obligations
  GuardViolation,
};

enum class ReasonCategory { Lexical, Grammar, Schema, Guard };

std::string_view reason_name(Reason reason);
std::optional<Reason> reason_from_name(std::string_view name);
ReasonCategory reason_category(Reason reason);

// Offset is the byte position in the detokenized text of the first character
// after which no continuation can make the text admissible (text length when
// the failure is only detected at end of input).
struct Rejection {
  Reason reason;
  std::size_t offset = 0;
  std::string detail;
};

}  // namespace sqlgate
