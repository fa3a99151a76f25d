#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sqlgate/reason.hpp"
#include "sqlgate/schema.hpp"
#include "sqlgate/sql_words.hpp"

namespace sqlgate {

enum class LexKind : std::uint8_t {
  Keyword,
  Punctuation,
  Operator,
  NumberLiteral,
  StringLiteral,
  Identifier,
  QualifiedIdentifier,
  Star,
};

std::string_view lex_kind_name(LexKind kind);

struct LexItem {
  LexKind kind;
  // Folded to lowercase for keywords and identifiers; verbatim for literals.
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const LexItem&, const LexItem&) = default;
};

enum class PendingKind : std::uint8_t { None, Word, Number, String, Operator };

// Resumable lexer state. A value: feeding returns a new state.
struct LexState {
  std::vector<LexItem> items;
  std::string text;
  PendingKind pending_kind = PendingKind::None;
  std::size_t pending_begin = 0;
  // Folded pending fragment (verbatim for string literals).
  std::string pending;
  // String literal: the last character was a quote that may close the literal
  // or start an escaped quote.
  bool quote_open = false;

  std::size_t consumed() const { return text.size(); }
};

class LexOutcome {
 public:
  LexOutcome(LexState state) : value_(std::move(state)) {}
  LexOutcome(Rejection rejection) : value_(std::move(rejection)) {}

  bool accepted() const { return std::holds_alternative<LexState>(value_); }
  const LexState& state() const { return std::get<LexState>(value_); }
  LexState& state() { return std::get<LexState>(value_); }
  const Rejection& rejection() const { return std::get<Rejection>(value_); }

 private:
  std::variant<LexState, Rejection> value_;
};

// Order-insensitive lexical validation against a schema: keywords, punctuation,
// operators, literals and schema identifiers (plus table aliases matching the
// alias pattern). Accepts a text iff some continuation makes it a valid
// lexical stream.
class Lexer {
 public:
  explicit Lexer(const SqlSchema& schema, AliasPattern alias = AliasPattern());

  LexOutcome feed(const LexState& state, std::string_view chunk) const;
  // End of input: the pending fragment must form a complete item.
  LexOutcome finalize(const LexState& state) const;

  // Single-character step, in place. Completed items are appended to
  // state.items. On rejection `state` is left partially updated.
  std::optional<Rejection> step(LexState& state, char c) const;
  std::optional<Rejection> finish(LexState& state) const;

  // Prefix admissibility of a pending fragment (as stored in LexState::pending).
  bool pending_admissible(PendingKind kind, std::string_view pending) const;

  bool is_complete_word(std::string_view word) const;
  Reason word_reason(std::string_view word) const;

  const SqlSchema& schema() const { return *schema_; }
  const AliasPattern& alias_pattern() const { return alias_; }

 private:
  std::optional<Rejection> complete_pending(LexState& state, std::size_t offset) const;
  std::optional<Rejection> start_item(LexState& state, char c, std::size_t offset) const;
  void emit(LexState& state, LexKind kind, std::string text, std::size_t begin, std::size_t end) const;

  const SqlSchema* schema_;
  AliasPattern alias_;
};

LexOutcome lex_feed(const LexState& state, const SqlSchema& schema, std::string_view chunk);
LexOutcome lex_finalize(const LexState& state, const SqlSchema& schema);

}  // namespace sqlgate
