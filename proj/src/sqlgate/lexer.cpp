#include "sqlgate/lexer.hpp"

#include <algorithm>

namespace sqlgate {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

Rejection reject(Reason reason, std::size_t offset, std::string detail) {
  return Rejection{reason, offset, std::move(detail)};
}

}  // namespace

std::string_view lex_kind_name(LexKind kind) {
  switch (kind) {
    case LexKind::Keyword: return "keyword";
    case LexKind::Punctuation: return "punctuation";
    case LexKind::Operator: return "operator";
    case LexKind::NumberLiteral: return "number";
    case LexKind::StringLiteral: return "string";
    case LexKind::Identifier: return "identifier";
    case LexKind::QualifiedIdentifier: return "qualified-identifier";
    case LexKind::Star: return "star";
  }
  return "?";
}

Lexer::Lexer(const SqlSchema& schema, AliasPattern alias) : schema_(&schema), alias_(std::move(alias)) {}

bool Lexer::is_complete_word(std::string_view word) const {
  return keyword_from_text(word).has_value() || schema_->is_name(word) || alias_.matches(word);
}

Reason Lexer::word_reason(std::string_view word) const {
  std::size_t name_len = schema_->longest_name_prefix(word);
  std::size_t alias_len = 0;
  while (alias_len < word.size() && alias_.admits_prefix(word.substr(0, alias_len + 1))) ++alias_len;
  return longest_keyword_prefix(word) > std::max(name_len, alias_len) ? Reason::UnknownKeyword
                                                                        : Reason::InvalidIdentifier;
}

bool Lexer::pending_admissible(PendingKind kind, std::string_view pending) const {
  switch (kind) {
    case PendingKind::None:
    case PendingKind::Number:
    case PendingKind::String:
    case PendingKind::Operator:
      return true;
    case PendingKind::Word: {
      auto dot = pending.find('.');
      if (dot == std::string_view::npos) {
        return is_keyword_prefix(pending) || schema_->is_identifier_prefix(pending) ||
               alias_.admits_prefix(pending);
      }
      std::string_view qualifier = pending.substr(0, dot);
      std::string_view column = pending.substr(dot + 1);
      if (!schema_->find_table(qualifier) && !alias_.matches(qualifier)) return false;
      return column.empty() || schema_->is_column_prefix(column) || alias_.admits_prefix(column);
    }
  }
  return false;
}

void Lexer::emit(LexState& state, LexKind kind, std::string text, std::size_t begin,
                 std::size_t end) const {
  state.items.push_back(LexItem{kind, std::move(text), begin, end});
}

// Closes the pending fragment at `offset` (exclusive end). Fails when the
// fragment does not form a complete item.
std::optional<Rejection> Lexer::complete_pending(LexState& state, std::size_t offset) const {
  const std::string& p = state.pending;
  const std::size_t begin = state.pending_begin;
  switch (state.pending_kind) {
    case PendingKind::None:
      return std::nullopt;
    case PendingKind::Word: {
      auto dot = p.find('.');
      if (dot == std::string::npos) {
        if (keyword_from_text(p)) {
          emit(state, LexKind::Keyword, p, begin, offset);
        } else if (schema_->is_name(p) || alias_.matches(p)) {
          emit(state, LexKind::Identifier, p, begin, offset);
        } else {
          return reject(word_reason(p), offset, "'" + p + "' is neither a keyword nor a schema name");
        }
      } else {
        std::string_view column = std::string_view(p).substr(dot + 1);
        if (column != "*" && (column.empty() || (!schema_->has_column(column) && !alias_.matches(column)))) {
          return reject(Reason::InvalidIdentifier, offset, "'" + p + "' does not name a column");
        }
        emit(state, LexKind::QualifiedIdentifier, p, begin, offset);
      }
      break;
    }
    case PendingKind::Number:
      if (p.back() == '.') return reject(Reason::MalformedNumber, offset, "number needs fraction digits");
      emit(state, LexKind::NumberLiteral, p, begin, offset);
      break;
    case PendingKind::String:
      if (!state.quote_open) {
        return reject(Reason::UnterminatedConstruct, offset, "string literal is not terminated");
      }
      emit(state, LexKind::StringLiteral, p, begin, offset);
      break;
    case PendingKind::Operator:
      if (p == "!") return reject(Reason::IllegalCharacter, offset, "'!' must be followed by '='");
      emit(state, LexKind::Operator, p, begin, offset);
      break;
  }
  state.pending_kind = PendingKind::None;
  state.pending.clear();
  state.quote_open = false;
  return std::nullopt;
}

std::optional<Rejection> Lexer::start_item(LexState& state, char c, std::size_t offset) const {
  const char fc = fold_ascii(c);
  if (is_space(c)) return std::nullopt;
  auto open = [&](PendingKind kind, char first) {
    state.pending_kind = kind;
    state.pending_begin = offset;
    state.pending.assign(1, first);
    state.quote_open = false;
  };
  if (is_ident_start(fc)) {
    open(PendingKind::Word, fc);
    if (!pending_admissible(PendingKind::Word, state.pending)) {
      return reject(word_reason(state.pending), offset, "no keyword or name starts with '" + state.pending + "'");
    }
    return std::nullopt;
  }
  if (is_digit(c)) {
    open(PendingKind::Number, c);
    return std::nullopt;
  }
  switch (c) {
    case '\'':
      open(PendingKind::String, c);
      return std::nullopt;
    case '<':
    case '>':
    case '!':
      open(PendingKind::Operator, c);
      return std::nullopt;
    case '=':
    case '+':
    case '-':
    case '/':
      emit(state, LexKind::Operator, std::string(1, c), offset, offset + 1);
      return std::nullopt;
    case '*':
      emit(state, LexKind::Star, "*", offset, offset + 1);
      return std::nullopt;
    case '(':
    case ')':
    case ',':
    case ';':
    case '.':
      emit(state, LexKind::Punctuation, std::string(1, c), offset, offset + 1);
      return std::nullopt;
    default:
      return reject(Reason::IllegalCharacter, offset, "illegal character");
  }
}

std::optional<Rejection> Lexer::step(LexState& state, char c) const {
  const std::size_t offset = state.text.size();
  state.text.push_back(c);
  const char fc = fold_ascii(c);
  std::string& p = state.pending;

  switch (state.pending_kind) {
    case PendingKind::None:
      break;
    case PendingKind::String:
      if (state.quote_open) {
        if (c == '\'') {
          p.push_back(c);
          state.quote_open = false;
          return std::nullopt;
        }
        if (auto r = complete_pending(state, offset)) return r;
        break;
      }
      p.push_back(c);
      if (c == '\'' && p.size() > 1) state.quote_open = true;
      return std::nullopt;
    case PendingKind::Operator:
      if ((p == "<" && (c == '=' || c == '>')) || (p == ">" && c == '=') || (p == "!" && c == '=')) {
        p.push_back(c);
        return complete_pending(state, offset + 1);
      }
      if (p == "!") return reject(Reason::IllegalCharacter, offset, "'!' must be followed by '='");
      if (auto r = complete_pending(state, offset)) return r;
      break;
    case PendingKind::Number: {
      const bool has_dot = p.find('.') != std::string::npos;
      if (is_digit(c)) {
        p.push_back(c);
        return std::nullopt;
      }
      if (p.back() == '.') return reject(Reason::MalformedNumber, offset, "number needs fraction digits");
      if (c == '.' && !has_dot) {
        p.push_back(c);
        return std::nullopt;
      }
      if (c == '.' || is_ident_char(fc)) {
        return reject(Reason::MalformedNumber, offset, "malformed number literal");
      }
      if (auto r = complete_pending(state, offset)) return r;
      break;
    }
    case PendingKind::Word: {
      auto dot = p.find('.');
      if (dot == std::string::npos) {
        if (is_ident_char(fc)) {
          p.push_back(fc);
          if (!pending_admissible(PendingKind::Word, p)) {
            return reject(word_reason(p), offset, "no keyword or name starts with '" + p + "'");
          }
          return std::nullopt;
        }
        if (c == '.') {
          if (!schema_->find_table(p) && !alias_.matches(p)) {
            return reject(Reason::InvalidIdentifier, offset, "'" + p + "' cannot qualify a column");
          }
          p.push_back('.');
          return std::nullopt;
        }
        if (auto r = complete_pending(state, offset)) return r;
        break;
      }
      const std::size_t column_len = p.size() - dot - 1;
      if (column_len == 0 && c == '*') {
        p.push_back('*');
        return complete_pending(state, offset + 1);
      }
      if (is_ident_char(fc) && (column_len > 0 || is_ident_start(fc))) {
        p.push_back(fc);
        if (!pending_admissible(PendingKind::Word, p)) {
          return reject(Reason::InvalidIdentifier, offset, "no column starts with '" + p.substr(dot + 1) + "'");
        }
        return std::nullopt;
      }
      if (column_len == 0 || c == '.') {
        return reject(Reason::InvalidIdentifier, offset, "malformed qualified name");
      }
      if (auto r = complete_pending(state, offset)) return r;
      break;
    }
  }
  return start_item(state, c, offset);
}

std::optional<Rejection> Lexer::finish(LexState& state) const {
  const std::size_t end = state.text.size();
  if (state.pending_kind == PendingKind::None) return std::nullopt;
  const bool complete = [&] {
    const std::string& p = state.pending;
    switch (state.pending_kind) {
      case PendingKind::Word: {
        auto dot = p.find('.');
        if (dot == std::string::npos) return is_complete_word(p);
        std::string_view column = std::string_view(p).substr(dot + 1);
        return !column.empty() && (schema_->has_column(column) || alias_.matches(column));
      }
      case PendingKind::Number:
        return p.back() != '.';
      case PendingKind::String:
        return state.quote_open;
      case PendingKind::Operator:
        return p != "!";
      case PendingKind::None:
        return true;
    }
    return false;
  }();
  if (!complete) {
    return reject(Reason::IncompleteItem, end, "'" + state.pending + "' is not a complete item");
  }
  return complete_pending(state, end);
}

LexOutcome Lexer::feed(const LexState& state, std::string_view chunk) const {
  LexState next = state;
  for (char c : chunk) {
    if (auto r = step(next, c)) return *r;
  }
  return next;
}

LexOutcome Lexer::finalize(const LexState& state) const {
  LexState next = state;
  if (auto r = finish(next)) return *r;
  return next;
}

LexOutcome lex_feed(const LexState& state, const SqlSchema& schema, std::string_view chunk) {
  return Lexer(schema).feed(state, chunk);
}

LexOutcome lex_finalize(const LexState& state, const SqlSchema& schema) {
  return Lexer(schema).finalize(state);
}

}  // namespace sqlgate
