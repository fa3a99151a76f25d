#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sqlgate/lexer.hpp"
#include "sqlgate/scope.hpp"
#include "sqlgate/sql_words.hpp"

namespace sqlgate {

enum class Sym : std::uint8_t {
  LParen, RParen, Comma, Dot, Semi, Eq, Ne, LtGt, Lt, Le, Gt, Ge, Plus, Minus, Slash,
};

std::optional<Sym> sym_from_text(std::string_view text);
std::string_view sym_text(Sym sym);
bool is_comparison(Sym sym);

enum class TokKind : std::uint8_t { Keyword, Ident, Qualified, Star, Number, String, Symbol, End };

// Grammar-level view of a lexical item.
struct Token {
  TokKind kind = TokKind::End;
  Keyword kw = Keyword::Select;
  Sym sym = Sym::Comma;
  std::string text;       // identifier, literal or surface text
  std::string qualifier;  // Qualified
  std::string column;     // Qualified, ColumnSel::Named
  ColumnSel sel = ColumnSel::Named;
  bool integer = false;   // Number
  std::size_t offset = 0;

  bool is(Keyword k) const { return kind == TokKind::Keyword && kw == k; }
  bool is(Sym s) const { return kind == TokKind::Symbol && sym == s; }
};

Token token_from_item(const LexItem& item);
Token end_token(std::size_t offset);

}  // namespace sqlgate
