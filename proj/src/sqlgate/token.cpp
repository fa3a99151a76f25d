#include "sqlgate/token.hpp"

#include <array>
#include <utility>

namespace sqlgate {
namespace {

constexpr std::array<std::pair<Sym, std::string_view>, 15> kSyms = {{
    {Sym::LParen, "("}, {Sym::RParen, ")"}, {Sym::Comma, ","}, {Sym::Dot, "."},
    {Sym::Semi, ";"},   {Sym::Eq, "="},     {Sym::Ne, "!="},   {Sym::LtGt, "<>"},
    {Sym::Lt, "<"},     {Sym::Le, "<="},    {Sym::Gt, ">"},    {Sym::Ge, ">="},
    {Sym::Plus, "+"},   {Sym::Minus, "-"},  {Sym::Slash, "/"},
}};

}  // namespace

std::optional<Sym> sym_from_text(std::string_view text) {
  for (const auto& [sym, t] : kSyms) {
    if (t == text) return sym;
  }
  return std::nullopt;
}

std::string_view sym_text(Sym sym) {
  for (const auto& [s, t] : kSyms) {
    if (s == sym) return t;
  }
  return "?";
}

bool is_comparison(Sym sym) {
  switch (sym) {
    case Sym::Eq:
    case Sym::Ne:
    case Sym::LtGt:
    case Sym::Lt:
    case Sym::Le:
    case Sym::Gt:
    case Sym::Ge:
      return true;
    default:
      return false;
  }
}

Token token_from_item(const LexItem& item) {
  Token tok;
  tok.offset = item.begin;
  tok.text = item.text;
  switch (item.kind) {
    case LexKind::Keyword:
      tok.kind = TokKind::Keyword;
      tok.kw = *keyword_from_text(item.text);
      break;
    case LexKind::Identifier:
      tok.kind = TokKind::Ident;
      break;
    case LexKind::QualifiedIdentifier: {
      tok.kind = TokKind::Qualified;
      auto dot = item.text.find('.');
      tok.qualifier = item.text.substr(0, dot);
      tok.column = item.text.substr(dot + 1);
      if (tok.column == "*") {
        tok.sel = ColumnSel::Star;
        tok.column.clear();
      }
      break;
    }
    case LexKind::Star:
      tok.kind = TokKind::Star;
      break;
    case LexKind::NumberLiteral:
      tok.kind = TokKind::Number;
      tok.integer = item.text.find('.') == std::string::npos;
      break;
    case LexKind::StringLiteral:
      tok.kind = TokKind::String;
      break;
    case LexKind::Operator:
    case LexKind::Punctuation:
      tok.kind = TokKind::Symbol;
      tok.sym = *sym_from_text(item.text);
      break;
  }
  return tok;
}

Token end_token(std::size_t offset) {
  Token tok;
  tok.kind = TokKind::End;
  tok.offset = offset;
  return tok;
}

}  // namespace sqlgate
