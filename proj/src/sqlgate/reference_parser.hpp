#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "sqlgate/ast.hpp"
#include "sqlgate/lexer.hpp"
#include "sqlgate/parser.hpp"

namespace sqlgate {

struct ReferenceResult {
  std::optional<SqlAst> ast;
  std::optional<Rejection> rejection;

  bool accepted() const { return ast.has_value(); }
};

// Whole-input recursive-descent parser over lexical items. Builds the tree,
// and with `check_semantics` applies the schema rules (and the guard rules
// when ctx.guards()). `lex_error`, if given, stands right after the last item:
// it is reported only if parsing gets that far without failing.
ReferenceResult reference_parse(const ParserContext& ctx, const std::vector<LexItem>& items,
                                bool check_semantics, std::optional<Rejection> lex_error = std::nullopt,
                                std::optional<std::size_t> end_offset = std::nullopt);

// Lexes and parses a complete text with full checking.
ReferenceResult reference_check(const ParserContext& ctx, std::string_view text);

}  // namespace sqlgate
