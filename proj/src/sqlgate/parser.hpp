#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sqlgate/ast.hpp"
#include "sqlgate/guards.hpp"
#include "sqlgate/lexer.hpp"
#include "sqlgate/reason.hpp"
#include "sqlgate/schema.hpp"
#include "sqlgate/scope.hpp"
#include "sqlgate/token.hpp"

namespace sqlgate {

struct ParserOptions {
  bool guards = false;
  AliasPattern alias;
};

// Everything a parse step needs besides the state itself.
class ParserContext {
 public:
  ParserContext(const SqlSchema& schema, ParserOptions options);

  const SqlSchema& schema() const { return *schema_; }
  const Lexer& lexer() const { return lexer_; }
  const AliasPattern& alias() const { return options_.alias; }
  bool guards() const { return options_.guards; }

 private:
  const SqlSchema* schema_;
  ParserOptions options_;
  Lexer lexer_;
};

enum class ScopePhase : std::uint8_t { SelectList, From, AfterFrom };

// One output column of a select list, resolved when the scope closes.
struct ExportItem {
  enum class Kind : std::uint8_t { Name, Star, QualifiedStar };
  Kind kind = Kind::Name;
  std::string name;
};

// alias.cid seen before `alias` was bound in the current scope.
struct AliasRecord {
  std::string alias;
  std::string column;
  ColumnSel sel = ColumnSel::Named;
};

struct ScopeState {
  ScopePhase phase = ScopePhase::SelectList;
  std::vector<FromTarget> targets;
  std::vector<AliasRecord> recorded;
  GuardLedger ledger;
  std::vector<ExportItem> exports;
  std::optional<FromTarget> pending_target;
  bool capture_armed = false;
  std::shared_ptr<const ColumnList> captured;
  // Select-item bookkeeping for export names.
  std::uint32_t tokens = 0;
  std::uint32_t item_start = 0;
  std::uint32_t item_body_end = std::numeric_limits<std::uint32_t>::max();
  std::optional<ExportItem> item_first;
  std::optional<std::string> item_alias;
};

// Table-driven predictive parser over grammar tokens. The whole continuation
// is an explicit frame stack plus the scope stack, so the machine is a plain
// value: copying it forks the parse.
class ParseMachine {
 public:
  ParseMachine();

  // Consumes one token (TokKind::End for end of input).
  std::optional<Rejection> step(const ParserContext& ctx, const Token& tok);

  bool complete() const { return complete_; }
  std::size_t depth() const { return frames_.size(); }
  const std::vector<ScopeState>& scopes() const { return scopes_; }

  // Alias-pattern names mentioned anywhere in the live scopes.
  std::vector<std::string> alias_names(const AliasPattern& pattern) const;

  enum class G : std::uint8_t;
  struct Frame {
    G g;
    std::uint8_t arg = 0;
  };

 private:
  std::optional<Rejection> column_ref(const ParserContext& ctx, const Token& tok);
  std::optional<Rejection> bind_pending(const ParserContext& ctx, const Token& tok,
                                        std::optional<std::string> alias);
  std::optional<Rejection> end_from(const ParserContext& ctx, const Token& tok);
  std::optional<Rejection> end_scope(const ParserContext& ctx, const Token& tok);
  std::optional<Rejection> consume();

  std::vector<Frame> frames_;
  std::vector<ScopeState> scopes_;
  bool complete_ = false;
};

// Resumable validator state for one text prefix: lexer state plus parser
// continuation. Feeding returns a new value; the empty chunk is the identity.
struct ParseState {
  LexState lex;
  ParseMachine machine;
};

class ParseOutcome {
 public:
  ParseOutcome(ParseState state) : value_(std::move(state)) {}
  ParseOutcome(SqlAst ast) : value_(std::move(ast)) {}
  ParseOutcome(Rejection rejection) : value_(std::move(rejection)) {}

  bool accepted() const { return std::holds_alternative<ParseState>(value_); }
  bool completed() const { return std::holds_alternative<SqlAst>(value_); }
  bool rejected() const { return std::holds_alternative<Rejection>(value_); }

  const ParseState& state() const { return std::get<ParseState>(value_); }
  const SqlAst& ast() const { return std::get<SqlAst>(value_); }
  const Rejection& rejection() const { return std::get<Rejection>(value_); }

 private:
  std::variant<ParseState, SqlAst, Rejection> value_;
};

// Incremental SQL parser with schema composition rules; with
// options.guards it also runs the deferred guard analyses.
class SqlParser {
 public:
  SqlParser(const SqlSchema& schema, ParserOptions options = {});

  ParseState initial() const { return ParseState{}; }
  ParseOutcome feed(const ParseState& state, std::string_view chunk) const;
  ParseOutcome finalize(const ParseState& state) const;
  // finalize(feed(initial(), text)).
  ParseOutcome parse_full(std::string_view text) const;

  const ParserContext& context() const { return ctx_; }

 private:
  std::optional<Rejection> check_pending(const ParseMachine& machine, const LexState& lex) const;
  std::size_t earliest_failure(const ParseMachine& machine, std::string_view raw, std::size_t begin,
                               std::size_t fallback) const;

  ParserContext ctx_;
};

// Parsing without guards.
ParseOutcome parse_feed(const ParseState& state, const SqlSchema& schema, std::string_view chunk);
ParseOutcome parse_finalize(const ParseState& state, const SqlSchema& schema);
ParseOutcome parse_full(const SqlSchema& schema, std::string_view text);

// Parsing with guards.
ParseOutcome check_with_guards(const ParseState& state, const SqlSchema& schema, std::string_view chunk);
ParseOutcome finalize_with_guards(const ParseState& state, const SqlSchema& schema);

}  // namespace sqlgate
