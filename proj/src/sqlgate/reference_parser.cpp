#include "sqlgate/reference_parser.hpp"

#include <algorithm>
#include <memory>

#include "sqlgate/token.hpp"

namespace sqlgate {
namespace {

Expr node(ExprKind kind, std::string text = {}) {
  Expr e;
  e.kind = kind;
  e.text = std::move(text);
  return e;
}

struct Failure {
  Rejection rejection;
};

// A binding of the from clause as seen by the reference parser.
struct Binding {
  std::optional<std::string> alias;
  std::string table;
  std::vector<std::string> columns;
};

struct PendingCheck {
  ColumnRef ref;
  std::size_t offset;
};

struct RefScope {
  bool from_done = false;
  std::vector<Binding> bindings;
  std::vector<std::pair<std::string, std::string>> unbound_alias_refs;
  std::vector<PendingCheck> deferred;
};

class RefParser {
 public:
  RefParser(const ParserContext& ctx, std::vector<Token> tokens, bool semantics,
            std::optional<Rejection> lex_error)
      : ctx_(ctx), toks_(std::move(tokens)), semantics_(semantics), lex_error_(std::move(lex_error)) {}

  SqlAst run() {
    std::vector<std::string> ignored;
    SqlAst ast = query(ignored);
    if (at(Sym::Semi)) advance();
    const Token& t = peek();
    if (t.kind != TokKind::End) fail_syntax(t);
    return ast;
  }

 private:
  // ---- token access

  const Token& peek() {
    if (pos_ == toks_.size() - 1 && lex_error_) throw Failure{*lex_error_};
    return toks_[pos_];
  }
  bool at(Keyword k) { return peek().is(k); }
  bool at(Sym s) { return peek().is(s); }
  const Token& advance() {
    const Token& t = peek();
    ++pos_;
    return t;
  }
  [[noreturn]] void fail(Reason reason, std::size_t offset, std::string detail) {
    throw Failure{Rejection{reason, offset, std::move(detail)}};
  }
  [[noreturn]] void fail_syntax(const Token& t) {
    if (t.kind == TokKind::End) fail(Reason::IncompleteQuery, t.offset, "query is incomplete");
    fail(Reason::Syntax, t.offset, "unexpected token");
  }
  void expect(Keyword k) {
    if (!at(k)) fail_syntax(peek());
    advance();
  }
  void expect(Sym s) {
    if (!at(s)) fail_syntax(peek());
    advance();
  }

  // ---- semantic rules

  bool checking() const { return semantics_; }
  bool guarding() const { return semantics_ && ctx_.guards(); }

  static const Binding* bound(const RefScope& scope, const std::string& alias) {
    for (const Binding& b : scope.bindings) {
      if (b.alias == alias) return &b;
    }
    return nullptr;
  }

  static bool provides(const Binding& b, const std::string& column, ColumnSel sel) {
    if (sel == ColumnSel::Star) return true;
    return std::find(b.columns.begin(), b.columns.end(), column) != b.columns.end();
  }

  static bool guard_holds(const RefScope& scope, const ColumnRef& ref) {
    switch (ref.form) {
      case ColumnRef::Form::Table:
        return std::any_of(scope.bindings.begin(), scope.bindings.end(),
                           [&](const Binding& b) { return b.table == ref.qualifier; });
      case ColumnRef::Form::Alias: {
        const Binding* b = bound(scope, ref.qualifier);
        return b != nullptr && provides(*b, ref.column, ref.sel);
      }
      case ColumnRef::Form::Bare: {
        std::size_t n = 0;
        for (const Binding& b : scope.bindings) {
          n += static_cast<std::size_t>(std::count(b.columns.begin(), b.columns.end(), ref.column));
        }
        return n == 1;
      }
    }
    return false;
  }

  void reference(const Token& t) {
    if (!checking()) return;
    RefScope& scope = scopes_.back();
    ColumnRef ref;
    ref.offset = t.offset;
    if (t.kind == TokKind::Ident) {
      ref.column = t.text;
      if (!ctx_.schema().has_column(t.text) && !ctx_.alias().matches(t.text)) {
        fail(Reason::ColumnNotInTable, t.offset, "unknown column");
      }
    } else {
      ref.qualifier = t.qualifier;
      ref.column = t.column;
      ref.sel = t.sel;
      if (ctx_.alias().matches(t.qualifier)) {
        ref.form = ColumnRef::Form::Alias;
        if (const Binding* b = bound(scope, t.qualifier)) {
          if (!provides(*b, t.column, t.sel)) fail(Reason::AliasColumnMismatch, t.offset, "alias column");
        } else if (t.sel == ColumnSel::Named) {
          scope.unbound_alias_refs.emplace_back(t.qualifier, t.column);
        }
      } else {
        ref.form = ColumnRef::Form::Table;
        const Table* table = ctx_.schema().find_table(t.qualifier);
        if (!table) fail(Reason::UnknownTable, t.offset, "unknown table");
        if (t.sel == ColumnSel::Named && !ctx_.schema().table_has_column(t.qualifier, t.column)) {
          fail(Reason::ColumnNotInTable, t.offset, "column not in table");
        }
      }
    }
    if (!guarding()) return;
    if (scope.from_done) {
      if (!guard_holds(scope, ref)) fail(Reason::GuardViolation, t.offset, "guard");
    } else {
      scope.deferred.push_back(PendingCheck{ref, t.offset});
    }
  }

  void bind(Binding b, const Token& at_token) {
    if (!checking()) return;
    RefScope& scope = scopes_.back();
    if (b.alias) {
      const std::string& a = *b.alias;
      if (bound(scope, a)) fail(Reason::DuplicateAlias, at_token.offset, "duplicate alias");
      for (const auto& [alias, column] : scope.unbound_alias_refs) {
        if (alias == a && !provides(b, column, ColumnSel::Named)) {
          fail(Reason::AliasColumnMismatch, at_token.offset, "alias column");
        }
      }
      auto& refs = scope.unbound_alias_refs;
      refs.erase(std::remove_if(refs.begin(), refs.end(), [&](const auto& r) { return r.first == a; }),
                 refs.end());
    }
    scope.bindings.push_back(std::move(b));
  }

  void close_from(const Token& next) {
    if (!checking()) return;
    RefScope& scope = scopes_.back();
    scope.from_done = true;
    if (!guarding()) return;
    for (const PendingCheck& c : scope.deferred) {
      if (!guard_holds(scope, c.ref)) fail(Reason::GuardViolation, next.offset, "guard");
    }
    scope.deferred.clear();
  }

  // ---- grammar

  SqlAst query(std::vector<std::string>& exports) {
    SqlAst q;
    q.operands.push_back(operand(exports));
    while (at(Keyword::Union) || at(Keyword::Intersect) || at(Keyword::Except)) {
      q.set_ops.emplace_back(keyword_text(advance().kw));
      std::vector<std::string> ignored;
      q.operands.push_back(operand(ignored));
    }
    return q;
  }

  std::variant<SelectCore, QueryPtr> operand(std::vector<std::string>& exports) {
    if (at(Keyword::Select)) return select_core(exports);
    if (at(Sym::LParen)) {
      advance();
      auto inner = std::make_shared<Query>(query(exports));
      expect(Sym::RParen);
      return QueryPtr(std::move(inner));
    }
    fail_syntax(peek());
  }

  struct ItemShape {
    std::size_t first = 0;
    std::size_t body_len = 0;
    std::optional<std::string> alias;
  };

  SelectCore select_core(std::vector<std::string>& exports) {
    expect(Keyword::Select);
    scopes_.emplace_back();
    SelectCore core;
    if (at(Keyword::Distinct)) {
      advance();
      core.distinct = true;
    }
    std::vector<ItemShape> shapes;
    for (;;) {
      ItemShape shape;
      shape.first = pos_;
      core.items.push_back(select_item());
      shape.body_len = pos_ - shape.first;
      if (core.items.back().alias) {
        shape.alias = core.items.back().alias;
        shape.body_len -= 2;
      }
      shapes.push_back(shape);
      if (!at(Sym::Comma)) break;
      advance();
    }
    expect(Keyword::From);
    core.from.push_back(table_ref(""));
    for (;;) {
      if (at(Sym::Comma)) {
        advance();
        core.from.push_back(table_ref(","));
      } else if (at(Keyword::Join)) {
        advance();
        core.from.push_back(table_ref("join"));
        if (at(Keyword::On)) {
          advance();
          core.from.back().on = expr();
        }
      } else {
        break;
      }
    }
    close_from(peek());
    if (at(Keyword::Where)) {
      advance();
      core.where = expr();
    }
    if (at(Keyword::Group)) {
      advance();
      expect(Keyword::By);
      for (;;) {
        const Token& t = peek();
        if (t.kind != TokKind::Ident && !(t.kind == TokKind::Qualified && t.sel != ColumnSel::Star)) {
          fail_syntax(t);
        }
        reference(t);
        core.group_by.push_back(column_expr(advance()));
        if (!at(Sym::Comma)) break;
        advance();
      }
    }
    if (at(Keyword::Having)) {
      advance();
      core.having = expr();
    }
    if (at(Keyword::Order)) {
      advance();
      expect(Keyword::By);
      for (;;) {
        OrderItem item{expr(), ""};
        if (at(Keyword::Asc) || at(Keyword::Desc)) item.direction = std::string(keyword_text(advance().kw));
        core.order_by.push_back(std::move(item));
        if (!at(Sym::Comma)) break;
        advance();
      }
    }
    if (at(Keyword::Limit)) {
      advance();
      const Token& t = peek();
      if (t.kind != TokKind::Number || !t.integer) fail_syntax(t);
      core.limit = advance().text;
    }
    peek();  // the scope closes when the following token is seen
    exports = scope_exports(shapes);
    scopes_.pop_back();
    return core;
  }

  std::vector<std::string> scope_exports(const std::vector<ItemShape>& shapes) const {
    std::vector<std::string> out;
    if (!checking()) return out;
    const RefScope& scope = scopes_.back();
    auto append = [&](const Binding& b) { out.insert(out.end(), b.columns.begin(), b.columns.end()); };
    for (const ItemShape& s : shapes) {
      if (s.alias) {
        out.push_back(*s.alias);
        continue;
      }
      if (s.body_len != 1) continue;
      const Token& t = toks_[s.first];
      if (t.kind == TokKind::Star) {
        for (const Binding& b : scope.bindings) append(b);
      } else if (t.kind == TokKind::Ident) {
        out.push_back(t.text);
      } else if (t.kind == TokKind::Qualified && t.sel == ColumnSel::Named) {
        out.push_back(t.column);
      } else if (t.kind == TokKind::Qualified && t.sel == ColumnSel::Star) {
        const Binding* b = bound(scope, t.qualifier);
        if (!b) {
          for (const Binding& x : scope.bindings) {
            if (x.table == t.qualifier && !x.alias) {
              b = &x;
              break;
            }
          }
        }
        if (b) append(*b);
      }
    }
    return out;
  }

  SelectItem select_item() {
    const Token& t = peek();
    if (t.kind == TokKind::Star) {
      advance();
      return SelectItem{node(ExprKind::Star), std::nullopt};
    }
    if (t.kind == TokKind::Qualified && t.sel == ColumnSel::Star) {
      reference(t);
      Expr e = node(ExprKind::Star);
      e.qualifier = advance().qualifier;
      return SelectItem{std::move(e), std::nullopt};
    }
    SelectItem item{expr(), std::nullopt};
    if (at(Keyword::As)) {
      advance();
      const Token& name = peek();
      if (name.kind != TokKind::Ident) fail_syntax(name);
      item.alias = advance().text;
    }
    return item;
  }

  FromItem table_ref(const std::string& join) {
    FromItem item;
    item.join = join;
    const Token& t = peek();
    Binding binding;
    if (t.kind == TokKind::Ident) {
      const Table* table = ctx_.schema().find_table(t.text);
      if (checking() && !table) fail(Reason::UnknownTable, t.offset, "unknown table");
      item.table = advance().text;
      binding.table = item.table;
      if (table) binding.columns = table->columns;
    } else if (t.is(Sym::LParen)) {
      advance();
      item.subquery = std::make_shared<Query>(query(binding.columns));
      expect(Sym::RParen);
    } else {
      fail_syntax(t);
    }
    if (at(Keyword::As)) {
      advance();
      const Token& name = peek();
      if (name.kind != TokKind::Ident || !ctx_.alias().matches(name.text)) fail_syntax(name);
      item.alias = name.text;
      binding.alias = name.text;
      bind(std::move(binding), name);
      advance();
    } else {
      bind(std::move(binding), peek());
    }
    return item;
  }

  static Expr binary(std::string op, Expr lhs, Expr rhs) {
    Expr e = node(ExprKind::Binary, std::move(op));
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  Expr expr() {
    Expr lhs = conjunction();
    while (at(Keyword::Or)) {
      advance();
      lhs = binary("or", std::move(lhs), conjunction());
    }
    return lhs;
  }

  Expr conjunction() {
    Expr lhs = negation();
    while (at(Keyword::And)) {
      advance();
      lhs = binary("and", std::move(lhs), negation());
    }
    return lhs;
  }

  Expr negation() {
    if (at(Keyword::Not)) {
      advance();
      Expr e = node(ExprKind::Not);
      e.args.push_back(negation());
      return e;
    }
    return predicate();
  }

  Expr predicate() {
    Expr lhs = additive();
    const Token& t = peek();
    if (t.kind == TokKind::Symbol && is_comparison(t.sym)) {
      std::string op(sym_text(advance().sym));
      return binary(std::move(op), std::move(lhs), additive());
    }
    if (t.is(Keyword::Is)) {
      advance();
      Expr e = node(ExprKind::IsNull);
      if (at(Keyword::Not)) {
        advance();
        e.negated = true;
      }
      expect(Keyword::Null);
      e.args.push_back(std::move(lhs));
      return e;
    }
    bool negated = false;
    if (t.is(Keyword::Not)) {
      advance();
      negated = true;
    } else if (!t.is(Keyword::In) && !t.is(Keyword::Like) && !t.is(Keyword::Between)) {
      return lhs;
    }
    Expr e;
    e.negated = negated;
    e.args.push_back(std::move(lhs));
    if (at(Keyword::In)) {
      advance();
      e.kind = ExprKind::In;
      expect(Sym::LParen);
      if (at(Keyword::Select)) {
        std::vector<std::string> ignored;
        e.query = std::make_shared<Query>(query(ignored));
      } else {
        e.args.push_back(expr());
        while (at(Sym::Comma)) {
          advance();
          e.args.push_back(expr());
        }
      }
      expect(Sym::RParen);
    } else if (at(Keyword::Like)) {
      advance();
      e.kind = ExprKind::Like;
      e.args.push_back(additive());
    } else if (at(Keyword::Between)) {
      advance();
      e.kind = ExprKind::Between;
      e.args.push_back(additive());
      expect(Keyword::And);
      e.args.push_back(additive());
    } else {
      fail_syntax(peek());
    }
    return e;
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (at(Sym::Plus) || at(Sym::Minus)) {
      std::string op(sym_text(advance().sym));
      lhs = binary(std::move(op), std::move(lhs), multiplicative());
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    for (;;) {
      const Token& t = peek();
      if (t.kind == TokKind::Star) {
        advance();
        lhs = binary("*", std::move(lhs), unary());
      } else if (t.is(Sym::Slash)) {
        advance();
        lhs = binary("/", std::move(lhs), unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (at(Sym::Minus)) {
      advance();
      Expr e = node(ExprKind::Unary, "-");
      e.args.push_back(unary());
      return e;
    }
    return primary();
  }

  static Expr column_expr(const Token& t) {
    Expr e = node(ExprKind::Column);
    if (t.kind == TokKind::Ident) {
      e.text = t.text;
    } else {
      e.qualifier = t.qualifier;
      e.text = t.column;
    }
    return e;
  }

  Expr primary() {
    const Token& t = peek();
    if (t.kind == TokKind::Ident || (t.kind == TokKind::Qualified && t.sel != ColumnSel::Star)) {
      reference(t);
      return column_expr(advance());
    }
    if (t.kind == TokKind::Number) return node(ExprKind::Number, advance().text);
    if (t.kind == TokKind::String) return node(ExprKind::String, advance().text);
    if (t.kind == TokKind::Keyword && is_aggregate(t.kw)) {
      Expr e = node(ExprKind::Aggregate, std::string(keyword_text(advance().kw)));
      expect(Sym::LParen);
      if (peek().kind == TokKind::Star) {
        advance();
        e.args.push_back(node(ExprKind::Star));
      } else {
        if (at(Keyword::Distinct)) {
          advance();
          e.distinct = true;
        }
        e.args.push_back(expr());
      }
      expect(Sym::RParen);
      return e;
    }
    if (t.is(Keyword::Exists)) {
      advance();
      expect(Sym::LParen);
      Expr e = node(ExprKind::Exists);
      std::vector<std::string> ignored;
      e.query = std::make_shared<Query>(query(ignored));
      expect(Sym::RParen);
      return e;
    }
    if (t.is(Sym::LParen)) {
      advance();
      Expr e;
      if (at(Keyword::Select)) {
        e.kind = ExprKind::Subquery;
        std::vector<std::string> ignored;
        e.query = std::make_shared<Query>(query(ignored));
      } else {
        e = expr();
      }
      expect(Sym::RParen);
      return e;
    }
    fail_syntax(t);
  }

  const ParserContext& ctx_;
  std::vector<Token> toks_;
  bool semantics_;
  std::optional<Rejection> lex_error_;
  std::size_t pos_ = 0;
  std::vector<RefScope> scopes_;
};

}  // namespace

ReferenceResult reference_parse(const ParserContext& ctx, const std::vector<LexItem>& items,
                                bool check_semantics, std::optional<Rejection> lex_error,
                                std::optional<std::size_t> end_offset) {
  std::vector<Token> tokens;
  tokens.reserve(items.size() + 1);
  for (const LexItem& item : items) tokens.push_back(token_from_item(item));
  tokens.push_back(end_token(end_offset ? *end_offset : (items.empty() ? 0 : items.back().end)));
  RefParser parser(ctx, std::move(tokens), check_semantics, std::move(lex_error));
  try {
    return ReferenceResult{parser.run(), std::nullopt};
  } catch (const Failure& f) {
    return ReferenceResult{std::nullopt, f.rejection};
  }
}

ReferenceResult reference_check(const ParserContext& ctx, std::string_view text) {
  LexState lex;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const std::size_t before = lex.items.size();
    if (auto r = ctx.lexer().step(lex, text[i])) {
      lex.items.resize(before);
      return reference_parse(ctx, lex.items, true, *r);
    }
  }
  if (auto r = ctx.lexer().finish(lex)) return reference_parse(ctx, lex.items, true, *r);
  return reference_parse(ctx, lex.items, true, std::nullopt, text.size());
}

}  // namespace sqlgate
