#include "sqlgate/parser.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "sqlgate/reference_parser.hpp"

namespace sqlgate {

enum class ParseMachine::G : std::uint8_t {
  TopEnd, TopEndSemi, Query, QueryTail, Operand,
  DistinctOpt, SelectList, SelectListTail, SelectItem, SelectItemEnd, ItemAliasOpt, ItemAliasName,
  ExpectFrom, FromList, FromTail, OnOpt, TableRef, TableAliasOpt, TableAliasName, EndFrom,
  WhereOpt, GroupOpt, GroupList, GroupTail, ColRef, HavingOpt, OrderOpt, OrderList, OrderTail,
  DirOpt, LimitOpt, LimitValue, EndScope,
  Or, OrTail, And, AndTail, Not, Pred, PredTail, PredNot, IsTail, InBody, InInner, ExprListTail,
  Add, AddTail, Mul, MulTail, Unary, Primary, ParenBody, AggArg,
  ExpectKw, ExpectSym,
};

namespace {

using G = ParseMachine::G;
using Frame = ParseMachine::Frame;

Rejection reject(Reason reason, const Token& tok, std::string detail) {
  return Rejection{reason, tok.offset, std::move(detail)};
}

Rejection syntax(const Token& tok) {
  if (tok.kind == TokKind::End) return reject(Reason::IncompleteQuery, tok, "query is incomplete");
  std::string what = tok.kind == TokKind::Keyword ? std::string(keyword_text(tok.kw))
                     : tok.kind == TokKind::Symbol ? std::string(sym_text(tok.sym))
                     : tok.kind == TokKind::Star   ? std::string("*")
                                                   : tok.text;
  return reject(Reason::Syntax, tok, "unexpected '" + what + "'");
}

Frame kw_frame(Keyword kw) { return Frame{G::ExpectKw, static_cast<std::uint8_t>(kw)}; }
Frame sym_frame(Sym sym) { return Frame{G::ExpectSym, static_cast<std::uint8_t>(sym)}; }

std::shared_ptr<const ColumnList> table_exports(const Table& table) {
  // Non-owning: schemas outlive every parse state built against them.
  return std::shared_ptr<const ColumnList>(std::shared_ptr<const ColumnList>(), &table.columns);
}

}  // namespace

ParserContext::ParserContext(const SqlSchema& schema, ParserOptions options)
    : schema_(&schema), options_(std::move(options)), lexer_(schema, options_.alias) {}

ParseMachine::ParseMachine() {
  frames_.reserve(32);
  frames_.push_back(Frame{G::TopEnd});
  frames_.push_back(Frame{G::Query});
}

std::optional<Rejection> ParseMachine::consume() {
  if (!scopes_.empty()) ++scopes_.back().tokens;
  return std::nullopt;
}

std::vector<std::string> ParseMachine::alias_names(const AliasPattern& pattern) const {
  std::vector<std::string> names;
  auto add = [&](const std::string& n) {
    if (pattern.matches(n)) names.push_back(n);
  };
  for (const ScopeState& s : scopes_) {
    for (const FromTarget& t : s.targets) {
      if (t.alias) add(*t.alias);
      if (t.exports) {
        for (const std::string& e : *t.exports) add(e);
      }
    }
    if (s.pending_target && s.pending_target->exports) {
      for (const std::string& e : *s.pending_target->exports) add(e);
    }
    if (s.captured) {
      for (const std::string& e : *s.captured) add(e);
    }
    for (const AliasRecord& r : s.recorded) {
      add(r.alias);
      add(r.column);
    }
    for (const Guard& g : s.ledger.pending()) {
      add(g.name);
      add(g.column);
    }
    for (const ExportItem& e : s.exports) add(e.name);
    if (s.item_alias) add(*s.item_alias);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

std::optional<Rejection> ParseMachine::column_ref(const ParserContext& ctx, const Token& tok) {
  ScopeState& scope = scopes_.back();
  ColumnRef ref;
  ref.offset = tok.offset;
  if (tok.kind == TokKind::Ident) {
    ref.form = ColumnRef::Form::Bare;
    ref.column = tok.text;
    if (!ctx.schema().has_column(tok.text) && !ctx.alias().matches(tok.text)) {
      return reject(Reason::ColumnNotInTable, tok, "'" + tok.text + "' is not a column of any table");
    }
  } else {
    ref.qualifier = tok.qualifier;
    ref.column = tok.column;
    ref.sel = tok.sel;
    if (ctx.alias().matches(tok.qualifier)) {
      ref.form = ColumnRef::Form::Alias;
      if (const FromTarget* target = find_alias(scope.targets, tok.qualifier)) {
        if (!target_satisfies(*target, tok.column, tok.sel)) {
          return reject(Reason::AliasColumnMismatch, tok,
                        "alias '" + tok.qualifier + "' has no column '" + tok.column + "'");
        }
      } else if (tok.sel == ColumnSel::Named) {
        scope.recorded.push_back(AliasRecord{tok.qualifier, tok.column, tok.sel});
      }
    } else {
      ref.form = ColumnRef::Form::Table;
      const Table* table = ctx.schema().find_table(tok.qualifier);
      if (table == nullptr) {
        return reject(Reason::UnknownTable, tok, "no table named '" + tok.qualifier + "'");
      }
      if (tok.sel == ColumnSel::Named &&
          std::find(table->columns.begin(), table->columns.end(), tok.column) == table->columns.end()) {
        return reject(Reason::ColumnNotInTable, tok,
                      "table '" + tok.qualifier + "' has no column '" + tok.column + "'");
      }
    }
  }
  if (ctx.guards()) {
    if (auto v = scope.ledger.on_reference(ref, scope.targets)) {
      return reject(Reason::GuardViolation, tok, *v);
    }
  }
  if (scope.phase == ScopePhase::SelectList && scope.tokens == scope.item_start) {
    if (ref.sel == ColumnSel::Named) {
      scope.item_first = ExportItem{ExportItem::Kind::Name, ref.column};
    } else if (ref.sel == ColumnSel::Star) {
      scope.item_first = ExportItem{ExportItem::Kind::QualifiedStar, ref.qualifier};
    }
  }
  return std::nullopt;
}

std::optional<Rejection> ParseMachine::bind_pending(const ParserContext& ctx, const Token& tok,
                                                    std::optional<std::string> alias) {
  (void)ctx;
  ScopeState& scope = scopes_.back();
  FromTarget target = std::move(*scope.pending_target);
  scope.pending_target.reset();
  if (alias) {
    if (find_alias(scope.targets, *alias)) {
      return reject(Reason::DuplicateAlias, tok, "alias '" + *alias + "' is already bound in this scope");
    }
    for (const AliasRecord& r : scope.recorded) {
      if (r.alias == *alias && !target_satisfies(target, r.column, r.sel)) {
        return reject(Reason::AliasColumnMismatch, tok,
                      "'" + *alias + "." + r.column + "' is not provided by the bound " +
                          (target.is_subquery() ? std::string("sub-query") : "table '" + target.table + "'"));
      }
    }
    std::erase_if(scope.recorded, [&](const AliasRecord& r) { return r.alias == *alias; });
    target.alias = std::move(alias);
  }
  scope.targets.push_back(std::move(target));
  return std::nullopt;
}

std::optional<Rejection> ParseMachine::end_from(const ParserContext& ctx, const Token& tok) {
  ScopeState& scope = scopes_.back();
  scope.phase = ScopePhase::AfterFrom;
  if (ctx.guards()) {
    if (auto v = scope.ledger.discharge(scope.targets)) return reject(Reason::GuardViolation, tok, *v);
  }
  return std::nullopt;
}

std::optional<Rejection> ParseMachine::end_scope(const ParserContext& ctx, const Token& tok) {
  ScopeState& scope = scopes_.back();
  if (ctx.guards() && !scope.ledger.empty()) {
    return reject(Reason::GuardViolation, tok, describe(scope.ledger.pending().front()));
  }
  auto exports = std::make_shared<ColumnList>();
  auto append = [&](const FromTarget& t) {
    if (t.exports) exports->insert(exports->end(), t.exports->begin(), t.exports->end());
  };
  for (const ExportItem& e : scope.exports) {
    switch (e.kind) {
      case ExportItem::Kind::Name:
        exports->push_back(e.name);
        break;
      case ExportItem::Kind::Star:
        for (const FromTarget& t : scope.targets) append(t);
        break;
      case ExportItem::Kind::QualifiedStar:
        if (const FromTarget* t = find_alias(scope.targets, e.name)) {
          append(*t);
        } else {
          for (const FromTarget& t2 : scope.targets) {
            if (t2.table == e.name && !t2.alias) {
              append(t2);
              break;
            }
          }
        }
        break;
    }
  }
  scopes_.pop_back();
  if (!scopes_.empty() && scopes_.back().capture_armed && !scopes_.back().captured) {
    scopes_.back().captured = std::move(exports);
  }
  return std::nullopt;
}

std::optional<Rejection> ParseMachine::step(const ParserContext& ctx, const Token& tok) {
  if (complete_) return reject(Reason::Syntax, tok, "input continues after the end of the query");
  auto replace = [&](G g) { frames_.back() = Frame{g}; };
  auto push = [&](G g) { frames_.push_back(Frame{g}); };
  auto pop = [&] { frames_.pop_back(); };

  for (;;) {
    if (frames_.empty()) return syntax(tok);
    const Frame f = frames_.back();
    switch (f.g) {
      case G::TopEnd:
        if (tok.is(Sym::Semi)) {
          replace(G::TopEndSemi);
          return consume();
        }
        [[fallthrough]];
      case G::TopEndSemi:
        if (tok.kind == TokKind::End) {
          pop();
          complete_ = true;
          return std::nullopt;
        }
        return syntax(tok);

      case G::Query:
        replace(G::QueryTail);
        push(G::Operand);
        continue;
      case G::QueryTail:
        if (tok.is(Keyword::Union) || tok.is(Keyword::Intersect) || tok.is(Keyword::Except)) {
          push(G::Operand);
          return consume();
        }
        pop();
        continue;
      case G::Operand:
        if (tok.is(Keyword::Select)) {
          pop();
          consume();
          scopes_.emplace_back();
          for (G g : {G::EndScope, G::LimitOpt, G::OrderOpt, G::HavingOpt, G::GroupOpt, G::WhereOpt,
                      G::EndFrom, G::FromList, G::ExpectFrom, G::SelectList, G::DistinctOpt}) {
            push(g);
          }
          return std::nullopt;
        }
        if (tok.is(Sym::LParen)) {
          replace(G::Query);
          frames_.insert(frames_.end() - 1, sym_frame(Sym::RParen));
          return consume();
        }
        return syntax(tok);

      case G::DistinctOpt:
        pop();
        if (tok.is(Keyword::Distinct)) return consume();
        continue;
      case G::SelectList:
        replace(G::SelectListTail);
        push(G::SelectItem);
        continue;
      case G::SelectListTail:
        if (tok.is(Sym::Comma)) {
          push(G::SelectItem);
          return consume();
        }
        pop();
        continue;
      case G::SelectItem: {
        ScopeState& s = scopes_.back();
        s.item_start = s.tokens;
        s.item_body_end = std::numeric_limits<std::uint32_t>::max();
        s.item_first.reset();
        s.item_alias.reset();
        if (tok.kind == TokKind::Star) {
          s.item_first = ExportItem{ExportItem::Kind::Star, {}};
          replace(G::SelectItemEnd);
          return consume();
        }
        if (tok.kind == TokKind::Qualified && tok.sel == ColumnSel::Star) {
          if (auto r = column_ref(ctx, tok)) return r;
          replace(G::SelectItemEnd);
          return consume();
        }
        replace(G::SelectItemEnd);
        push(G::ItemAliasOpt);
        push(G::Or);
        continue;
      }
      case G::ItemAliasOpt:
        if (tok.is(Keyword::As)) {
          scopes_.back().item_body_end = scopes_.back().tokens;
          replace(G::ItemAliasName);
          return consume();
        }
        pop();
        continue;
      case G::ItemAliasName:
        if (tok.kind == TokKind::Ident) {
          scopes_.back().item_alias = tok.text;
          pop();
          return consume();
        }
        return syntax(tok);
      case G::SelectItemEnd: {
        ScopeState& s = scopes_.back();
        const std::uint32_t end = std::min(s.item_body_end, s.tokens);
        if (s.item_alias) {
          s.exports.push_back(ExportItem{ExportItem::Kind::Name, *s.item_alias});
        } else if (s.item_first && end - s.item_start == 1) {
          s.exports.push_back(*s.item_first);
        }
        pop();
        continue;
      }

      case G::ExpectFrom:
        if (tok.is(Keyword::From)) {
          scopes_.back().phase = ScopePhase::From;
          pop();
          return consume();
        }
        return syntax(tok);
      case G::FromList:
        replace(G::FromTail);
        push(G::TableRef);
        continue;
      case G::FromTail:
        if (tok.is(Sym::Comma)) {
          push(G::TableRef);
          return consume();
        }
        if (tok.is(Keyword::Join)) {
          push(G::OnOpt);
          push(G::TableRef);
          return consume();
        }
        pop();
        continue;
      case G::OnOpt:
        if (tok.is(Keyword::On)) {
          replace(G::Or);
          return consume();
        }
        pop();
        continue;
      case G::TableRef:
        if (tok.kind == TokKind::Ident) {
          const Table* table = ctx.schema().find_table(tok.text);
          if (table == nullptr) return reject(Reason::UnknownTable, tok, "no table named '" + tok.text + "'");
          scopes_.back().pending_target = FromTarget{std::nullopt, table->name, table_exports(*table)};
          frames_.back() = Frame{G::TableAliasOpt, 0};
          return consume();
        }
        if (tok.is(Sym::LParen)) {
          ScopeState& s = scopes_.back();
          s.capture_armed = true;
          s.captured.reset();
          frames_.back() = Frame{G::TableAliasOpt, 1};
          push(G::ExpectSym);
          frames_.back().arg = static_cast<std::uint8_t>(Sym::RParen);
          push(G::Query);
          return consume();
        }
        return syntax(tok);
      case G::TableAliasOpt: {
        ScopeState& s = scopes_.back();
        if (f.arg == 1) {
          s.pending_target = FromTarget{std::nullopt, std::string(),
                                        s.captured ? s.captured : std::make_shared<const ColumnList>()};
          s.capture_armed = false;
          s.captured.reset();
          frames_.back().arg = 0;
        }
        if (tok.is(Keyword::As)) {
          replace(G::TableAliasName);
          return consume();
        }
        if (auto r = bind_pending(ctx, tok, std::nullopt)) return r;
        pop();
        continue;
      }
      case G::TableAliasName:
        if (tok.kind == TokKind::Ident && ctx.alias().matches(tok.text)) {
          if (auto r = bind_pending(ctx, tok, tok.text)) return r;
          pop();
          return consume();
        }
        return syntax(tok);
      case G::EndFrom:
        if (auto r = end_from(ctx, tok)) return r;
        pop();
        continue;

      case G::WhereOpt:
        if (tok.is(Keyword::Where)) {
          replace(G::Or);
          return consume();
        }
        pop();
        continue;
      case G::GroupOpt:
        if (tok.is(Keyword::Group)) {
          replace(G::GroupList);
          frames_.push_back(kw_frame(Keyword::By));
          return consume();
        }
        pop();
        continue;
      case G::GroupList:
        replace(G::GroupTail);
        push(G::ColRef);
        continue;
      case G::GroupTail:
        if (tok.is(Sym::Comma)) {
          push(G::ColRef);
          return consume();
        }
        pop();
        continue;
      case G::ColRef:
        if (tok.kind == TokKind::Ident || (tok.kind == TokKind::Qualified && tok.sel != ColumnSel::Star)) {
          if (auto r = column_ref(ctx, tok)) return r;
          pop();
          return consume();
        }
        return syntax(tok);
      case G::HavingOpt:
        if (tok.is(Keyword::Having)) {
          replace(G::Or);
          return consume();
        }
        pop();
        continue;
      case G::OrderOpt:
        if (tok.is(Keyword::Order)) {
          replace(G::OrderList);
          frames_.push_back(kw_frame(Keyword::By));
          return consume();
        }
        pop();
        continue;
      case G::OrderList:
        replace(G::OrderTail);
        push(G::DirOpt);
        push(G::Or);
        continue;
      case G::OrderTail:
        if (tok.is(Sym::Comma)) {
          push(G::DirOpt);
          push(G::Or);
          return consume();
        }
        pop();
        continue;
      case G::DirOpt:
        pop();
        if (tok.is(Keyword::Asc) || tok.is(Keyword::Desc)) return consume();
        continue;
      case G::LimitOpt:
        if (tok.is(Keyword::Limit)) {
          replace(G::LimitValue);
          return consume();
        }
        pop();
        continue;
      case G::LimitValue:
        if (tok.kind == TokKind::Number && tok.integer) {
          pop();
          return consume();
        }
        return syntax(tok);
      case G::EndScope:
        if (auto r = end_scope(ctx, tok)) return r;
        pop();
        continue;

      case G::Or:
        replace(G::OrTail);
        push(G::And);
        continue;
      case G::OrTail:
        if (tok.is(Keyword::Or)) {
          push(G::And);
          return consume();
        }
        pop();
        continue;
      case G::And:
        replace(G::AndTail);
        push(G::Not);
        continue;
      case G::AndTail:
        if (tok.is(Keyword::And)) {
          push(G::Not);
          return consume();
        }
        pop();
        continue;
      case G::Not:
        if (tok.is(Keyword::Not)) return consume();
        replace(G::Pred);
        continue;
      case G::Pred:
        replace(G::PredTail);
        push(G::Add);
        continue;
      case G::PredTail:
        if (tok.kind == TokKind::Symbol && is_comparison(tok.sym)) {
          replace(G::Add);
          return consume();
        }
        if (tok.is(Keyword::Not)) {
          replace(G::PredNot);
          return consume();
        }
        if (tok.is(Keyword::Is)) {
          replace(G::IsTail);
          return consume();
        }
        if (tok.is(Keyword::In) || tok.is(Keyword::Like) || tok.is(Keyword::Between)) {
          replace(G::PredNot);
          continue;
        }
        pop();
        continue;
      case G::PredNot:
        if (tok.is(Keyword::In)) {
          replace(G::InBody);
          return consume();
        }
        if (tok.is(Keyword::Like)) {
          replace(G::Add);
          return consume();
        }
        if (tok.is(Keyword::Between)) {
          replace(G::Add);
          frames_.push_back(kw_frame(Keyword::And));
          push(G::Add);
          return consume();
        }
        return syntax(tok);
      case G::IsTail:
        if (tok.is(Keyword::Not)) {
          frames_.back() = kw_frame(Keyword::Null);
          return consume();
        }
        if (tok.is(Keyword::Null)) {
          pop();
          return consume();
        }
        return syntax(tok);
      case G::InBody:
        if (tok.is(Sym::LParen)) {
          frames_.back() = sym_frame(Sym::RParen);
          push(G::InInner);
          return consume();
        }
        return syntax(tok);
      case G::InInner:
        if (tok.is(Keyword::Select)) {
          replace(G::Query);
          continue;
        }
        replace(G::ExprListTail);
        push(G::Or);
        continue;
      case G::ExprListTail:
        if (tok.is(Sym::Comma)) {
          push(G::Or);
          return consume();
        }
        pop();
        continue;
      case G::Add:
        replace(G::AddTail);
        push(G::Mul);
        continue;
      case G::AddTail:
        if (tok.is(Sym::Plus) || tok.is(Sym::Minus)) {
          push(G::Mul);
          return consume();
        }
        pop();
        continue;
      case G::Mul:
        replace(G::MulTail);
        push(G::Unary);
        continue;
      case G::MulTail:
        if (tok.kind == TokKind::Star || tok.is(Sym::Slash)) {
          push(G::Unary);
          return consume();
        }
        pop();
        continue;
      case G::Unary:
        if (tok.is(Sym::Minus)) return consume();
        replace(G::Primary);
        continue;
      case G::Primary:
        if (tok.kind == TokKind::Ident || (tok.kind == TokKind::Qualified && tok.sel != ColumnSel::Star)) {
          if (auto r = column_ref(ctx, tok)) return r;
          pop();
          return consume();
        }
        if (tok.kind == TokKind::Number || tok.kind == TokKind::String) {
          pop();
          return consume();
        }
        if (tok.kind == TokKind::Keyword && is_aggregate(tok.kw)) {
          frames_.back() = sym_frame(Sym::RParen);
          push(G::AggArg);
          frames_.push_back(sym_frame(Sym::LParen));
          return consume();
        }
        if (tok.is(Keyword::Exists)) {
          frames_.back() = sym_frame(Sym::RParen);
          push(G::Query);
          frames_.push_back(sym_frame(Sym::LParen));
          return consume();
        }
        if (tok.is(Sym::LParen)) {
          replace(G::ParenBody);
          return consume();
        }
        return syntax(tok);
      case G::ParenBody:
        frames_.back() = sym_frame(Sym::RParen);
        push(tok.is(Keyword::Select) ? G::Query : G::Or);
        continue;
      case G::AggArg:
        if (tok.kind == TokKind::Star) {
          pop();
          return consume();
        }
        replace(G::Or);
        if (tok.is(Keyword::Distinct)) return consume();
        continue;

      case G::ExpectKw:
        if (tok.is(static_cast<Keyword>(f.arg))) {
          pop();
          return consume();
        }
        return syntax(tok);
      case G::ExpectSym:
        if (tok.is(static_cast<Sym>(f.arg))) {
          pop();
          return consume();
        }
        return syntax(tok);
    }
  }
}

// ---------------------------------------------------------------------------
// Character-level driver

namespace {

Token make_token(TokKind kind, std::size_t offset) {
  Token t;
  t.kind = kind;
  t.offset = offset;
  return t;
}

Token ident_token(const std::string& name, std::size_t offset) {
  Token t = make_token(TokKind::Ident, offset);
  t.text = name;
  return t;
}

Token qualified_token(const std::string& qualifier, const std::string& column, ColumnSel sel,
                      std::size_t offset) {
  Token t = make_token(TokKind::Qualified, offset);
  t.qualifier = qualifier;
  t.column = column;
  t.sel = sel;
  t.text = qualifier + "." + (sel == ColumnSel::Star ? "*" : column);
  return t;
}

// Every grammar token the pending fragment could still turn into, up to
// equivalence: alias-pattern completions that are mentioned nowhere behave
// identically, so one fresh representative stands for all of them.
std::vector<Token> pending_candidates(const ParserContext& ctx, const ParseMachine& machine,
                                      const LexState& lex) {
  std::vector<Token> out;
  const std::string& p = lex.pending;
  const std::size_t at = lex.pending_begin;
  const SqlSchema& schema = ctx.schema();
  const AliasPattern& alias = ctx.alias();

  auto alias_completions = [&](std::string_view fragment) {
    std::vector<std::string> names;
    if (!alias.admits_prefix(fragment)) return names;
    std::vector<std::string> known = machine.alias_names(alias);
    for (const std::string& n : known) {
      if (std::string_view(n).substr(0, fragment.size()) == fragment) names.push_back(n);
    }
    names.push_back(alias.fresh_completion(fragment, [&](const std::string& n) {
      return std::binary_search(known.begin(), known.end(), n);
    }));
    return names;
  };

  switch (lex.pending_kind) {
    case PendingKind::None:
      break;
    case PendingKind::Word: {
      auto dot = p.find('.');
      if (dot == std::string::npos) {
        for (std::size_t i = 0; i < kKeywordCount; ++i) {
          auto kw = static_cast<Keyword>(i);
          std::string_view text = keyword_text(kw);
          if (text.substr(0, p.size()) == p) {
            Token t = make_token(TokKind::Keyword, at);
            t.kw = kw;
            t.text = std::string(text);
            out.push_back(std::move(t));
          }
        }
        for (const std::string& name : SqlSchema::with_prefix(schema.all_names(), p)) {
          out.push_back(ident_token(name, at));
          if (schema.find_table(name)) {
            out.push_back(qualified_token(name, {}, ColumnSel::Any, at));
            out.push_back(qualified_token(name, {}, ColumnSel::Star, at));
          }
        }
        for (const std::string& name : alias_completions(p)) {
          out.push_back(ident_token(name, at));
          out.push_back(qualified_token(name, {}, ColumnSel::Any, at));
          out.push_back(qualified_token(name, {}, ColumnSel::Star, at));
        }
        break;
      }
      const std::string qualifier = p.substr(0, dot);
      const std::string column = p.substr(dot + 1);
      if (column.empty()) {
        out.push_back(qualified_token(qualifier, {}, ColumnSel::Any, at));
        out.push_back(qualified_token(qualifier, {}, ColumnSel::Star, at));
        break;
      }
      for (const std::string& name : SqlSchema::with_prefix(schema.column_names(), column)) {
        out.push_back(qualified_token(qualifier, name, ColumnSel::Named, at));
      }
      for (const std::string& name : alias_completions(column)) {
        out.push_back(qualified_token(qualifier, name, ColumnSel::Named, at));
      }
      break;
    }
    case PendingKind::Number: {
      Token t = make_token(TokKind::Number, at);
      t.text = p;
      t.integer = p.find('.') == std::string::npos;
      out.push_back(t);
      if (t.integer) {
        t.integer = false;
        out.push_back(t);
      }
      break;
    }
    case PendingKind::String: {
      Token t = make_token(TokKind::String, at);
      t.text = p;
      out.push_back(std::move(t));
      break;
    }
    case PendingKind::Operator: {
      std::vector<Sym> syms;
      if (p == "<") syms = {Sym::Lt, Sym::Le, Sym::LtGt};
      if (p == ">") syms = {Sym::Gt, Sym::Ge};
      if (p == "!") syms = {Sym::Ne};
      for (Sym s : syms) {
        Token t = make_token(TokKind::Symbol, at);
        t.sym = s;
        t.text = std::string(sym_text(s));
        out.push_back(std::move(t));
      }
      break;
    }
  }
  return out;
}

}  // namespace

SqlParser::SqlParser(const SqlSchema& schema, ParserOptions options) : ctx_(schema, std::move(options)) {}

std::optional<Rejection> SqlParser::check_pending(const ParseMachine& machine, const LexState& lex) const {
  if (lex.pending_kind == PendingKind::None) return std::nullopt;
  std::optional<Rejection> exact;
  std::optional<Rejection> specific;
  std::optional<Rejection> any;
  for (const Token& cand : pending_candidates(ctx_, machine, lex)) {
    ParseMachine trial = machine;
    auto r = trial.step(ctx_, cand);
    if (!r) return std::nullopt;
    if (cand.text == lex.pending && !exact) exact = r;
    if (r->reason != Reason::Syntax && !specific) specific = r;
    if (!any) any = r;
  }
  if (exact) return exact;
  if (specific) return specific;
  if (any) return any;
  return Rejection{Reason::Syntax, lex.pending_begin, "no admissible continuation"};
}

// Smallest offset in [begin, begin + raw.size()) at which the fragment `raw`,
// lexed from scratch, stops having an admissible completion; `fallback` if
// every proper prefix is admissible.
std::size_t SqlParser::earliest_failure(const ParseMachine& machine, std::string_view raw,
                                        std::size_t begin, std::size_t fallback) const {
  auto fails = [&](std::size_t len) {
    LexState tmp;
    for (std::size_t i = 0; i < len; ++i) {
      if (ctx_.lexer().step(tmp, raw[i])) return true;
    }
    if (!tmp.items.empty()) return false;
    return check_pending(machine, tmp).has_value();
  };
  std::size_t lo = 1;
  std::size_t hi = raw.size();
  if (hi == 0) return fallback;
  if (!fails(hi)) {
    // Items closed by their own last character ("!=", "<=") lex cleanly in full.
    if (hi == 1 || !fails(hi - 1)) return fallback;
    --hi;
  }
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (fails(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return begin + lo - 1;
}

ParseOutcome SqlParser::feed(const ParseState& state, std::string_view chunk) const {
  ParseState next = state;
  if (next.machine.complete()) {
    if (chunk.empty()) return next;
    return Rejection{Reason::Syntax, next.lex.text.size(), "input continues after the end of the query"};
  }
  const std::size_t start = state.lex.text.size();
  for (char c : chunk) {
    const std::size_t offset = next.lex.text.size();
    const std::size_t before = next.lex.items.size();
    if (auto r = ctx_.lexer().step(next.lex, c)) {
      // The lexically clean prefix may already be a parse failure.
      if (r->offset > start) {
        ParseOutcome head = feed(state, chunk.substr(0, r->offset - start));
        if (head.rejected()) return head;
      }
      return *r;
    }
    for (std::size_t i = before; i < next.lex.items.size(); ++i) {
      const LexItem& item = next.lex.items[i];
      ParseMachine trial = next.machine;
      if (auto r = trial.step(ctx_, token_from_item(item))) {
        std::string_view raw = std::string_view(next.lex.text).substr(item.begin, item.end - item.begin);
        r->offset = earliest_failure(next.machine, raw, item.begin, offset);
        return *r;
      }
      next.machine = std::move(trial);
    }
  }
  if (auto r = check_pending(next.machine, next.lex)) {
    std::string_view raw = std::string_view(next.lex.text).substr(next.lex.pending_begin);
    r->offset = earliest_failure(next.machine, raw, next.lex.pending_begin, next.lex.text.size());
    return *r;
  }
  return next;
}

ParseOutcome SqlParser::finalize(const ParseState& state) const {
  ParseState next = state;
  const std::size_t end = next.lex.text.size();
  if (!next.machine.complete()) {
    const std::size_t before = next.lex.items.size();
    if (auto r = ctx_.lexer().finish(next.lex)) return *r;
    for (std::size_t i = before; i < next.lex.items.size(); ++i) {
      if (auto r = next.machine.step(ctx_, token_from_item(next.lex.items[i]))) {
        r->offset = end;
        return *r;
      }
    }
    if (auto r = next.machine.step(ctx_, end_token(end))) {
      r->offset = end;
      return *r;
    }
  }
  ReferenceResult built = reference_parse(ctx_, next.lex.items, /*check_semantics=*/false);
  if (!built.ast) {
    throw std::logic_error("tree builder rejected a query the incremental parser completed: " +
                           built.rejection->detail);
  }
  return std::move(*built.ast);
}

ParseOutcome SqlParser::parse_full(std::string_view text) const {
  ParseOutcome fed = feed(initial(), text);
  if (!fed.accepted()) return fed;
  return finalize(fed.state());
}

ParseOutcome parse_feed(const ParseState& state, const SqlSchema& schema, std::string_view chunk) {
  return SqlParser(schema).feed(state, chunk);
}

ParseOutcome parse_finalize(const ParseState& state, const SqlSchema& schema) {
  return SqlParser(schema).finalize(state);
}

ParseOutcome parse_full(const SqlSchema& schema, std::string_view text) {
  return SqlParser(schema).parse_full(text);
}

ParseOutcome check_with_guards(const ParseState& state, const SqlSchema& schema, std::string_view chunk) {
  return SqlParser(schema, ParserOptions{true, AliasPattern()}).feed(state, chunk);
}

ParseOutcome finalize_with_guards(const ParseState& state, const SqlSchema& schema) {
  return SqlParser(schema, ParserOptions{true, AliasPattern()}).finalize(state);
}

}  // namespace sqlgate
