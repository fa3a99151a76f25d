#include "sqlgate/guards.hpp"

namespace sqlgate {
namespace {

std::string column_label(const std::string& column, ColumnSel sel) {
  switch (sel) {
    case ColumnSel::Star: return "*";
    case ColumnSel::Any: return "<any>";
    case ColumnSel::Named: return column;
  }
  return column;
}

}  // namespace

std::string describe(const Guard& guard) {
  switch (guard.kind) {
    case GuardKind::TableInScope:
      return "table '" + guard.name + "' must be in the from clause";
    case GuardKind::AliasInScope:
      return "alias '" + guard.name + "' must be bound in the from clause";
    case GuardKind::AliasHasColumn:
      return "alias '" + guard.name + "' must provide column '" + column_label(guard.column, guard.sel) + "'";
    case GuardKind::BareColumnUnique:
      return "exactly one from-clause table must provide column '" + guard.name + "'";
  }
  return "guard";
}

std::vector<Guard> guards_for(const ColumnRef& ref) {
  switch (ref.form) {
    case ColumnRef::Form::Table:
      return {Guard{GuardKind::TableInScope, ref.qualifier, {}, ref.sel, ref.offset}};
    case ColumnRef::Form::Alias:
      return {Guard{GuardKind::AliasInScope, ref.qualifier, {}, ref.sel, ref.offset},
              Guard{GuardKind::AliasHasColumn, ref.qualifier, ref.column, ref.sel, ref.offset}};
    case ColumnRef::Form::Bare:
      return {Guard{GuardKind::BareColumnUnique, ref.column, {}, ColumnSel::Named, ref.offset}};
  }
  return {};
}

std::optional<std::string> violation(const Guard& guard, std::span<const FromTarget> targets) {
  switch (guard.kind) {
    case GuardKind::TableInScope:
      for (const FromTarget& t : targets) {
        if (t.table == guard.name) return std::nullopt;
      }
      return describe(guard);
    case GuardKind::AliasInScope:
      for (const FromTarget& t : targets) {
        if (t.alias && *t.alias == guard.name) return std::nullopt;
      }
      return describe(guard);
    case GuardKind::AliasHasColumn:
      for (const FromTarget& t : targets) {
        if (t.alias && *t.alias == guard.name) {
          if (target_satisfies(t, guard.column, guard.sel)) return std::nullopt;
          return describe(guard);
        }
      }
      return describe(guard);
    case GuardKind::BareColumnUnique: {
      std::size_t providers = 0;
      for (const FromTarget& t : targets) providers += t.export_count(guard.name);
      if (providers == 1) return std::nullopt;
      return describe(guard) + " (found " + std::to_string(providers) + ")";
    }
  }
  return describe(guard);
}

std::optional<std::string> GuardLedger::on_reference(const ColumnRef& ref,
                                                     std::span<const FromTarget> targets) {
  for (Guard& g : guards_for(ref)) {
    if (discharged_) {
      if (auto v = violation(g, targets)) return v;
    } else {
      pending_.push_back(std::move(g));
    }
  }
  return std::nullopt;
}

std::optional<std::string> GuardLedger::discharge(std::span<const FromTarget> targets) {
  discharged_ = true;
  std::vector<Guard> pending;
  pending.swap(pending_);
  for (const Guard& g : pending) {
    if (auto v = violation(g, targets)) return v;
  }
  return std::nullopt;
}

GuardLedger register_guard(const GuardLedger& ledger, const ColumnRef& ref) {
  GuardLedger next = ledger;
  for (Guard& g : guards_for(ref)) next.add(std::move(g));
  return next;
}

DischargeResult discharge_at_from(const GuardLedger& ledger, std::span<const FromTarget> from_targets) {
  GuardLedger next = ledger;
  if (auto v = next.discharge(from_targets)) return {std::nullopt, v};
  return {std::move(next), std::nullopt};
}

}  // namespace sqlgate
