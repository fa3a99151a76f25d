#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlgate/scope.hpp"

namespace sqlgate {

enum class GuardKind : std::uint8_t { TableInScope, AliasInScope, AliasHasColumn, BareColumnUnique };

// A deferred obligation created by a column reference. It lives only until
// the from clause of its scope has been parsed.
struct Guard {
  GuardKind kind;
  std::string name;    // table, alias or bare column
  std::string column;  // AliasHasColumn only
  ColumnSel sel = ColumnSel::Named;
  std::size_t origin = 0;

  friend bool operator==(const Guard&, const Guard&) = default;
};

std::string describe(const Guard& guard);

// Guards that a reference gives rise to:
//   tid.cid   -> TableInScope(tid)
//   alias.cid -> AliasInScope(alias), AliasHasColumn(alias, cid)
//   cid       -> BareColumnUnique(cid)
std::vector<Guard> guards_for(const ColumnRef& ref);

// nullopt when `guard` holds for the given from-clause bindings, otherwise a
// description of the violation.
std::optional<std::string> violation(const Guard& guard, std::span<const FromTarget> targets);

// Pending guards of one select scope. Before the scope's from clause has been
// parsed, references are deferred here; discharge checks them all at once and
// afterwards every new reference is checked as soon as it is seen.
class GuardLedger {
 public:
  bool discharged() const { return discharged_; }
  std::span<const Guard> pending() const { return pending_; }
  bool empty() const { return pending_.empty(); }

  // Defers (before discharge) or checks immediately (after discharge).
  // Returns the first violation, if any.
  std::optional<std::string> on_reference(const ColumnRef& ref, std::span<const FromTarget> targets);

  // Checks every pending guard in registration order against the completed
  // from clause. Clears the ledger either way.
  std::optional<std::string> discharge(std::span<const FromTarget> targets);

  void add(Guard guard) { pending_.push_back(std::move(guard)); }

 private:
  std::vector<Guard> pending_;
  bool discharged_ = false;
};

// Value-style entry points.
GuardLedger register_guard(const GuardLedger& ledger, const ColumnRef& ref);

struct DischargeResult {
  std::optional<GuardLedger> ledger;  // set when every guard held
  std::optional<std::string> violation;
};
DischargeResult discharge_at_from(const GuardLedger& ledger, std::span<const FromTarget> from_targets);

}  // namespace sqlgate
