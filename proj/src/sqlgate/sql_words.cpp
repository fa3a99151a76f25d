#include "sqlgate/sql_words.hpp"

#include <algorithm>
#include <array>

namespace sqlgate {
namespace {

constexpr std::array<std::string_view, kKeywordCount> kKeywordTexts = {
    "select", "distinct", "from",  "join",   "on",     "as",        "where", "and",
    "or",     "not",      "group", "by",     "having", "order",     "asc",   "desc",
    "limit",  "union",    "except", "intersect", "between", "in",   "like",  "is",
    "null",   "count",    "sum",   "avg",    "min",    "max",       "exists",
};

}  // namespace

std::optional<Keyword> keyword_from_text(std::string_view text) {
  for (std::size_t i = 0; i < kKeywordTexts.size(); ++i) {
    if (kKeywordTexts[i] == text) return static_cast<Keyword>(i);
  }
  return std::nullopt;
}

std::string_view keyword_text(Keyword kw) { return kKeywordTexts[static_cast<std::size_t>(kw)]; }

bool is_keyword_prefix(std::string_view fragment) {
  return std::any_of(kKeywordTexts.begin(), kKeywordTexts.end(),
                     [&](std::string_view kw) { return kw.substr(0, fragment.size()) == fragment; });
}

std::size_t longest_keyword_prefix(std::string_view word) {
  std::size_t best = 0;
  for (std::string_view kw : kKeywordTexts) {
    std::size_t n = 0;
    while (n < kw.size() && n < word.size() && kw[n] == word[n]) ++n;
    best = std::max(best, n);
  }
  return best;
}

bool is_aggregate(Keyword kw) {
  switch (kw) {
    case Keyword::Count:
    case Keyword::Sum:
    case Keyword::Avg:
    case Keyword::Min:
    case Keyword::Max:
      return true;
    default:
      return false;
  }
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool is_valid_identifier(std::string_view name) {
  if (name.empty() || !is_ident_start(name.front())) return false;
  return std::all_of(name.begin(), name.end(), [](char c) { return is_ident_char(c); });
}

char fold_ascii(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string fold_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = fold_ascii(c);
  return out;
}

AliasPattern::AliasPattern(std::string prefix) : prefix_(std::move(prefix)) {}

bool AliasPattern::matches(std::string_view name) const {
  if (name.size() <= prefix_.size() || name.substr(0, prefix_.size()) != prefix_) return false;
  return std::all_of(name.begin() + static_cast<std::ptrdiff_t>(prefix_.size()), name.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

bool AliasPattern::admits_prefix(std::string_view fragment) const {
  if (fragment.size() <= prefix_.size()) return prefix_.substr(0, fragment.size()) == fragment;
  return matches(fragment);
}

}  // namespace sqlgate
