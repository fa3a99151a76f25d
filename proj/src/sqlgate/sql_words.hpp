#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace sqlgate {

// The SQL subset understood by every checking level.
enum class Keyword : std::uint8_t {
  Select, Distinct, From, Join, On, As, Where, And, Or, Not, Group, By,
  Having, Order, Asc, Desc, Limit, Union, Except, Intersect, Between, In,
  Like, Is, Null, Count, Sum, Avg, Min, Max, Exists,
};

inline constexpr std::size_t kKeywordCount = 31;

std::optional<Keyword> keyword_from_text(std::string_view text);
std::string_view keyword_text(Keyword kw);

// True iff `fragment` is a (non-strict) prefix of some keyword.
bool is_keyword_prefix(std::string_view fragment);

// Length of the longest prefix of `word` that still extends to a keyword.
std::size_t longest_keyword_prefix(std::string_view word);

bool is_aggregate(Keyword kw);

// ASCII-only identifier rules: [a-z_][a-z0-9_]* after folding.
bool is_ident_start(char c);
bool is_ident_char(char c);
bool is_valid_identifier(std::string_view name);
char fold_ascii(char c);
std::string fold_ascii(std::string_view text);

// Table-alias naming convention, `<prefix><digits>` with at least one digit.
// Spider-style targets use t1, t2, ...
class AliasPattern {
 public:
  AliasPattern() : prefix_("t") {}
  explicit AliasPattern(std::string prefix);

  const std::string& prefix() const { return prefix_; }
  bool matches(std::string_view name) const;
  // Some completion of `fragment` matches the pattern.
  bool admits_prefix(std::string_view fragment) const;

  // A completion of `fragment` that matches the pattern and is not in `taken`.
  // Precondition: admits_prefix(fragment).
  template <typename Taken>
  std::string fresh_completion(std::string_view fragment, const Taken& taken) const {
    std::string base(fragment.size() < prefix_.size() ? std::string_view(prefix_) : fragment);
    for (std::uint64_t n = 0;; ++n) {
      std::string candidate = base + (n == 0 && base.size() > prefix_.size() ? std::string() : std::to_string(n));
      if (!matches(candidate)) continue;
      if (!taken(candidate)) return candidate;
    }
  }

 private:
  std::string prefix_;
};

}  // namespace sqlgate
