#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sqlgate/lexer.hpp"
#include "sqlgate/parser.hpp"
#include "sqlgate/reason.hpp"
#include "sqlgate/schema.hpp"
#include "sqlgate/scoring_model.hpp"
#include "sqlgate/vocabulary.hpp"

namespace sqlgate {

// Ordered by strictness.
enum class Mode : std::uint8_t { Off, Lexing, ParsingNoGuards, ParsingWithGuards };

enum class Timing : std::uint8_t { Incremental, FinalizeOnly };

std::string_view mode_name(Mode mode);  // off, lex, parse, parse-guards
std::optional<Mode> mode_from_name(std::string_view name);
std::string_view timing_name(Timing timing);  // incremental, final
std::optional<Timing> timing_from_name(std::string_view name);

// Validator state after some detokenized prefix. A plain value.
struct Checkpoint {
  std::variant<std::string, LexState, ParseState> state;  // text only when unchecked
  std::size_t consumed = 0;
  bool finished = false;

  const std::string& text() const;
};

struct FeedResult {
  enum class Kind : std::uint8_t { Accepted, Rejected, Finished };
  Kind kind = Kind::Accepted;
  Checkpoint checkpoint;  // Accepted and Finished
  std::optional<Rejection> rejection;

  bool ok() const { return kind != Kind::Rejected; }
};

// The checking procedure for one mode and timing over fixed schema and
// vocabulary. Stateless apart from configuration; safe to share.
class Validator {
 public:
  Validator(const SqlSchema& schema, const Vocabulary& vocabulary, Mode mode,
            Timing timing = Timing::Incremental, AliasPattern alias = AliasPattern());

  Mode mode() const { return mode_; }
  Timing timing() const { return timing_; }
  const Vocabulary& vocabulary() const { return *vocab_; }
  const SqlSchema& schema() const { return *schema_; }

  Checkpoint initial() const;
  // Throws std::out_of_range for an unknown token id.
  FeedResult feed_token(const Checkpoint& checkpoint, int token_id) const;
  FeedResult feed_text(const Checkpoint& checkpoint, std::string_view chunk) const;
  FeedResult finish(const Checkpoint& checkpoint) const;

  // Non-incremental verdict of this mode on a complete text.
  std::optional<Rejection> check_full(std::string_view text) const;

 private:
  bool incremental() const { return mode_ != Mode::Off && timing_ == Timing::Incremental; }

  const SqlSchema* schema_;
  const Vocabulary* vocab_;
  Mode mode_;
  Timing timing_;
  Lexer lexer_;
  SqlParser parser_;
};

// Per-step record of which tokens survived warping, with their successor
// checkpoints.
struct Expansion {
  int token = 0;
  double score = 0.0;
  FeedResult result;
};

struct WarpStats {
  std::uint64_t feed_calls = 0;
  std::chrono::nanoseconds feed_time{0};
};

// Indices of the k highest scores, ties to the lower id.
std::vector<int> top_k_indices(std::span<const double> scores, int k);

// Warps one hypothesis' scores: outside the top-k or rejected -> -inf;
// accepted keep their exact score. Mode Off returns the input unchanged.
// `expansions`, if given, receives the surviving tokens with their results.
std::vector<double> warp_scores(const Validator& validator, const Checkpoint& checkpoint,
                                std::span<const double> scores, int k,
                                std::vector<Expansion>* expansions = nullptr, WarpStats* stats = nullptr);

struct Hypothesis {
  std::vector<int> tokens;
  double log_score = 0.0;
  Checkpoint checkpoint;
  bool finished = false;
};

struct SearchOptions {
  int beam_size = 4;
  int top_k = 4;
  int max_length = 64;
  // Reuse the checkpoints computed while warping when extending; results
  // are identical either way.
  bool use_cache = true;
};

struct SearchResult {
  std::vector<Hypothesis> hypotheses;  // finished, best first
  WarpStats stats;
  std::chrono::nanoseconds elapsed{0};
};

SearchResult beam_search(const ScoringModel& model, const Validator& validator, const SearchOptions& options);
std::optional<Hypothesis> greedy_search(const ScoringModel& model, const Validator& validator, int top_k,
                                        int max_length);

}  // namespace sqlgate
