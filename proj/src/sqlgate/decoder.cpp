#include "sqlgate/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sqlgate {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

FeedResult accepted(Checkpoint cp) { return FeedResult{FeedResult::Kind::Accepted, std::move(cp), std::nullopt}; }
FeedResult finished(Checkpoint cp) {
  cp.finished = true;
  return FeedResult{FeedResult::Kind::Finished, std::move(cp), std::nullopt};
}
FeedResult rejected(Rejection r) { return FeedResult{FeedResult::Kind::Rejected, Checkpoint{}, std::move(r)}; }

}  // namespace

std::string_view mode_name(Mode mode) {
  switch (mode) {
    case Mode::Off: return "off";
    case Mode::Lexing: return "lex";
    case Mode::ParsingNoGuards: return "parse";
    case Mode::ParsingWithGuards: return "parse-guards";
  }
  return "?";
}

std::optional<Mode> mode_from_name(std::string_view name) {
  for (Mode m : {Mode::Off, Mode::Lexing, Mode::ParsingNoGuards, Mode::ParsingWithGuards}) {
    if (mode_name(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view timing_name(Timing timing) {
  return timing == Timing::Incremental ? "incremental" : "final";
}

std::optional<Timing> timing_from_name(std::string_view name) {
  if (name == "incremental") return Timing::Incremental;
  if (name == "final") return Timing::FinalizeOnly;
  return std::nullopt;
}

const std::string& Checkpoint::text() const {
  if (const auto* s = std::get_if<std::string>(&state)) return *s;
  if (const auto* l = std::get_if<LexState>(&state)) return l->text;
  return std::get<ParseState>(state).lex.text;
}

Validator::Validator(const SqlSchema& schema, const Vocabulary& vocabulary, Mode mode, Timing timing,
                     AliasPattern alias)
    : schema_(&schema),
      vocab_(&vocabulary),
      mode_(mode),
      timing_(timing),
      lexer_(schema, alias),
      parser_(schema, ParserOptions{mode == Mode::ParsingWithGuards, alias}) {}

Checkpoint Validator::initial() const {
  Checkpoint cp;
  if (incremental()) {
    if (mode_ == Mode::Lexing) {
      cp.state = LexState{};
    } else {
      cp.state = parser_.initial();
    }
  }
  return cp;
}

FeedResult Validator::feed_text(const Checkpoint& checkpoint, std::string_view chunk) const {
  if (checkpoint.finished) {
    return rejected(Rejection{Reason::Syntax, checkpoint.consumed, "hypothesis is already finished"});
  }
  Checkpoint next;
  next.consumed = checkpoint.consumed + chunk.size();
  if (const auto* text = std::get_if<std::string>(&checkpoint.state)) {
    next.state = *text + std::string(chunk);
    return accepted(std::move(next));
  }
  if (const auto* lex = std::get_if<LexState>(&checkpoint.state)) {
    LexOutcome out = lexer_.feed(*lex, chunk);
    if (!out.accepted()) return rejected(out.rejection());
    next.state = std::move(out.state());
    return accepted(std::move(next));
  }
  ParseOutcome out = parser_.feed(std::get<ParseState>(checkpoint.state), chunk);
  if (out.rejected()) return rejected(out.rejection());
  next.state = out.state();
  return accepted(std::move(next));
}

FeedResult Validator::finish(const Checkpoint& checkpoint) const {
  if (checkpoint.finished) {
    return rejected(Rejection{Reason::Syntax, checkpoint.consumed, "hypothesis is already finished"});
  }
  if (const auto* text = std::get_if<std::string>(&checkpoint.state)) {
    if (auto r = check_full(*text)) return rejected(*r);
    return finished(checkpoint);
  }
  if (const auto* lex = std::get_if<LexState>(&checkpoint.state)) {
    LexOutcome out = lexer_.finalize(*lex);
    if (!out.accepted()) return rejected(out.rejection());
    return finished(checkpoint);
  }
  ParseOutcome out = parser_.finalize(std::get<ParseState>(checkpoint.state));
  if (out.rejected()) return rejected(out.rejection());
  return finished(checkpoint);
}

FeedResult Validator::feed_token(const Checkpoint& checkpoint, int token_id) const {
  const std::string& text = vocab_->text(token_id);  // validates the id
  if (token_id == vocab_->eos_id()) return finish(checkpoint);
  return feed_text(checkpoint, text);
}

std::optional<Rejection> Validator::check_full(std::string_view text) const {
  switch (mode_) {
    case Mode::Off:
      return std::nullopt;
    case Mode::Lexing: {
      LexOutcome fed = lexer_.feed(LexState{}, text);
      if (!fed.accepted()) return fed.rejection();
      LexOutcome done = lexer_.finalize(fed.state());
      if (!done.accepted()) return done.rejection();
      return std::nullopt;
    }
    case Mode::ParsingNoGuards:
    case Mode::ParsingWithGuards: {
      ParseOutcome out = parser_.parse_full(text);
      if (out.rejected()) return out.rejection();
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::vector<int> top_k_indices(std::span<const double> scores, int k) {
  std::vector<int> ids(scores.size());
  std::iota(ids.begin(), ids.end(), 0);
  const std::size_t n = std::min<std::size_t>(ids.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  ids.resize(n);
  return ids;
}

std::vector<double> warp_scores(const Validator& validator, const Checkpoint& checkpoint,
                                std::span<const double> scores, int k, std::vector<Expansion>* expansions,
                                WarpStats* stats) {
  const Vocabulary& vocab = validator.vocabulary();
  auto feed = [&](int id) {
    auto start = Clock::now();
    FeedResult r = validator.feed_token(checkpoint, id);
    if (stats) {
      ++stats->feed_calls;
      stats->feed_time += Clock::now() - start;
    }
    return r;
  };

  if (validator.mode() == Mode::Off) {
    std::vector<double> out(scores.begin(), scores.end());
    if (expansions) {
      for (int id = 0; id < static_cast<int>(scores.size()); ++id) {
        if (std::isfinite(scores[id]) && vocab.contains(id)) expansions->push_back({id, scores[id], feed(id)});
      }
    }
    return out;
  }

  std::vector<double> out(scores.size(), kNegInf);
  for (int id : top_k_indices(scores, k)) {
    if (!std::isfinite(scores[id]) || !vocab.contains(id)) continue;
    FeedResult r = feed(id);
    if (!r.ok()) continue;
    out[id] = scores[id];
    if (expansions) expansions->push_back({id, scores[id], std::move(r)});
  }
  return out;
}

SearchResult beam_search(const ScoringModel& model, const Validator& validator, const SearchOptions& options) {
  if (model.vocab_size() != validator.vocabulary().size()) {
    throw std::invalid_argument("model scores " + std::to_string(model.vocab_size()) + " tokens but the vocabulary has " +
                                std::to_string(validator.vocabulary().size()));
  }
  if (options.beam_size < 1 || options.top_k < 1 || options.max_length < 1) {
    throw std::invalid_argument("beam size, k and maximum length must be positive");
  }
  const auto start = Clock::now();
  SearchResult result;
  std::vector<Hypothesis> live;
  live.push_back(Hypothesis{{}, 0.0, validator.initial(), false});

  struct Candidate {
    double total;
    std::size_t parent;
    Expansion* expansion;
  };

  for (int step = 0; step < options.max_length && !live.empty(); ++step) {
    std::vector<std::vector<Expansion>> per_parent(live.size());
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < live.size(); ++i) {
      std::vector<double> raw = model.next_scores(live[i].tokens);
      warp_scores(validator, live[i].checkpoint, raw, options.top_k, &per_parent[i], &result.stats);
      for (Expansion& e : per_parent[i]) candidates.push_back({live[i].log_score + e.score, i, &e});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.total != b.total) return a.total > b.total;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.expansion->token < b.expansion->token;
    });

    std::vector<Hypothesis> next;
    int slots = 0;
    for (const Candidate& c : candidates) {
      if (slots == options.beam_size) break;
      const Hypothesis& parent = live[c.parent];
      FeedResult fed;
      if (options.use_cache) {
        fed = std::move(c.expansion->result);
      } else {
        fed = validator.feed_token(parent.checkpoint, c.expansion->token);
      }
      Hypothesis h{parent.tokens, c.total, std::move(fed.checkpoint), fed.kind == FeedResult::Kind::Finished};
      h.tokens.push_back(c.expansion->token);
      ++slots;
      if (h.finished) {
        result.hypotheses.push_back(std::move(h));
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }

  std::stable_sort(result.hypotheses.begin(), result.hypotheses.end(),
                   [](const Hypothesis& a, const Hypothesis& b) { return a.log_score > b.log_score; });
  result.elapsed = Clock::now() - start;
  return result;
}

std::optional<Hypothesis> greedy_search(const ScoringModel& model, const Validator& validator, int top_k,
                                        int max_length) {
  SearchOptions options;
  options.beam_size = 1;
  options.top_k = top_k;
  options.max_length = max_length;
  SearchResult r = beam_search(model, validator, options);
  if (r.hypotheses.empty()) return std::nullopt;
  return std::move(r.hypotheses.front());
}

}  // namespace sqlgate
