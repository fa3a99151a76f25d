#include "support.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "sqlgate/lexer.hpp"
#include "sqlgate/reference_parser.hpp"

namespace sqlgate::testing {

std::string testdata(const std::string& name) { return std::string(SQLGATE_TESTDATA) + "/" + name; }

SqlSchema load_fixture(const std::string& name) { return load_schema_file(testdata(name + ".json")); }

bool oracle_accepts(const SqlSchema& schema, Mode mode, std::string_view text) {
  switch (mode) {
    case Mode::Off:
      return true;
    case Mode::Lexing: {
      Lexer lexer(schema);
      LexOutcome fed = lexer.feed(LexState{}, text);
      return fed.accepted() && lexer.finalize(fed.state()).accepted();
    }
    case Mode::ParsingNoGuards:
    case Mode::ParsingWithGuards: {
      ParserContext ctx(schema, ParserOptions{mode == Mode::ParsingWithGuards, AliasPattern()});
      return reference_check(ctx, text).accepted();
    }
  }
  return false;
}

Enumeration enumerate_valid(const ScoringModel& model, const Vocabulary& vocab, const SqlSchema& schema, Mode mode,
                            int max_length, bool prune) {
  Enumeration result;
  std::vector<int> prefix;
  const int eos = vocab.eos_id();
  std::function<void(double)> visit = [&](double score) {
    std::vector<double> scores = model.next_scores(prefix);
    std::vector<int> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
    for (int id : order) {
      if (!vocab.contains(id)) continue;
      const double total = score + scores[static_cast<std::size_t>(id)];
      if (prune && result.best && total < result.score) break;  // sorted: the rest is worse
      prefix.push_back(id);
      if (id == eos) {
        if (oracle_accepts(schema, mode, vocab.detokenize(prefix))) {
          ++result.valid;
          if (!result.best || total > result.score) {
            result.best = prefix;
            result.score = total;
          }
        }
      } else if (static_cast<int>(prefix.size()) < max_length) {
        visit(total);
      }
      prefix.pop_back();
    }
  };
  visit(0.0);
  return result;
}

MicroInstance make_micro_instance(std::uint64_t seed, int max_length) {
  static const std::vector<std::string> pool = {"▁id", "▁name", "▁people", "▁pets", "▁*", ",", "▁where",
                                                "▁=",  "▁1",    "▁age",    "▁t1",   "▁as", "▁heads", "▁city"};
  auto schema = std::make_shared<const SqlSchema>(load_fixture("toy"));
  std::mt19937_64 rng(seed);
  for (;;) {
    std::vector<std::string> picked = pool;
    std::shuffle(picked.begin(), picked.end(), rng);
    picked.resize(3);
    auto has = [&](std::initializer_list<const char*> any) {
      return std::any_of(any.begin(), any.end(),
                         [&](const char* p) { return std::find(picked.begin(), picked.end(), p) != picked.end(); });
    };
    // Without a column and a table no query fits; skip the exhaustive check.
    if (!has({"▁id", "▁name", "▁*", "▁age", "▁city"}) || !has({"▁people", "▁pets", "▁heads"})) continue;
    std::vector<std::optional<std::string>> pieces = {std::string("</s>"), std::string("select"),
                                                      std::string("▁from")};
    for (const auto& p : picked) pieces.emplace_back(p);
    auto vocab = std::make_shared<const Vocabulary>(pieces, 0);
    auto model = std::make_shared<const ScriptedModel>(vocab->size(), rng(), 4.0);
    if (enumerate_valid(*model, *vocab, *schema, Mode::ParsingWithGuards, max_length).best) {
      return MicroInstance{schema, vocab, model};
    }
  }
}

}  // namespace sqlgate::testing
