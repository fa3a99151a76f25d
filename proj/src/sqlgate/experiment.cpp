#include "sqlgate/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sqlgate/lexer.hpp"
#include "sqlgate/parser.hpp"

namespace sqlgate {
namespace {

constexpr std::string_view kMarker = Vocabulary::kDefaultMarker;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

std::string strip_marker(const std::string& piece) {
  if (piece.rfind(kMarker, 0) == 0) return " " + piece.substr(kMarker.size());
  return piece;
}

std::string join_pieces(const std::vector<std::string>& pieces) {
  std::string out;
  for (const std::string& p : pieces) out += strip_marker(p);
  return out;
}

std::string bare(const std::string& piece) {
  return piece.rfind(kMarker, 0) == 0 ? piece.substr(kMarker.size()) : piece;
}

// Full-text verdicts of the three checking levels.
struct Checks {
  explicit Checks(const SqlSchema& schema)
      : lexer(schema), plain(schema, ParserOptions{false, AliasPattern()}), guarded(schema, ParserOptions{true, AliasPattern()}) {}

  bool accepts(Mode mode, std::string_view text) const {
    switch (mode) {
      case Mode::Off:
        return true;
      case Mode::Lexing: {
        LexOutcome fed = lexer.feed(LexState{}, text);
        return fed.accepted() && lexer.finalize(fed.state()).accepted();
      }
      case Mode::ParsingNoGuards:
        return plain.parse_full(text).completed();
      case Mode::ParsingWithGuards:
        return guarded.parse_full(text).completed();
    }
    return false;
  }

  Lexer lexer;
  SqlParser plain;
  SqlParser guarded;
};

Mode catching_mode(Distractor d) {
  switch (d) {
    case Distractor::Lexical: return Mode::Lexing;
    case Distractor::Syntax:
    case Distractor::Schema: return Mode::ParsingNoGuards;
    case Distractor::Guard: return Mode::ParsingWithGuards;
  }
  return Mode::Off;
}

std::optional<std::vector<std::string>> make_distractor(const SqlSchema& schema, const Checks& checks,
                                                        const std::vector<std::string>& target, Distractor kind,
                                                        Rng& rng) {
  std::vector<std::size_t> sites;
  const auto from_at = std::find(target.begin(), target.end(), std::string(kMarker) + "from");
  const std::size_t from_index = static_cast<std::size_t>(from_at - target.begin());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const std::string word = bare(target[i]);
    const bool spaced = target[i].rfind(kMarker, 0) == 0;
    switch (kind) {
      case Distractor::Lexical:
        if (spaced && keyword_from_text(word)) sites.push_back(i);
        break;
      case Distractor::Syntax:
        if (i == from_index) sites.push_back(i);
        break;
      case Distractor::Schema:
        if (i >= 2 && target[i - 1] == "." && schema.has_column(word)) sites.push_back(i);
        break;
      case Distractor::Guard:
        if (spaced && i < from_index && schema.has_column(word) && (i + 1 >= target.size() || target[i + 1] != ".")) {
          sites.push_back(i);
        }
        break;
    }
  }
  if (sites.empty()) return std::nullopt;
  const Mode catcher = catching_mode(kind);
  const Mode below = static_cast<Mode>(static_cast<int>(catcher) - 1);
  for (int attempt = 0; attempt < 12; ++attempt) {
    const std::size_t i = sites[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(sites.size()) - 1))];
    std::vector<std::string> out = target;
    if (kind == Distractor::Syntax) {
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
    } else if (kind == Distractor::Lexical) {
      std::string w = bare(target[i]);
      const std::size_t at = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(w.size()) - 1));
      if (uniform(rng, 0, 1) == 0 && w.size() > 1) {
        w.erase(at, 1);
      } else {
        w[at] = static_cast<char>('a' + uniform(rng, 0, 25));
      }
      out[i] = std::string(kMarker) + w;
    } else {
      const auto columns = schema.column_names();
      const std::string& c = columns[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(columns.size()) - 1))];
      out[i] = (kind == Distractor::Guard ? std::string(kMarker) : std::string()) + c;
    }
    if (out == target) continue;
    const std::string text = join_pieces(out);
    if (!checks.accepts(catcher, text) && checks.accepts(below, text)) return out;
  }
  return std::nullopt;
}

}  // namespace

std::string_view distractor_name(Distractor d) {
  switch (d) {
    case Distractor::Lexical: return "lexical";
    case Distractor::Syntax: return "syntax";
    case Distractor::Schema: return "schema";
    case Distractor::Guard: return "guard";
  }
  return "?";
}

std::vector<std::string> query_pieces(const SqlSchema& schema, std::string_view text) {
  Lexer lexer(schema);
  LexOutcome fed = lexer.feed(LexState{}, text);
  if (!fed.accepted()) throw std::invalid_argument("query does not lex: " + fed.rejection().detail);
  LexOutcome done = lexer.finalize(fed.state());
  if (!done.accepted()) throw std::invalid_argument("query does not lex: " + done.rejection().detail);
  std::vector<std::string> pieces;
  for (const LexItem& item : done.state().items) {
    const bool spaced = item.begin > 0 && text[item.begin - 1] == ' ';
    const std::string lead = spaced ? std::string(kMarker) : std::string();
    if (item.kind == LexKind::QualifiedIdentifier) {
      const auto dot = item.text.find('.');
      pieces.push_back(lead + item.text.substr(0, dot));
      pieces.emplace_back(".");
      pieces.push_back(item.text.substr(dot + 1));
    } else {
      // Keywords and names are folded; literals are verbatim already.
      pieces.push_back(lead + item.text);
    }
  }
  return pieces;
}

Instance make_instance(std::uint64_t seed, const InstanceShape& shape) {
  Rng rng(seed);
  for (int attempt = 0;; ++attempt) {
    auto schema = std::make_shared<const SqlSchema>(random_schema(rng, shape.schema));
    Checks checks(*schema);

    std::vector<std::string> target;
    for (int tries = 0; tries < 100; ++tries) {
      std::string q = random_valid_query(*schema, rng, QueryShape{2, false, false});
      auto pieces = query_pieces(*schema, q);
      if (static_cast<int>(pieces.size()) + 1 <= shape.max_length) {
        target = std::move(pieces);
        break;
      }
    }
    if (target.empty()) {
      const Table& t = schema->tables().front();
      target = {std::string(kMarker) + "select", std::string(kMarker) + t.columns.front(),
                std::string(kMarker) + "from", std::string(kMarker) + t.name};
    }

    std::vector<std::pair<Distractor, std::vector<std::string>>> distractors;
    const bool clean = std::bernoulli_distribution(shape.clean_fraction)(rng);
    const int wanted = clean ? 0 : uniform(rng, 1, shape.max_distractors);
    for (int i = 0; i < wanted * 4 && static_cast<int>(distractors.size()) < wanted; ++i) {
      auto kind = static_cast<Distractor>(uniform(rng, 0, 3));
      auto d = make_distractor(*schema, checks, target, kind, rng);
      if (!d) continue;
      bool duplicate = false;
      for (const auto& existing : distractors) duplicate = duplicate || existing.second == *d;
      if (!duplicate) distractors.emplace_back(kind, std::move(*d));
    }

    // Vocabulary: eos, then every piece in use, then filler.
    std::vector<std::string> pieces{"</s>"};
    auto add = [&](const std::string& p) {
      if (std::find(pieces.begin(), pieces.end(), p) == pieces.end()) pieces.push_back(p);
    };
    for (const auto& p : target) add(p);
    for (const auto& [kind, d] : distractors) {
      for (const auto& p : d) add(p);
    }
    if (static_cast<int>(pieces.size()) > shape.max_vocab) {
      if (attempt < 20) continue;
      throw std::runtime_error("cannot fit an instance into the vocabulary limit");
    }
    std::vector<std::string> filler = {",", ".", "(", ")", "*", std::string(kMarker) + "=", std::string(kMarker) + "1"};
    for (std::size_t i = 0; i < kKeywordCount; ++i) filler.push_back(std::string(kMarker) + std::string(keyword_text(static_cast<Keyword>(i))));
    for (const std::string& n : schema->all_names()) {
      filler.push_back(std::string(kMarker) + n);
      filler.push_back(n);
    }
    std::shuffle(filler.begin(), filler.end(), rng);
    for (const auto& p : filler) {
      if (static_cast<int>(pieces.size()) >= shape.max_vocab) break;
      add(p);
    }
    std::vector<std::optional<std::string>> slots(pieces.begin(), pieces.end());
    auto vocab = std::make_shared<const Vocabulary>(std::move(slots), 0);
    auto id_of = [&](const std::string& p) {
      return static_cast<int>(std::find(pieces.begin(), pieces.end(), p) - pieces.begin());
    };
    auto to_ids = [&](const std::vector<std::string>& ps) {
      std::vector<int> ids;
      for (const auto& p : ps) ids.push_back(id_of(p));
      ids.push_back(0);
      return ids;
    };

    Instance inst;
    inst.schema = schema;
    inst.vocabulary = vocab;
    inst.target = to_ids(target);
    inst.max_length = shape.max_length;
    for (const auto& [kind, d] : distractors) inst.branches.push_back(Branch{kind, to_ids(d)});

    // Logit rows along every path; the first differing token of a
    // distractor outscores the target.
    const int v = vocab->size();
    auto model = std::make_shared<ScriptedModel>(v, seed, shape.noise);
    std::map<std::vector<int>, std::vector<double>> rows;
    std::uniform_real_distribution<double> noise(0.0, shape.noise);
    auto row_for = [&](const std::vector<int>& prefix) -> std::vector<double>& {
      auto it = rows.find(prefix);
      if (it == rows.end()) {
        std::vector<double> r(static_cast<std::size_t>(v));
        for (double& x : r) x = noise(rng);
        it = rows.emplace(prefix, std::move(r)).first;
      }
      return it->second;
    };
    auto lay = [&](const std::vector<int>& path, std::size_t diverge, double branch_bonus) {
      for (std::size_t i = 0; i < path.size(); ++i) {
        std::vector<int> prefix(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(i));
        double bonus = i == diverge ? branch_bonus : shape.target_bonus;
        double& cell = row_for(prefix)[static_cast<std::size_t>(path[i])];
        cell = std::max(cell, bonus + shape.noise);
      }
    };
    lay(inst.target, inst.target.size(), shape.target_bonus);
    for (const Branch& b : inst.branches) {
      std::size_t d = 0;
      while (d < b.tokens.size() && d < inst.target.size() && b.tokens[d] == inst.target[d]) ++d;
      lay(b.tokens, d, shape.distractor_bonus);
    }
    for (auto& [prefix, row] : rows) model->set(prefix, row);
    inst.model = std::move(model);
    return inst;
  }
}

OracleResult best_valid_sequence(const ScoringModel& model, const Validator& validator, int max_length,
                                 std::size_t expansion_budget) {
  struct Node {
    double cost;
    std::uint64_t order;
    std::vector<int> tokens;
    Checkpoint checkpoint;
  };
  auto worse = [](const Node& a, const Node& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.order > b.order;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(worse)> open(worse);
  std::uint64_t order = 0;
  open.push(Node{0.0, order++, {}, validator.initial()});
  OracleResult result;
  std::size_t expansions = 0;
  const int eos = validator.vocabulary().eos_id();
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.checkpoint.finished) {
      result.best = std::move(node.tokens);
      result.log_score = -node.cost;
      return result;
    }
    if (static_cast<int>(node.tokens.size()) >= max_length) continue;
    if (++expansions > expansion_budget) {
      result.exhausted_budget = true;
      return result;
    }
    std::vector<double> scores = model.next_scores(node.tokens);
    for (int id = 0; id < static_cast<int>(scores.size()); ++id) {
      if (!validator.vocabulary().contains(id)) continue;
      FeedResult r = validator.feed_token(node.checkpoint, id);
      if (!r.ok()) continue;
      Node child{node.cost - scores[static_cast<std::size_t>(id)], order++, node.tokens, std::move(r.checkpoint)};
      child.tokens.push_back(id);
      (void)eos;
      open.push(std::move(child));
    }
  }
  return result;
}

std::string_view csv_header() {
  return "mode,beam,k,timing,valid_rate,oracle_match_rate,unusable_rate,mean_feed_latency_s";
}

std::string ExperimentReport::csv() const {
  std::string out(csv_header());
  out += "\n";
  char buf[256];
  for (const CellResult& c : cells) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%s,%.4f,%.4f,%.4f,%.3e\n", std::string(mode_name(c.mode)).c_str(), c.beam,
                  c.k, std::string(timing_name(c.timing)).c_str(), c.valid_rate, c.oracle_match_rate, c.unusable_rate,
                  c.mean_feed_latency_s);
    out += buf;
  }
  return out;
}

const CellResult* ExperimentReport::find(Mode mode, int beam, int k, Timing timing) const {
  for (const CellResult& c : cells) {
    if (c.mode == mode && c.beam == beam && c.k == k && c.timing == timing) return &c;
  }
  return nullptr;
}

std::string ExperimentReport::summary_json() const {
  nlohmann::json cells_json = nlohmann::json::array();
  for (const CellResult& c : cells) {
    nlohmann::json j{{"mode", mode_name(c.mode)},
                     {"beam", c.beam},
                     {"k", c.k},
                     {"timing", timing_name(c.timing)},
                     {"runs", c.runs},
                     {"invalid_rate", c.invalid_rate},
                     {"mean_decode_s", c.mean_decode_s},
                     {"failures", c.failures}};
    if (const CellResult* off = find(Mode::Off, c.beam, c.k, c.timing); off && off->mean_decode_s > 0) {
      j["decode_overhead_vs_off"] = c.mean_decode_s / off->mean_decode_s;
    }
    if (!c.error.empty()) j["error"] = c.error;
    cells_json.push_back(std::move(j));
  }
  return nlohmann::json{{"cells", cells_json}}.dump(2);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  for (int b : config.beams) {
    if (b < 1) throw std::invalid_argument("beam sizes must be positive");
  }
  for (int k : config.ks) {
    if (k < 1) throw std::invalid_argument("k values must be positive");
  }
  if (config.max_length < 1) throw std::invalid_argument("max length must be positive");

  struct Problem {
    Instance instance;
    OracleResult oracle;
  };
  std::vector<Problem> problems;
  const bool from_files = config.schema_path || config.vocab_path || config.model_path;
  if (from_files && !(config.schema_path && config.vocab_path && config.model_path)) {
    throw std::invalid_argument("schema, vocabulary and model files must be given together");
  }
  for (int r = 0; r < config.repetitions; ++r) {
    Instance inst;
    if (from_files) {
      inst.schema = std::make_shared<const SqlSchema>(load_schema_file(*config.schema_path));
      inst.vocabulary = std::make_shared<const Vocabulary>(load_vocabulary_file(*config.vocab_path));
      inst.model = std::make_shared<const ScriptedModel>(ScriptedModel::load_file(*config.model_path));
      inst.max_length = config.max_length;
    } else {
      InstanceShape shape = config.shape;
      shape.max_length = config.max_length;
      inst = make_instance(config.seed * 1000003ULL + static_cast<std::uint64_t>(r), shape);
    }
    Validator strict(*inst.schema, *inst.vocabulary, Mode::ParsingWithGuards);
    OracleResult oracle = best_valid_sequence(*inst.model, strict, inst.max_length);
    problems.push_back(Problem{std::move(inst), std::move(oracle)});
  }

  ExperimentReport report;
  for (Mode mode : config.modes) {
    for (int beam : config.beams) {
      for (int k : config.ks) {
        for (Timing timing : config.timings) {
          CellResult cell;
          cell.mode = mode;
          cell.beam = beam;
          cell.k = k;
          cell.timing = timing;
          std::size_t valid = 0, matched = 0, unusable = 0, invalid = 0;
          std::uint64_t calls = 0;
          double feed_s = 0.0, decode_s = 0.0;
          for (const Problem& p : problems) {
            try {
              Validator validator(*p.instance.schema, *p.instance.vocabulary, mode, timing);
              Validator strict(*p.instance.schema, *p.instance.vocabulary, Mode::ParsingWithGuards);
              SearchOptions opts{beam, k, p.instance.max_length, true};
              SearchResult res = beam_search(*p.instance.model, validator, opts);
              ++cell.runs;
              calls += res.stats.feed_calls;
              feed_s += std::chrono::duration<double>(res.stats.feed_time).count();
              decode_s += std::chrono::duration<double>(res.elapsed).count();
              if (res.hypotheses.empty()) {
                ++unusable;
                continue;
              }
              const Hypothesis& top = res.hypotheses.front();
              const std::string text = p.instance.vocabulary->detokenize(top.tokens);
              if (!strict.check_full(text)) {
                ++valid;
              } else {
                ++invalid;
              }
              if (p.oracle.best && top.tokens == *p.oracle.best) ++matched;
            } catch (const std::exception& e) {
              ++cell.failures;
              if (cell.error.empty()) cell.error = e.what();
            }
          }
          if (cell.runs > 0) {
            const double n = static_cast<double>(cell.runs);
            cell.valid_rate = static_cast<double>(valid) / n;
            cell.oracle_match_rate = static_cast<double>(matched) / n;
            cell.unusable_rate = static_cast<double>(unusable) / n;
            cell.invalid_rate = static_cast<double>(invalid) / n;
            if (config.record_latency) {
              cell.mean_feed_latency_s = calls ? feed_s / static_cast<double>(calls) : 0.0;
              cell.mean_decode_s = decode_s / n;
            }
          }
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return report;
}

ExperimentReport run_experiment_to_file(const ExperimentConfig& config) {
  ExperimentReport report = run_experiment(config);
  if (!config.output_path.empty()) {
    std::ofstream csv(config.output_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write '" + config.output_path + "'");
    csv << report.csv();
    std::ofstream summary(config.output_path + ".summary.json", std::ios::binary);
    summary << report.summary_json() << "\n";
  }
  return report;
}

}  // namespace sqlgate
