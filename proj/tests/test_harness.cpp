#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sqlgate/corpus.hpp"
#include "sqlgate/experiment.hpp"
#include "sqlgate/session_server.hpp"
#include "support.hpp"

using namespace sqlgate;
using nlohmann::json;

namespace {

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.seed = 5;
  c.repetitions = 3;
  c.beams = {1, 2};
  c.ks = {2, 4};
  c.record_latency = false;
  return c;
}

}  // namespace

TEST(Corpus, GeneratedQueriesAndMutations) {
  Rng rng(3);
  SqlSchema schema = random_schema(rng);
  Corpus c = build_corpus(schema, 9, 50, 50, 50);
  EXPECT_EQ(c.valid.size(), 50u);
  EXPECT_EQ(c.invalid.size(), 50u);
  EXPECT_EQ(c.fuzz.size(), 50u);
  for (const auto& q : c.valid) EXPECT_TRUE(sqlgate::testing::oracle_accepts(schema, Mode::ParsingWithGuards, q)) << q;
  for (const auto& m : c.invalid) {
    EXPECT_FALSE(sqlgate::testing::oracle_accepts(schema, m.catching_mode, m.text)) << m.text;
    const Mode below = static_cast<Mode>(static_cast<int>(m.catching_mode) - 1);
    EXPECT_TRUE(sqlgate::testing::oracle_accepts(schema, below, m.text)) << m.text;
  }
  // Same seed, same corpus.
  Corpus again = build_corpus(schema, 9, 50, 50, 50);
  EXPECT_EQ(again.valid, c.valid);
  EXPECT_EQ(again.fuzz, c.fuzz);
}

TEST(Corpus, EveryMutationKindOccurs) {
  Rng rng(8);
  SqlSchema schema = random_schema(rng);
  for (Mutation m : {Mutation::KeywordTypo, Mutation::OutOfTableColumn, Mutation::ClauseReorder,
                     Mutation::AliasDuplication}) {
    bool seen = false;
    for (int i = 0; i < 50 && !seen; ++i) seen = random_mutation(schema, rng, m).has_value();
    EXPECT_TRUE(seen) << mutation_name(m);
  }
}

TEST(Corpus, ChunkingPreservesText) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    std::string text = "select name from people where id = 3";
    auto chunks = random_chunking(text, rng, 1 + i % 7);
    std::string joined;
    for (const auto& c : chunks) joined += c;
    EXPECT_EQ(joined, text);
  }
}

TEST(Instance, PiecesRebuildTheQuery) {
  SqlSchema toy = sqlgate::testing::load_fixture("toy");
  auto pieces = query_pieces(toy, "select t1.name from people as t1 where t1.id = 3");
  std::vector<std::string> expected{"select", "▁t1", ".", "name", "▁from", "▁people", "▁as", "▁t1",
                                    "▁where", "▁t1", ".", "id", "▁=", "▁3"};
  EXPECT_EQ(pieces, expected);
}

TEST(Instance, TargetValidAndDistractorsCaughtByTheirMode) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Instance inst = make_instance(seed);
    EXPECT_LE(inst.vocabulary->size(), 64);
    EXPECT_LE(static_cast<int>(inst.target.size()), inst.max_length);
    EXPECT_EQ(inst.target.back(), inst.vocabulary->eos_id());
    EXPECT_TRUE(sqlgate::testing::oracle_accepts(*inst.schema, Mode::ParsingWithGuards, inst.vocabulary->detokenize(inst.target)));
    for (const Branch& b : inst.branches) {
      const std::string text = inst.vocabulary->detokenize(b.tokens);
      const Mode catcher = b.kind == Distractor::Lexical  ? Mode::Lexing
                           : b.kind == Distractor::Guard ? Mode::ParsingWithGuards
                                                         : Mode::ParsingNoGuards;
      EXPECT_FALSE(sqlgate::testing::oracle_accepts(*inst.schema, catcher, text)) << text;
      EXPECT_TRUE(sqlgate::testing::oracle_accepts(*inst.schema, static_cast<Mode>(static_cast<int>(catcher) - 1), text))
          << text;
    }
  }
}

TEST(Instance, OracleSearchMatchesEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    sqlgate::testing::MicroInstance inst = sqlgate::testing::make_micro_instance(seed);
    Validator guards(*inst.schema, *inst.vocab, Mode::ParsingWithGuards);
    OracleResult best = best_valid_sequence(*inst.model, guards, 8);
    sqlgate::testing::Enumeration all = sqlgate::testing::enumerate_valid(*inst.model, *inst.vocab, *inst.schema,
                                                         Mode::ParsingWithGuards, 8);
    ASSERT_TRUE(best.best);
    ASSERT_TRUE(all.best);
    EXPECT_EQ(*best.best, *all.best);
    EXPECT_NEAR(best.log_score, all.score, 1e-9);
  }
}

TEST(Experiment, CsvShapeAndDeterminism) {
  ExperimentConfig c = small_config();
  ExperimentReport a = run_experiment(c);
  ExperimentReport b = run_experiment(c);
  EXPECT_EQ(a.csv(), b.csv());
  auto lines = split_lines(a.csv());
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines[0], "mode,beam,k,timing,valid_rate,oracle_match_rate,unusable_rate,mean_feed_latency_s");
  EXPECT_EQ(lines.size(), 1u + 4 * 2 * 2 * 2);
  for (Mode m : c.modes) {
    for (int beam : c.beams) {
      for (int k : c.ks) {
        for (Timing t : c.timings) {
          const CellResult* cell = a.find(m, beam, k, t);
          ASSERT_NE(cell, nullptr);
          EXPECT_EQ(cell->runs, 3u);
          for (double r : {cell->valid_rate, cell->oracle_match_rate, cell->unusable_rate, cell->invalid_rate}) {
            EXPECT_GE(r, 0.0);
            EXPECT_LE(r, 1.0);
          }
          EXPECT_NEAR(cell->valid_rate + cell->invalid_rate + cell->unusable_rate, 1.0, 1e-12);
        }
      }
    }
  }
}

TEST(Experiment, WritesCsvAndSummary) {
  ExperimentConfig c = small_config();
  c.record_latency = true;
  c.output_path = temp_path("sweep.csv");
  ExperimentReport r = run_experiment_to_file(c);
  std::ifstream csv(c.output_path);
  std::stringstream buf;
  buf << csv.rdbuf();
  EXPECT_EQ(buf.str(), r.csv());
  std::ifstream summary(c.output_path + ".summary.json");
  json j = json::parse(summary);
  ASSERT_EQ(j["cells"].size(), r.cells.size());
  bool has_ratio = false;
  for (const auto& cell : j["cells"]) has_ratio = has_ratio || cell.contains("decode_overhead_vs_off");
  EXPECT_TRUE(has_ratio);
}

TEST(Experiment, RejectsInvalidConfig) {
  ExperimentConfig c = small_config();
  c.repetitions = 0;
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  c = small_config();
  c.beams = {0};
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
  c = small_config();
  c.schema_path = sqlgate::testing::testdata("toy.json");
  EXPECT_THROW(run_experiment(c), std::invalid_argument);
}

TEST(Experiment, PerRunFailuresAreRecorded) {
  // A model wider than the vocabulary makes every decode fail; the sweep
  // still completes.
  ExperimentConfig c = small_config();
  c.schema_path = sqlgate::testing::testdata("toy.json");
  c.vocab_path = temp_path("v.txt");
  c.model_path = temp_path("m.json");
  std::ofstream(*c.vocab_path) << "#eos 0\n0\t</s>\n1\tselect\n";
  std::ofstream(*c.model_path) << ScriptedModel(5, 1, 0.0).to_json();
  ExperimentReport r = run_experiment(c);
  ASSERT_EQ(r.cells.size(), 32u);
  bool any_failure = false;
  for (const CellResult& cell : r.cells) any_failure = any_failure || cell.failures > 0;
  EXPECT_TRUE(any_failure);
}

TEST(Experiment, ValidRateMonotoneInMode) {
  ExperimentConfig c;
  c.seed = 2;
  c.repetitions = 30;
  c.ks = {4};
  c.timings = {Timing::Incremental};
  c.record_latency = false;
  ExperimentReport r = run_experiment(c);
  for (int beam : c.beams) {
    double prev = -1;
    for (Mode m : c.modes) {
      const double v = r.find(m, beam, 4, Timing::Incremental)->valid_rate;
      EXPECT_GE(v, prev) << mode_name(m) << " beam " << beam;
      prev = v;
    }
  }
}

namespace {

class ServerTest : public ::testing::Test {
 protected:
  std::shared_ptr<const SqlSchema> schema = std::make_shared<const SqlSchema>(sqlgate::testing::load_fixture("toy"));
  std::shared_ptr<const Vocabulary> vocab = std::make_shared<const Vocabulary>(load_vocabulary_string(
      "#eos 0\n0\t</s>\n1\tselect\n2\t\\u2581id\n3\t\\u2581from\n4\t\\u2581people\n5\t\\u2581pets\n6\t\\u2581where\n"));
  SessionServer server{schema, vocab};

  json call(const json& request) { return json::parse(server.handle(request.dump())); }
};

}  // namespace

TEST_F(ServerTest, FeedsToFinish) {
  EXPECT_EQ(call({{"op", "init"}, {"session", "s"}, {"mode", "parse-guards"}}), json({{"ok", true}}));
  json parent = nullptr;
  for (int id : {1, 2, 3, 4}) {
    json r = call({{"op", "feed"}, {"session", "s"}, {"parent", parent}, {"token_id", id}});
    ASSERT_EQ(r["result"], "accepted");
    EXPECT_TRUE(r["reason"].is_null());
    parent = r["state"];
  }
  json done = call({{"op", "feed"}, {"session", "s"}, {"parent", parent}, {"token_id", 0}});
  EXPECT_EQ(done["result"], "finished");
}

TEST_F(ServerTest, ParentsStayValidForBranching) {
  call({{"op", "init"}, {"session", "s"}, {"mode", "parse"}});
  json a = call({{"op", "feed"}, {"session", "s"}, {"token_id", 1}});
  json b = call({{"op", "feed"}, {"session", "s"}, {"parent", a["state"]}, {"token_id", 2}});
  json c = call({{"op", "feed"}, {"session", "s"}, {"parent", a["state"]}, {"token_id", 2}});
  EXPECT_EQ(b["result"], "accepted");
  EXPECT_EQ(c["result"], "accepted");
  EXPECT_NE(b["state"], c["state"]);

  json batch = call({{"op", "batch_feed"},
                     {"session", "s"},
                     {"items", {{{"parent", b["state"]}, {"token_id", 3}}, {{"parent", c["state"]}, {"token_id", 6}}}}});
  ASSERT_EQ(batch["results"].size(), 2u);
  EXPECT_EQ(batch["results"][0]["result"], "accepted");
  EXPECT_EQ(batch["results"][1]["result"], "rejected");
  EXPECT_EQ(batch["results"][1]["reason"], "syntax");
  EXPECT_TRUE(batch["results"][1]["state"].is_null());
}

TEST_F(ServerTest, ErrorsDoNotStopTheServer) {
  std::istringstream in(
      "{\"op\":\"init\",\"session\":\"s\",\"mode\":\"lex\"}\n"
      "not json\n"
      "\n"
      "{\"op\":\"feed\",\"session\":\"nope\",\"token_id\":1}\n"
      "{\"op\":\"feed\",\"session\":\"s\",\"parent\":\"h999\",\"token_id\":1}\n"
      "{\"op\":\"feed\",\"session\":\"s\",\"token_id\":99}\n"
      "{\"op\":\"init\",\"session\":\"s\",\"mode\":\"strict\"}\n"
      "{\"op\":\"feed\",\"session\":\"s\",\"token_id\":1}\n"
      "{\"op\":\"drop\",\"session\":\"s\"}\n"
      "{\"op\":\"feed\",\"session\":\"s\",\"token_id\":1}\n");
  std::ostringstream out;
  server.serve(in, out);
  auto lines = split_lines(out.str());
  ASSERT_EQ(lines.size(), 9u);
  EXPECT_EQ(lines[0], R"({"ok":true})");
  EXPECT_EQ(lines[1], R"({"error":"bad-request"})");
  EXPECT_EQ(lines[2], R"({"error":"unknown-handle"})");
  EXPECT_EQ(lines[3], R"({"error":"unknown-handle"})");
  EXPECT_EQ(lines[4], R"({"error":"bad-request"})");
  EXPECT_EQ(lines[5], R"({"error":"bad-request"})");
  EXPECT_EQ(json::parse(lines[6])["result"], "accepted");
  EXPECT_EQ(lines[7], R"({"ok":true})");
  EXPECT_EQ(lines[8], R"({"error":"unknown-handle"})");
}

TEST_F(ServerTest, DropSingleState) {
  call({{"op", "init"}, {"session", "s"}});
  json a = call({{"op", "feed"}, {"session", "s"}, {"token_id", 1}});
  EXPECT_EQ(call({{"op", "drop"}, {"session", "s"}, {"state", a["state"]}}), json({{"ok", true}}));
  EXPECT_EQ(call({{"op", "feed"}, {"session", "s"}, {"parent", a["state"]}, {"token_id", 2}}),
            json({{"error", "unknown-handle"}}));
}

// Random token walks through the protocol match in-process feeding.
TEST_F(ServerTest, ProtocolMatchesInProcess) {
  Rng rng(17);
  for (int session = 0; session < 40; ++session) {
    const Mode mode = static_cast<Mode>(session % 4);
    const std::string sid = "r" + std::to_string(session);
    call({{"op", "init"}, {"session", sid}, {"mode", mode_name(mode)}});
    Validator validator(*schema, *vocab, mode);
    Checkpoint cp = validator.initial();
    json parent = nullptr;
    for (int step = 0; step < 10; ++step) {
      const int id = std::uniform_int_distribution<int>(0, vocab->size() - 1)(rng);
      FeedResult local = validator.feed_token(cp, id);
      json remote = call({{"op", "feed"}, {"session", sid}, {"parent", parent}, {"token_id", id}});
      const char* expected = local.kind == FeedResult::Kind::Accepted   ? "accepted"
                             : local.kind == FeedResult::Kind::Finished ? "finished"
                                                                        : "rejected";
      ASSERT_EQ(remote["result"], expected);
      if (!local.ok() || local.kind == FeedResult::Kind::Finished) break;
      cp = local.checkpoint;
      parent = remote["state"];
    }
  }
}
