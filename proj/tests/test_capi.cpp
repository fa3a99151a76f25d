#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "sqlgate/sqlgate.h"
#include "support.hpp"

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << content;
  return path;
}

const char* kVocab =
    "#eos 0\n0\t</s>\n1\tselect\n2\t\\u2581id\n3\t\\u2581from\n4\t\\u2581people\n5\t\\u2581pets\n6\t\\u2581where\n";

}  // namespace

TEST(CApi, LoadErrorsMapToStatus) {
  sqlgate_schema* s = nullptr;
  EXPECT_EQ(sqlgate_schema_load_file("/nonexistent/x.json", &s), SQLGATE_ERR_IO);
  EXPECT_NE(std::string(sqlgate_last_error()).find("x.json"), std::string::npos);
  const std::string bad = "{\"db_id\":";
  EXPECT_EQ(sqlgate_schema_load_string(bad.data(), bad.size(), &s), SQLGATE_ERR_FORMAT);
  const std::string dup = R"({"db_id":"x","tables":[{"name":"a","columns":["c"]},{"name":"a","columns":["d"]}]})";
  EXPECT_EQ(sqlgate_schema_load_string(dup.data(), dup.size(), &s), SQLGATE_ERR_INTEGRITY);
  EXPECT_EQ(sqlgate_schema_load_file(nullptr, &s), SQLGATE_ERR_ARGUMENT);

  sqlgate_vocab* v = nullptr;
  EXPECT_EQ(sqlgate_vocab_load_file(write_temp("bad_vocab.txt", "0\tx\n").c_str(), &v), SQLGATE_ERR_FORMAT);
  sqlgate_model* m = nullptr;
  EXPECT_EQ(sqlgate_model_load_file(write_temp("bad_model.json", "{").c_str(), &m), SQLGATE_ERR_FORMAT);

  ASSERT_EQ(sqlgate_schema_load_file(sqlgate::testing::testdata("toy.json").c_str(), &s), SQLGATE_OK);
  EXPECT_STREQ(sqlgate_last_error(), "");
  sqlgate_schema_free(s);
}

TEST(CApi, ValidateText) {
  sqlgate_schema* s = nullptr;
  ASSERT_EQ(sqlgate_schema_load_file(sqlgate::testing::testdata("car_1.json").c_str(), &s), SQLGATE_OK);
  const std::string q = "select maker, model from car_makers";
  sqlgate_verdict v;
  ASSERT_EQ(sqlgate_validate_text(s, SQLGATE_MODE_PARSE, q.data(), q.size(), &v), SQLGATE_OK);
  EXPECT_TRUE(v.accepted);
  ASSERT_EQ(sqlgate_validate_text(s, SQLGATE_MODE_PARSE_GUARDS, q.data(), q.size(), &v), SQLGATE_OK);
  EXPECT_FALSE(v.accepted);
  EXPECT_STREQ(v.reason, "guard-violation");
  EXPECT_EQ(sqlgate_validate_text(s, static_cast<sqlgate_mode>(9), q.data(), q.size(), &v), SQLGATE_ERR_ARGUMENT);
  sqlgate_schema_free(s);
}

TEST(CApi, CheckpointsWarpAndDecode) {
  sqlgate_schema* s = nullptr;
  sqlgate_vocab* v = nullptr;
  sqlgate_validator* val = nullptr;
  ASSERT_EQ(sqlgate_schema_load_file(sqlgate::testing::testdata("toy.json").c_str(), &s), SQLGATE_OK);
  ASSERT_EQ(sqlgate_vocab_load_file(write_temp("v.txt", kVocab).c_str(), &v), SQLGATE_OK);
  EXPECT_EQ(sqlgate_vocab_size(v), 7);
  EXPECT_EQ(sqlgate_vocab_eos(v), 0);
  ASSERT_EQ(sqlgate_validator_new(s, v, SQLGATE_MODE_PARSE_GUARDS, SQLGATE_TIMING_INCREMENTAL, &val), SQLGATE_OK);

  sqlgate_checkpoint* cp = nullptr;
  ASSERT_EQ(sqlgate_checkpoint_new(val, &cp), SQLGATE_OK);
  for (int id : {1, 2, 3}) {
    sqlgate_feed_kind kind;
    sqlgate_checkpoint* next = nullptr;
    ASSERT_EQ(sqlgate_checkpoint_feed(val, cp, id, &kind, nullptr, &next), SQLGATE_OK);
    ASSERT_EQ(kind, SQLGATE_FEED_ACCEPTED);
    sqlgate_checkpoint_free(cp);
    cp = next;
  }
  sqlgate_checkpoint* branch = nullptr;
  ASSERT_EQ(sqlgate_checkpoint_clone(cp, &branch), SQLGATE_OK);

  sqlgate_feed_kind kind;
  sqlgate_verdict verdict;
  sqlgate_checkpoint* next = nullptr;
  ASSERT_EQ(sqlgate_checkpoint_feed(val, branch, 6, &kind, &verdict, &next), SQLGATE_OK);
  EXPECT_EQ(kind, SQLGATE_FEED_REJECTED);
  EXPECT_EQ(next, nullptr);
  EXPECT_STREQ(verdict.reason, "syntax");
  EXPECT_EQ(sqlgate_checkpoint_feed(val, branch, 42, &kind, &verdict, &next), SQLGATE_ERR_ARGUMENT);

  double scores[7] = {-9, -9, -9, -9, -1, -2, -0.5};
  double out[7];
  ASSERT_EQ(sqlgate_warp_scores(val, cp, scores, 7, 3, out), SQLGATE_OK);
  EXPECT_EQ(out[4], -1.0);
  EXPECT_EQ(out[5], -2.0);
  EXPECT_TRUE(std::isinf(out[6]));
  EXPECT_TRUE(std::isinf(out[0]));

  sqlgate_checkpoint_free(branch);
  sqlgate_checkpoint_free(cp);

  // A model whose best path is "select id from people".
  sqlgate::ScriptedModel model(7, 1, 0.0);
  auto row = [](int hot) {
    std::vector<double> r(7, 0.0);
    r[static_cast<std::size_t>(hot)] = 10;
    return r;
  };
  model.set(std::vector<int>{}, row(1));
  model.set(std::vector<int>{1}, row(2));
  model.set(std::vector<int>{1, 2}, row(3));
  model.set(std::vector<int>{1, 2, 3}, row(4));
  model.set(std::vector<int>{1, 2, 3, 4}, row(0));
  sqlgate_model* m = nullptr;
  ASSERT_EQ(sqlgate_model_load_file(write_temp("m.json", model.to_json()).c_str(), &m), SQLGATE_OK);
  sqlgate_decode_result r;
  ASSERT_EQ(sqlgate_decode(m, val, 2, 4, 8, &r), SQLGATE_OK);
  ASSERT_TRUE(r.found);
  EXPECT_STREQ(r.text, "select id from people");
  EXPECT_LT(r.log_score, 0.0);
  sqlgate_string_free(r.text);
  EXPECT_EQ(sqlgate_decode(m, val, 0, 4, 8, &r), SQLGATE_ERR_ARGUMENT);

  sqlgate_model_free(m);
  sqlgate_validator_free(val);
  sqlgate_vocab_free(v);
  sqlgate_schema_free(s);
}

TEST(CApi, ExperimentAndServer) {
  sqlgate_experiment_config c;
  sqlgate_experiment_config_init(&c);
  const int beams[] = {1};
  const int ks[] = {2};
  c.beams = beams;
  c.beam_count = 1;
  c.ks = ks;
  c.k_count = 1;
  c.repetitions = 2;
  c.record_latency = 0;
  char* csv = nullptr;
  char* summary = nullptr;
  ASSERT_EQ(sqlgate_experiment_run(&c, &csv, &summary), SQLGATE_OK);
  EXPECT_EQ(std::string(csv).rfind("mode,beam,k,timing,", 0), 0u);
  EXPECT_NE(std::string(summary).find("cells"), std::string::npos);
  sqlgate_string_free(csv);
  sqlgate_string_free(summary);
  c.repetitions = 0;
  EXPECT_EQ(sqlgate_experiment_run(&c, nullptr, nullptr), SQLGATE_ERR_ARGUMENT);

  sqlgate_schema* s = nullptr;
  sqlgate_vocab* v = nullptr;
  sqlgate_server* server = nullptr;
  ASSERT_EQ(sqlgate_schema_load_file(sqlgate::testing::testdata("toy.json").c_str(), &s), SQLGATE_OK);
  ASSERT_EQ(sqlgate_vocab_load_file(write_temp("v2.txt", kVocab).c_str(), &v), SQLGATE_OK);
  ASSERT_EQ(sqlgate_server_new(s, v, SQLGATE_MODE_PARSE_GUARDS, SQLGATE_TIMING_INCREMENTAL, &server), SQLGATE_OK);
  for (const auto& [request, response] : std::vector<std::pair<std::string, std::string>>{
           {R"({"op":"init","session":"a","mode":"parse-guards"})", R"({"ok":true})"},
           {R"({"op":"feed","session":"a","parent":null,"token_id":1})",
            R"({"reason":null,"result":"accepted","state":"h1"})"},
           {"garbage", R"({"error":"bad-request"})"},
       }) {
    char* out = nullptr;
    ASSERT_EQ(sqlgate_server_handle(server, request.data(), request.size(), &out), SQLGATE_OK);
    EXPECT_EQ(std::string(out), response);
    sqlgate_string_free(out);
  }
  sqlgate_server_free(server);
  sqlgate_vocab_free(v);
  sqlgate_schema_free(s);
}

TEST(CApi, ModeNames) {
  sqlgate_mode m;
  ASSERT_EQ(sqlgate_mode_from_name("parse-guards", &m), SQLGATE_OK);
  EXPECT_EQ(m, SQLGATE_MODE_PARSE_GUARDS);
  EXPECT_STREQ(sqlgate_mode_name(SQLGATE_MODE_LEX), "lex");
  EXPECT_EQ(sqlgate_mode_from_name("nope", &m), SQLGATE_ERR_ARGUMENT);
  sqlgate_timing t;
  ASSERT_EQ(sqlgate_timing_from_name("final", &t), SQLGATE_OK);
  EXPECT_STREQ(sqlgate_timing_name(t), "final");
}
