#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "sqlgate/corpus.hpp"
#include "sqlgate/parser.hpp"
#include "sqlgate/reference_parser.hpp"
#include "support.hpp"

using namespace sqlgate;

namespace {

ParseOutcome feed_chunks(const SqlParser& parser, const std::vector<std::string>& chunks) {
  ParseState state = parser.initial();
  for (const std::string& c : chunks) {
    ParseOutcome out = parser.feed(state, c);
    if (out.rejected()) return out;
    state = out.state();
  }
  return parser.finalize(state);
}

std::optional<Reason> verdict(const ParseOutcome& out) {
  if (out.rejected()) return out.rejection().reason;
  return std::nullopt;
}

class ParserTest : public ::testing::Test {
 protected:
  SqlSchema dogs = sqlgate::testing::load_fixture("dog_kennels");
  SqlSchema toy = sqlgate::testing::load_fixture("toy");
  SqlSchema cars = sqlgate::testing::load_fixture("car_1");
};

}  // namespace

TEST_F(ParserTest, QualifiedColumnMembership) {
  SqlParser parser(dogs);
  EXPECT_TRUE(parser.parse_full("select professionals.cell_number from professionals").completed());

  // weight exists, but only in dogs: "professionals.w" already has no continuation.
  const std::string text = "select professionals.weight from professionals";
  ParseOutcome out = parser.parse_full(text);
  ASSERT_TRUE(out.rejected());
  EXPECT_EQ(out.rejection().reason, Reason::ColumnNotInTable);
  EXPECT_EQ(out.rejection().offset, text.find("weight"));
}

TEST_F(ParserTest, LaterAliasBindingMustProvideColumn) {
  SqlParser parser(toy);
  const std::string text = "select t1.age from people as t1";
  ParseOutcome out = parser.parse_full(text);
  ASSERT_TRUE(out.rejected());
  EXPECT_EQ(out.rejection().reason, Reason::AliasColumnMismatch);
  EXPECT_GE(out.rejection().offset, text.find("as t1"));

  EXPECT_TRUE(parser.parse_full("select t1.age from pets as t1").completed());
}

TEST_F(ParserTest, DuplicateAliasInOneScope) {
  SqlParser parser(toy);
  const std::string text = "select * from people as t1 join pets as t1 on t1.id = t1.owner_id";
  ParseOutcome out = parser.parse_full(text);
  ASSERT_TRUE(out.rejected());
  EXPECT_EQ(out.rejection().reason, Reason::DuplicateAlias);
  EXPECT_GT(out.rejection().offset, text.find("as t1"));
  EXPECT_LE(out.rejection().offset, text.find(" on"));
}

TEST_F(ParserTest, InnerScopeShadowsOuterAlias) {
  const std::string text = "select id from people as t1 where id in (select id from pets as t1)";
  EXPECT_TRUE(SqlParser(toy).parse_full(text).completed());
  EXPECT_TRUE(SqlParser(toy, ParserOptions{true, AliasPattern()}).parse_full(text).completed());
}

TEST_F(ParserTest, ClauseOrderMatters) {
  SqlParser parser(toy);
  ParseOutcome out = parser.parse_full("from people select id");
  ASSERT_TRUE(out.rejected());
  EXPECT_EQ(out.rejection().reason, Reason::Syntax);
  EXPECT_EQ(out.rejection().offset, 0u);

  out = parser.parse_full("select id where id = 1 from people");
  ASSERT_TRUE(out.rejected());
  EXPECT_EQ(out.rejection().reason, Reason::Syntax);
}

TEST_F(ParserTest, FinalizeOutcomes) {
  SqlParser parser(toy);
  ParseOutcome done = parser.parse_full("select id from people");
  ASSERT_TRUE(done.completed());
  const SelectCore& core = std::get<SelectCore>(done.ast().operands.at(0));
  EXPECT_EQ(core.items.size(), 1u);
  EXPECT_EQ(core.from.size(), 1u);

  ParseOutcome cut = parser.parse_full("select id from");
  ASSERT_TRUE(cut.rejected());
  EXPECT_EQ(cut.rejection().reason, Reason::IncompleteQuery);

  EXPECT_TRUE(parser.parse_full("select count(*) from heads where age > 56").completed());

  ParseOutcome empty = parser.parse_full("");
  ASSERT_TRUE(empty.rejected());
  EXPECT_EQ(empty.rejection().reason, Reason::IncompleteQuery);
}

TEST_F(ParserTest, UnknownTable) {
  SqlParser parser(toy);
  ParseOutcome out = parser.parse_full("select id from peoplex");
  ASSERT_TRUE(out.rejected());
  // "peoplex" is no name at all, so the lexer catches it first.
  EXPECT_EQ(reason_category(out.rejection().reason), ReasonCategory::Lexical);

  out = parser.parse_full("select id from name");
  ASSERT_TRUE(out.rejected());
  EXPECT_EQ(out.rejection().reason, Reason::UnknownTable);
}

TEST_F(ParserTest, UnboundAliasToleratedWithoutGuards) {
  const std::string text = "select t5.name from people";
  EXPECT_TRUE(SqlParser(toy).parse_full(text).completed());
  EXPECT_TRUE(SqlParser(toy, ParserOptions{true, AliasPattern()}).parse_full(text).rejected());
}

TEST_F(ParserTest, BareColumnsNotCheckedWithoutGuards) {
  EXPECT_TRUE(SqlParser(cars).parse_full("select maker, model from car_makers").completed());
}

TEST_F(ParserTest, GrammarCoverage) {
  SqlParser parser(toy, ParserOptions{true, AliasPattern()});
  for (const char* q : {
           "select distinct name from people order by name desc limit 3",
           "select city, count(*) from people group by city having count(*) > 1",
           "select t1.name from people as t1 join pets as t2 on t1.id = t2.owner_id where t2.age between 1 and 5",
           "select name from people where name like 'a%' and city is not null",
           "select name from people where not exists (select * from pets where owner_id = 3)",
           "select name from people union select name from heads",
           "select id from people except select owner_id from pets",
           "select avg(age), max(age), min(age), sum(age) from pets",
           "select t1.species from (select species from pets) as t1",
           "select name from people where id = (select max(owner_id) from pets)",
           "select people.name from people, pets where people.id = pets.owner_id",
           "select -age + 1 * 2 / 3 - (4) from pets where age != 1 and age <> 2 or age <= 3",
           "select name from people where id not in (select owner_id from pets);",
       }) {
    ParseOutcome out = parser.parse_full(q);
    EXPECT_TRUE(out.completed()) << q << " -> "
                                 << (out.rejected() ? std::string(reason_name(out.rejection().reason)) + " " +
                                                          out.rejection().detail
                                                    : "incomplete");
  }
}

TEST_F(ParserTest, AstJsonDebugForm) {
  SqlParser parser(toy);
  ParseOutcome out = parser.parse_full("select name from people where id = 1");
  ASSERT_TRUE(out.completed());
  nlohmann::json j = to_json(out.ast());
  EXPECT_TRUE(j.is_object());
  EXPECT_NE(j.dump().find("people"), std::string::npos);
}

TEST_F(ParserTest, EmptyChunkIsIdentity) {
  SqlParser parser(toy);
  ParseOutcome a = parser.feed(parser.initial(), "select na");
  ASSERT_TRUE(a.accepted());
  ParseOutcome b = parser.feed(a.state(), "");
  ASSERT_TRUE(b.accepted());
  EXPECT_EQ(b.state().lex.items, a.state().lex.items);
  EXPECT_EQ(b.state().lex.pending, a.state().lex.pending);
  EXPECT_EQ(b.state().machine.depth(), a.state().machine.depth());
}

TEST_F(ParserTest, IncrementalAstMatchesReference) {
  SqlParser parser(toy);
  ParserContext ctx(toy, ParserOptions{});
  const std::string text = "select t1.name, count(*) from people as t1 join pets on t1.id = pets.owner_id group by t1.name";
  ParseOutcome out = feed_chunks(parser, {"select t1.na", "me, cou", "nt(*) from peo", "ple as t1 join pets on t1.id = pets.owner_id group by t1.name"});
  ASSERT_TRUE(out.completed());
  ReferenceResult ref = reference_check(ctx, text);
  ASSERT_TRUE(ref.accepted());
  EXPECT_TRUE(out.ast() == *ref.ast);
}

// Chunking independence, incremental/oracle agreement, earliest and monotone
// rejection over generated corpora in both parsing modes.
TEST(ParserProperty, CorpusDifferential) {
  Rng rng(23);
  for (int round = 0; round < 30; ++round) {
    SqlSchema schema = random_schema(rng);
    Corpus corpus = build_corpus(schema, rng(), 15, 15, 15);
    std::vector<std::string> texts = corpus.valid;
    for (const auto& m : corpus.invalid) texts.push_back(m.text);
    texts.insert(texts.end(), corpus.fuzz.begin(), corpus.fuzz.end());
    for (bool guards : {false, true}) {
      SqlParser parser(schema, ParserOptions{guards, AliasPattern()});
      for (const std::string& text : texts) {
        ParseOutcome whole = parser.parse_full(text);
        ReferenceResult ref = reference_check(parser.context(), text);
        ASSERT_EQ(whole.completed(), ref.accepted()) << text << " guards=" << guards;
        if (whole.completed()) {
          EXPECT_TRUE(whole.ast() == *ref.ast) << text;
        } else if (ref.rejection->reason != Reason::IncompleteItem &&
                   !(reason_category(ref.rejection->reason) == ReasonCategory::Lexical &&
                     whole.rejection().offset < ref.rejection->offset)) {
          // The reference sees whole items only, so it cannot fault a word that
          // went wrong before the lexer gave up on it.
          EXPECT_EQ(reason_category(whole.rejection().reason), reason_category(ref.rejection->reason))
              << text << ": " << reason_name(whole.rejection().reason) << " vs " << reason_name(ref.rejection->reason);
        }
        for (int c = 0; c < 3; ++c) {
          ParseOutcome split = feed_chunks(parser, random_chunking(text, rng, 2 + c * 4));
          ASSERT_EQ(verdict(split), verdict(whole)) << text;
          if (split.rejected()) EXPECT_EQ(split.rejection().offset, whole.rejection().offset) << text;
        }
        if (whole.rejected()) {
          const std::size_t o = whole.rejection().offset;
          ParseOutcome head = parser.feed(parser.initial(), text.substr(0, o));
          ASSERT_FALSE(head.rejected()) << text << " @" << o;
          if (o < text.size()) {
            EXPECT_TRUE(parser.feed(head.state(), text.substr(o)).rejected()) << text << " @" << o;
          }
        }
      }
    }
  }
}

// Every prefix of a valid query is accepted by the incremental parser.
TEST(ParserProperty, PrefixClosure) {
  Rng rng(31);
  for (int round = 0; round < 20; ++round) {
    SqlSchema schema = random_schema(rng);
    SqlParser parser(schema, ParserOptions{true, AliasPattern()});
    for (int i = 0; i < 10; ++i) {
      std::string q = random_valid_query(schema, rng);
      ParseState state = parser.initial();
      for (char c : q) {
        ParseOutcome out = parser.feed(state, std::string(1, c));
        ASSERT_TRUE(out.accepted()) << q;
        state = out.state();
      }
      EXPECT_TRUE(parser.finalize(state).completed()) << q;
    }
  }
}
