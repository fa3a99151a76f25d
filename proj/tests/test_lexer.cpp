#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "sqlgate/corpus.hpp"
#include "sqlgate/lexer.hpp"
#include "support.hpp"

using namespace sqlgate;

namespace {

LexOutcome lex_all(const Lexer& lexer, std::string_view text) { return lexer.feed(LexState{}, text); }

LexOutcome lex_chunks(const Lexer& lexer, const std::vector<std::string>& chunks) {
  LexState state;
  for (const std::string& c : chunks) {
    LexOutcome out = lexer.feed(state, c);
    if (!out.accepted()) return out;
    state = out.state();
  }
  return state;
}

bool lex_complete(const Lexer& lexer, std::string_view text) {
  LexOutcome fed = lex_all(lexer, text);
  return fed.accepted() && lexer.finalize(fed.state()).accepted();
}

class LexerTest : public ::testing::Test {
 protected:
  SqlSchema dogs = sqlgate::testing::load_fixture("dog_kennels");
  SqlSchema toy = sqlgate::testing::load_fixture("toy");
};

}  // namespace

TEST_F(LexerTest, CellPhoneRejectedAtBoundary) {
  Lexer lexer(dogs);
  LexOutcome out = lex_all(lexer, "select email_address, cell_phone ");
  ASSERT_FALSE(out.accepted());
  EXPECT_EQ(out.rejection().reason, Reason::InvalidIdentifier);
  // Rejected no later than the boundary after the word.
  EXPECT_LE(out.rejection().offset, std::string("select email_address, cell_phone").size());
  EXPECT_GE(out.rejection().offset, std::string("select email_address, cell_").size());
}

TEST_F(LexerTest, PendingPrefixIsAccepted) {
  Lexer lexer(dogs);
  LexOutcome out = lex_all(lexer, "select email_");
  ASSERT_TRUE(out.accepted());
  EXPECT_EQ(out.state().pending, "email_");
  ASSERT_EQ(out.state().items.size(), 1u);
  EXPECT_EQ(out.state().items[0].kind, LexKind::Keyword);
}

TEST_F(LexerTest, SelctIsUnknownKeyword) {
  Lexer lexer(toy);
  // Oracle: "selct" extends no keyword and no schema name.
  bool extends = false;
  for (std::size_t i = 0; i < kKeywordCount; ++i) {
    extends = extends || std::string(keyword_text(static_cast<Keyword>(i))).rfind("selct", 0) == 0;
  }
  for (const std::string& n : toy.all_names()) extends = extends || n.rfind("selct", 0) == 0;
  ASSERT_FALSE(extends);

  LexOutcome out = lex_all(lexer, "selct * from people");
  ASSERT_FALSE(out.accepted());
  EXPECT_EQ(out.rejection().reason, Reason::UnknownKeyword);
  EXPECT_LE(out.rejection().offset, 5u);
}

TEST_F(LexerTest, OrderInsensitive) {
  Lexer lexer(toy);
  EXPECT_TRUE(lex_complete(lexer, "from people select id"));
}

TEST_F(LexerTest, FinalizeNeedsCompleteItem) {
  Lexer lexer(dogs);
  LexOutcome partial = lex_all(lexer, "select email_");
  ASSERT_TRUE(partial.accepted());
  LexOutcome done = lexer.finalize(partial.state());
  ASSERT_FALSE(done.accepted());
  EXPECT_EQ(done.rejection().reason, Reason::IncompleteItem);

  EXPECT_TRUE(lexer.finalize(LexState{}).accepted());

  LexOutcome full = lex_all(lexer, "cell_number");
  ASSERT_TRUE(full.accepted());
  EXPECT_EQ(full.state().pending, "cell_number");
  EXPECT_TRUE(lexer.finalize(full.state()).accepted());
}

TEST_F(LexerTest, ClassifiesItems) {
  Lexer lexer(toy);
  LexOutcome fed = lex_all(lexer, "select people.id, t1.*, count(*) from people where name = 'o''neil' and age >= 3.5");
  ASSERT_TRUE(fed.accepted());
  LexOutcome out = lexer.finalize(fed.state());
  ASSERT_TRUE(out.accepted());
  std::vector<LexKind> kinds;
  for (const LexItem& i : out.state().items) kinds.push_back(i.kind);
  std::vector<LexKind> expected = {
      LexKind::Keyword,        LexKind::QualifiedIdentifier, LexKind::Punctuation, LexKind::QualifiedIdentifier,
      LexKind::Punctuation,    LexKind::Keyword,             LexKind::Punctuation, LexKind::Star,
      LexKind::Punctuation,    LexKind::Keyword,             LexKind::Identifier,  LexKind::Keyword,
      LexKind::Identifier,     LexKind::Operator,            LexKind::StringLiteral, LexKind::Keyword,
      LexKind::Identifier,     LexKind::Operator,            LexKind::NumberLiteral,
  };
  EXPECT_EQ(kinds, expected);
  EXPECT_EQ(out.state().items[14].text, "'o''neil'");
  // Spans are increasing and cover the text.
  for (std::size_t i = 1; i < out.state().items.size(); ++i) {
    EXPECT_LE(out.state().items[i - 1].end, out.state().items[i].begin);
  }
}

TEST_F(LexerTest, CaseFolding) {
  Lexer lexer(toy);
  LexOutcome out = lex_all(lexer, "SELECT Name FROM People ");
  ASSERT_TRUE(out.accepted());
  EXPECT_EQ(out.state().items[0].text, "select");
  EXPECT_EQ(out.state().items[1].text, "name");
}

TEST_F(LexerTest, AliasPatternAlwaysAdmissible) {
  Lexer lexer(toy);
  EXPECT_TRUE(lex_complete(lexer, "t1 t22 t1.name"));
  EXPECT_FALSE(lex_complete(lexer, "tx"));
}

TEST_F(LexerTest, LexicalErrors) {
  Lexer lexer(toy);
  auto reason = [&](std::string_view text) {
    LexOutcome fed = lex_all(lexer, text);
    if (!fed.accepted()) return std::optional<Reason>(fed.rejection().reason);
    LexOutcome done = lexer.finalize(fed.state());
    if (!done.accepted()) return std::optional<Reason>(done.rejection().reason);
    return std::optional<Reason>();
  };
  EXPECT_EQ(reason("select #"), Reason::IllegalCharacter);
  EXPECT_EQ(reason("select 1.2.3"), Reason::MalformedNumber);
  EXPECT_EQ(reason("select 'abc"), Reason::IncompleteItem);
  EXPECT_EQ(reason("select 12ab"), Reason::MalformedNumber);
  EXPECT_EQ(reason("where name = 'it''s'"), std::nullopt);
}

// Every prefix of an accepted text is accepted; chunking never changes the
// outcome; rejection is terminal.
TEST(LexerProperty, ChunkingAndPrefixClosure) {
  Rng rng(11);
  for (int round = 0; round < 40; ++round) {
    SqlSchema schema = random_schema(rng);
    Lexer lexer(schema);
    Corpus corpus = build_corpus(schema, rng(), 10, 10, 20);
    std::vector<std::string> texts = corpus.valid;
    for (const auto& m : corpus.invalid) texts.push_back(m.text);
    texts.insert(texts.end(), corpus.fuzz.begin(), corpus.fuzz.end());
    for (const std::string& text : texts) {
      LexOutcome whole = lex_all(lexer, text);
      for (int c = 0; c < 3; ++c) {
        LexOutcome split = lex_chunks(lexer, random_chunking(text, rng, 1 + c * 3));
        ASSERT_EQ(split.accepted(), whole.accepted()) << text;
        if (whole.accepted()) {
          EXPECT_EQ(split.state().items, whole.state().items);
          EXPECT_EQ(split.state().pending, whole.state().pending);
        } else {
          EXPECT_EQ(split.rejection().reason, whole.rejection().reason);
          EXPECT_EQ(split.rejection().offset, whole.rejection().offset);
        }
      }
      if (whole.accepted()) {
        for (std::size_t n = 0; n <= text.size(); ++n) {
          ASSERT_TRUE(lex_all(lexer, text.substr(0, n)).accepted()) << text.substr(0, n);
        }
      } else {
        // Earliest rejection: the prefix up to the offset survives.
        const std::size_t o = whole.rejection().offset;
        LexOutcome head = lex_all(lexer, text.substr(0, o));
        ASSERT_TRUE(head.accepted()) << text << " @" << o;
        EXPECT_FALSE(lexer.feed(head.state(), text.substr(o)).accepted());
      }
    }
  }
}

// Rejected states stay rejected whatever is appended.
TEST(LexerProperty, MonotoneRejection) {
  SqlSchema schema = sqlgate::testing::load_fixture("toy");
  Lexer lexer(schema);
  for (std::string bad : {"selct", "select #", "select 1.2.", "peoplex "}) {
    LexOutcome out = lex_all(lexer, bad);
    ASSERT_FALSE(out.accepted()) << bad;
    for (std::string tail : {"", " ", " from people", "'x'", "1"}) {
      EXPECT_FALSE(lex_all(lexer, bad + tail).accepted()) << bad + tail;
    }
  }
}

// Permuting the whitespace-separated items of an accepted stream keeps it accepted.
TEST(LexerProperty, OrderInsensitivity) {
  Rng rng(5);
  SqlSchema schema = sqlgate::testing::load_fixture("toy");
  Lexer lexer(schema);
  for (int i = 0; i < 200; ++i) {
    std::string q = random_valid_query(schema, rng, QueryShape{2, false, false});
    std::istringstream in(q);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    // Quoted literals may contain spaces; leave those queries alone.
    if (q.find('\'') != std::string::npos) continue;
    std::shuffle(words.begin(), words.end(), rng);
    std::string permuted;
    for (const auto& w : words) permuted += (permuted.empty() ? "" : " ") + w;
    EXPECT_TRUE(lex_complete(lexer, permuted)) << permuted;
  }
}
