#include "sqlgate/corpus.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "sqlgate/lexer.hpp"

namespace sqlgate {
namespace {

constexpr std::array<std::string_view, 16> kTablePool = {
    "singer", "concert", "stadium", "museum", "visitor", "airline", "airport", "flight",
    "student", "course", "teacher", "department", "employee", "company", "product", "customer"};

constexpr std::array<std::string_view, 20> kColumnPool = {
    "id", "name", "age", "country", "year", "capacity", "title", "city", "price", "rank",
    "score", "salary", "budget", "location", "population", "height", "weight", "code", "status", "rating"};

constexpr std::array<std::string_view, 5> kAggregates = {"count", "sum", "avg", "min", "max"};
constexpr std::array<std::string_view, 6> kComparisons = {"=", "!=", "<", "<=", ">", ">="};

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <typename C>
const auto& pick(Rng& rng, const C& c) {
  return c[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(c.size()) - 1))];
}

std::string random_word(Rng& rng, int lo, int hi) {
  std::string w;
  int n = uniform(rng, lo, hi);
  for (int i = 0; i < n; ++i) w += static_cast<char>('a' + uniform(rng, 0, 25));
  return w;
}

struct GenTarget {
  std::string table;  // empty for a sub-query
  std::optional<std::string> alias;
  std::vector<std::string> columns;
};

struct GenScope {
  std::vector<GenTarget> targets;
  std::size_t providers(const std::string& column) const {
    std::size_t n = 0;
    for (const GenTarget& t : targets) n += static_cast<std::size_t>(std::count(t.columns.begin(), t.columns.end(), column));
    return n;
  }
};

struct Site {
  std::size_t begin = 0;
  std::size_t end = 0;
  Mutation kind = Mutation::KeywordTypo;
  std::vector<std::string> replacements;
  Mode mode = Mode::Lexing;
};

struct Reorder {
  std::size_t from_begin = 0;
  std::size_t where_begin = 0;
  std::size_t where_end = 0;
};

// Builds one query text and remembers where each mutation could apply.
class QueryBuilder {
 public:
  QueryBuilder(const SqlSchema& schema, Rng& rng, QueryShape shape) : schema_(schema), rng_(rng), shape_(shape) {}

  std::string build() {
    core(0, nullptr);
    if (shape_.allow_set_ops && chance(rng_, 0.1)) {
      out_ += ' ';
      keyword(chance(rng_, 0.5) ? "union" : (chance(rng_, 0.5) ? "intersect" : "except"));
      out_ += ' ';
      core(1, nullptr);
    }
    return out_;
  }

  const std::vector<Site>& sites() const { return sites_; }
  const std::optional<Reorder>& reorder() const { return reorder_; }

 private:
  void keyword(std::string_view kw) {
    sites_.push_back(Site{out_.size(), out_.size() + kw.size(), Mutation::KeywordTypo, {}, Mode::Lexing});
    out_ += kw;
  }

  GenTarget table_target(const Table& t) { return GenTarget{t.name, std::nullopt, t.columns}; }

  void column_ref(const GenScope& scope) {
    const GenTarget& target = pick(rng_, scope.targets);
    const std::string& column = pick(rng_, target.columns);
    const bool bare_ok = scope.providers(column) == 1;
    Site site;
    site.kind = Mutation::OutOfTableColumn;
    if (target.alias && (!bare_ok || chance(rng_, 0.7))) {
      out_ += *target.alias + ".";
      site.begin = out_.size();
      out_ += column;
      site.mode = Mode::ParsingNoGuards;
      for (const std::string& c : schema_.column_names()) {
        if (std::find(target.columns.begin(), target.columns.end(), c) == target.columns.end()) {
          site.replacements.push_back(c);
        }
      }
    } else if (bare_ok && (target.table.empty() || chance(rng_, 0.6))) {
      site.begin = out_.size();
      out_ += column;
      site.mode = Mode::ParsingWithGuards;
      for (const std::string& c : schema_.column_names()) {
        if (scope.providers(c) == 0) site.replacements.push_back(c);
      }
    } else {
      out_ += target.table + ".";
      site.begin = out_.size();
      out_ += column;
      site.mode = Mode::ParsingNoGuards;
      for (const std::string& c : schema_.column_names()) {
        if (!schema_.table_has_column(target.table, c)) site.replacements.push_back(c);
      }
    }
    site.end = out_.size();
    if (!site.replacements.empty()) sites_.push_back(std::move(site));
  }

  void number() {
    if (chance(rng_, 0.8)) {
      out_ += std::to_string(uniform(rng_, 0, 500));
    } else {
      out_ += std::to_string(uniform(rng_, 0, 99)) + "." + std::to_string(uniform(rng_, 0, 9));
    }
  }

  void string_literal() {
    out_ += "'" + random_word(rng_, 1, 6);
    if (chance(rng_, 0.1)) out_ += "''s";
    out_ += "'";
  }

  // A one-table select of one bare column, used in `in (...)` and in set ops.
  void simple_core() {
    const Table& t = pick(rng_, schema_.tables());
    keyword("select");
    out_ += " " + pick(rng_, t.columns) + " ";
    keyword("from");
    out_ += " " + t.name;
  }

  void condition(const GenScope& scope, int depth) {
    switch (uniform(rng_, 0, 8)) {
      case 0:
      case 1:
        column_ref(scope);
        out_ += std::string(" ") + std::string(pick(rng_, kComparisons)) + " ";
        number();
        break;
      case 2:
        column_ref(scope);
        out_ += " = ";
        string_literal();
        break;
      case 3:
        column_ref(scope);
        out_ += " ";
        if (chance(rng_, 0.3)) {
          keyword("not");
          out_ += " ";
        }
        keyword("like");
        out_ += " '%" + random_word(rng_, 1, 3) + "%'";
        break;
      case 4:
        column_ref(scope);
        out_ += " ";
        keyword("between");
        out_ += " ";
        number();
        out_ += " ";
        keyword("and");
        out_ += " ";
        number();
        break;
      case 5:
        column_ref(scope);
        out_ += " ";
        keyword("is");
        out_ += " ";
        if (chance(rng_, 0.5)) {
          keyword("not");
          out_ += " ";
        }
        keyword("null");
        break;
      case 6:
        keyword("not");
        out_ += " (";
        column_ref(scope);
        out_ += " > ";
        number();
        out_ += ")";
        break;
      case 7:
        column_ref(scope);
        out_ += " ";
        keyword("in");
        out_ += " (";
        if (depth == 0 && shape_.allow_subqueries) {
          simple_core();
        } else {
          number();
          out_ += ", ";
          number();
        }
        out_ += ")";
        break;
      default:
        column_ref(scope);
        out_ += " > ";
        column_ref(scope);
        out_ += " + ";
        number();
        break;
    }
  }

  void select_item(const GenScope& scope) {
    int r = uniform(rng_, 0, 9);
    if (r < 6) {
      column_ref(scope);
    } else if (r < 8) {
      std::string_view agg = pick(rng_, kAggregates);
      keyword(agg);
      out_ += "(";
      if (agg == "count" && chance(rng_, 0.3)) {
        keyword("distinct");
        out_ += " ";
      }
      column_ref(scope);
      out_ += ")";
    } else {
      keyword("count");
      out_ += "(*)";
    }
  }

  void core(int depth, GenScope* scope_out) {
    // Decide the from clause first so references can be drawn from it.
    GenScope scope;
    const auto tables = schema_.tables();
    const int n_tables = static_cast<int>(tables.size());
    int n = std::min({shape_.max_from, n_tables, chance(rng_, 0.55) ? 1 : uniform(rng_, 2, 3)});
    std::vector<std::size_t> order(tables.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng_);
    const bool aliased = n > 1 || chance(rng_, 0.3);
    bool sub_first = depth == 0 && shape_.allow_subqueries && chance(rng_, 0.15);
    std::vector<std::string> sub_columns;
    const Table* sub_table = nullptr;
    for (int i = 0; i < n; ++i) {
      GenTarget t = table_target(tables[order[static_cast<std::size_t>(i)]]);
      if (aliased) t.alias = "t" + std::to_string(i + 1);
      if (i == 0 && sub_first) {
        sub_table = &tables[order[0]];
        std::vector<std::string> cols = sub_table->columns;
        std::shuffle(cols.begin(), cols.end(), rng_);
        cols.resize(std::min<std::size_t>(cols.size(), static_cast<std::size_t>(uniform(rng_, 1, 2))));
        t.table.clear();
        t.columns = cols;
        t.alias = "t" + std::to_string(i + 1);
      }
      scope.targets.push_back(std::move(t));
    }

    keyword("select");
    out_ += " ";
    if (chance(rng_, 0.15)) {
      keyword("distinct");
      out_ += " ";
    }
    if (chance(rng_, 0.15)) {
      out_ += "*";
    } else {
      int items = uniform(rng_, 1, 3);
      for (int i = 0; i < items; ++i) {
        if (i) out_ += ", ";
        select_item(scope);
      }
    }
    out_ += " ";
    const std::size_t from_begin = out_.size();
    keyword("from");
    out_ += " ";
    std::vector<std::pair<std::size_t, std::size_t>> alias_sites;
    for (std::size_t i = 0; i < scope.targets.size(); ++i) {
      const GenTarget& t = scope.targets[i];
      bool join = false;
      if (i > 0) {
        join = chance(rng_, 0.5);
        if (join) {
          out_ += " ";
          keyword("join");
          out_ += " ";
        } else {
          out_ += ", ";
        }
      }
      if (t.table.empty()) {
        out_ += "(";
        keyword("select");
        out_ += " ";
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
          if (c) out_ += ", ";
          out_ += t.columns[c];
        }
        out_ += " ";
        keyword("from");
        out_ += " " + sub_table->name + ")";
      } else {
        out_ += t.table;
      }
      if (t.alias) {
        out_ += " ";
        keyword("as");
        out_ += " ";
        alias_sites.emplace_back(out_.size(), out_.size() + t.alias->size());
        out_ += *t.alias;
      }
      if (join && chance(rng_, 0.8)) {
        out_ += " ";
        keyword("on");
        out_ += " ";
        column_ref(scope);
        out_ += " = ";
        column_ref(scope);
      }
    }
    if (alias_sites.size() >= 2) {
      const auto& first = alias_sites[0];
      const auto& second = alias_sites[static_cast<std::size_t>(uniform(rng_, 1, static_cast<int>(alias_sites.size()) - 1))];
      Site s{second.first, second.second, Mutation::AliasDuplication,
             {out_.substr(first.first, first.second - first.first)}, Mode::ParsingNoGuards};
      sites_.push_back(std::move(s));
    }
    if (chance(rng_, 0.5)) {
      out_ += " ";
      const std::size_t where_begin = out_.size();
      keyword("where");
      out_ += " ";
      condition(scope, depth);
      if (chance(rng_, 0.3)) {
        out_ += " ";
        keyword(chance(rng_, 0.5) ? "and" : "or");
        out_ += " ";
        condition(scope, depth);
      }
      if (depth == 0 && !reorder_) reorder_ = Reorder{from_begin, where_begin, out_.size()};
    }
    if (chance(rng_, 0.25)) {
      out_ += " ";
      keyword("group");
      out_ += " ";
      keyword("by");
      out_ += " ";
      column_ref(scope);
      if (chance(rng_, 0.5)) {
        out_ += " ";
        keyword("having");
        out_ += " ";
        keyword("count");
        out_ += "(*) > ";
        number();
      }
    }
    if (chance(rng_, 0.25)) {
      out_ += " ";
      keyword("order");
      out_ += " ";
      keyword("by");
      out_ += " ";
      if (chance(rng_, 0.3)) {
        keyword("count");
        out_ += "(*)";
      } else {
        column_ref(scope);
      }
      if (chance(rng_, 0.6)) {
        out_ += " ";
        keyword(chance(rng_, 0.5) ? "asc" : "desc");
      }
    }
    if (chance(rng_, 0.2)) {
      out_ += " ";
      keyword("limit");
      out_ += " " + std::to_string(uniform(rng_, 1, 20));
    }
    if (scope_out) *scope_out = std::move(scope);
  }

  const SqlSchema& schema_;
  Rng& rng_;
  QueryShape shape_;
  std::string out_;
  std::vector<Site> sites_;
  std::optional<Reorder> reorder_;
};

std::optional<std::string> keyword_typo(const Lexer& lexer, std::string_view word, Rng& rng) {
  for (int attempt = 0; attempt < 20; ++attempt) {
    std::string w(word);
    const std::size_t i = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(w.size()) - 1));
    switch (uniform(rng, 0, 3)) {
      case 0:
        if (w.size() > 1) w.erase(i, 1);
        break;
      case 1:
        if (i + 1 < w.size()) std::swap(w[i], w[i + 1]);
        break;
      case 2:
        w.insert(i, 1, w[i]);
        break;
      default:
        w[i] = static_cast<char>('a' + uniform(rng, 0, 25));
        break;
    }
    // Must be dead as soon as the word ends.
    if (!w.empty() && !lexer.is_complete_word(w)) return w;
  }
  return std::nullopt;
}

}  // namespace

std::string_view mutation_name(Mutation m) {
  switch (m) {
    case Mutation::KeywordTypo: return "keyword-typo";
    case Mutation::OutOfTableColumn: return "out-of-table-column";
    case Mutation::ClauseReorder: return "clause-reorder";
    case Mutation::AliasDuplication: return "alias-duplication";
  }
  return "?";
}

SqlSchema random_schema(Rng& rng, const SchemaShape& shape) {
  std::vector<std::string_view> tables(kTablePool.begin(), kTablePool.end());
  std::shuffle(tables.begin(), tables.end(), rng);
  const int n = uniform(rng, 1, std::min<int>(shape.max_tables, static_cast<int>(tables.size())));
  std::vector<Table> out;
  for (int i = 0; i < n; ++i) {
    std::vector<std::string_view> cols(kColumnPool.begin(), kColumnPool.end());
    std::shuffle(cols.begin(), cols.end(), rng);
    const int m = uniform(rng, 1, std::min<int>(shape.max_columns, static_cast<int>(cols.size())));
    Table t{std::string(tables[static_cast<std::size_t>(i)]), {}};
    for (int j = 0; j < m; ++j) t.columns.emplace_back(cols[static_cast<std::size_t>(j)]);
    out.push_back(std::move(t));
  }
  return SqlSchema("random", std::move(out));
}

std::string random_valid_query(const SqlSchema& schema, Rng& rng, const QueryShape& shape) {
  return QueryBuilder(schema, rng, shape).build();
}

std::optional<MutatedQuery> random_mutation(const SqlSchema& schema, Rng& rng, Mutation mutation,
                                            const QueryShape& shape) {
  Lexer lexer(schema);
  for (int attempt = 0; attempt < 50; ++attempt) {
    QueryBuilder builder(schema, rng, shape);
    std::string text = builder.build();
    if (mutation == Mutation::ClauseReorder) {
      if (!builder.reorder()) continue;
      const Reorder& r = *builder.reorder();
      std::string from = text.substr(r.from_begin, r.where_begin - 1 - r.from_begin);
      std::string where = text.substr(r.where_begin, r.where_end - r.where_begin);
      std::string out = text.substr(0, r.from_begin) + where + " " + from + text.substr(r.where_end);
      return MutatedQuery{std::move(out), mutation, Mode::ParsingNoGuards};
    }
    std::vector<const Site*> sites;
    for (const Site& s : builder.sites()) {
      if (s.kind == mutation) sites.push_back(&s);
    }
    if (sites.empty()) continue;
    const Site& site = *pick(rng, sites);
    std::string replacement;
    if (mutation == Mutation::KeywordTypo) {
      auto typo = keyword_typo(lexer, std::string_view(text).substr(site.begin, site.end - site.begin), rng);
      if (!typo) continue;
      replacement = *typo;
    } else {
      replacement = pick(rng, site.replacements);
    }
    std::string out = text.substr(0, site.begin) + replacement + text.substr(site.end);
    return MutatedQuery{std::move(out), mutation, site.mode};
  }
  return std::nullopt;
}

std::string random_fuzz_string(const SqlSchema& schema, Rng& rng) {
  const int style = uniform(rng, 0, 9);
  if (style < 4) {
    std::vector<std::string> pool = {",", ".", "(", ")", "*", "=", "<", ">=", "!=", ";", "'ab'", "'x", "3", "2.5", "t1", "t2"};
    for (std::size_t i = 0; i < kKeywordCount; ++i) pool.emplace_back(keyword_text(static_cast<Keyword>(i)));
    for (const std::string& n : schema.all_names()) pool.push_back(n);
    std::string out;
    const int n = uniform(rng, 1, 14);
    for (int i = 0; i < n; ++i) {
      if (i && chance(rng, 0.8)) out += ' ';
      if (chance(rng, 0.05)) {
        out += random_word(rng, 1, 5);
      } else if (chance(rng, 0.1)) {
        out += pick(rng, schema.tables()).name + "." + (chance(rng, 0.2) ? std::string("*") : pick(rng, schema.column_names()));
      } else {
        out += pick(rng, pool);
      }
    }
    return out;
  }
  std::string q = random_valid_query(schema, rng);
  if (style < 8) {
    static constexpr std::string_view kChars = "abcdefghijklmnopqrstuvwxyz_0123456789 .,()*=<>!'-+/;#\"";
    const int edits = uniform(rng, 1, 3);
    for (int e = 0; e < edits && !q.empty(); ++e) {
      const std::size_t i = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(q.size()) - 1));
      const char c = kChars[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(kChars.size()) - 1))];
      switch (uniform(rng, 0, 2)) {
        case 0: q.insert(i, 1, c); break;
        case 1: q.erase(i, 1); break;
        default: q[i] = c; break;
      }
    }
    return q;
  }
  return q.substr(0, static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(q.size()))));
}

Corpus build_corpus(const SqlSchema& schema, std::uint64_t seed, std::size_t valid, std::size_t invalid,
                    std::size_t fuzz) {
  Rng rng(seed);
  Corpus c;
  for (std::size_t i = 0; i < valid; ++i) c.valid.push_back(random_valid_query(schema, rng));
  constexpr std::array<Mutation, 4> kMutations = {Mutation::KeywordTypo, Mutation::OutOfTableColumn,
                                                  Mutation::ClauseReorder, Mutation::AliasDuplication};
  for (std::size_t i = 0; c.invalid.size() < invalid && i < invalid * 10; ++i) {
    if (auto m = random_mutation(schema, rng, kMutations[i % kMutations.size()])) c.invalid.push_back(std::move(*m));
  }
  for (std::size_t i = 0; i < fuzz; ++i) c.fuzz.push_back(random_fuzz_string(schema, rng));
  return c;
}

std::vector<std::string> random_chunking(std::string_view text, Rng& rng, int pieces) {
  std::vector<std::size_t> cuts;
  for (int i = 1; i < pieces; ++i) cuts.push_back(static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(text.size()))));
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::string> out;
  std::size_t prev = 0;
  for (std::size_t c : cuts) {
    out.emplace_back(text.substr(prev, c - prev));
    prev = c;
  }
  out.emplace_back(text.substr(prev));
  return out;
}

}  // namespace sqlgate
