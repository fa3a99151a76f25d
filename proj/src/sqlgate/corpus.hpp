#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sqlgate/decoder.hpp"
#include "sqlgate/schema.hpp"

namespace sqlgate {

using Rng = std::mt19937_64;

struct SchemaShape {
  int max_tables = 6;
  int max_columns = 6;
};

// Random schema over a fixed name pool; column names recur across tables so
// bare references can be ambiguous. No name matches the default alias pattern.
SqlSchema random_schema(Rng& rng, const SchemaShape& shape = {});

struct QueryShape {
  int max_from = 3;
  bool allow_subqueries = true;
  bool allow_set_ops = true;
};

// A query accepted in every checking mode against `schema`.
std::string random_valid_query(const SqlSchema& schema, Rng& rng, const QueryShape& shape = {});

enum class Mutation : std::uint8_t { KeywordTypo, OutOfTableColumn, ClauseReorder, AliasDuplication };
std::string_view mutation_name(Mutation m);

struct MutatedQuery {
  std::string text;
  Mutation mutation;
  // The weakest mode that is expected to reject the text.
  Mode catching_mode;
};

// Applies `mutation` to a generated valid query. nullopt when the query
// offers no site for it.
std::optional<MutatedQuery> random_mutation(const SqlSchema& schema, Rng& rng, Mutation mutation,
                                            const QueryShape& shape = {});

// Token soup and character-level corruptions of valid queries.
std::string random_fuzz_string(const SqlSchema& schema, Rng& rng);

struct Corpus {
  std::vector<std::string> valid;
  std::vector<MutatedQuery> invalid;
  std::vector<std::string> fuzz;
};

Corpus build_corpus(const SqlSchema& schema, std::uint64_t seed, std::size_t valid, std::size_t invalid,
                    std::size_t fuzz);

// Splits `text` at random points into `pieces` chunks (some possibly empty).
std::vector<std::string> random_chunking(std::string_view text, Rng& rng, int pieces);

}  // namespace sqlgate
