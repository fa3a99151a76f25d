#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqlgate/decoder.hpp"
#include "sqlgate/schema.hpp"
#include "sqlgate/scoring_model.hpp"
#include "sqlgate/vocabulary.hpp"

namespace sqlgate::testing {

// Absolute path of a file under testdata/.
std::string testdata(const std::string& name);

SqlSchema load_fixture(const std::string& name);  // "car_1" -> testdata/car_1.json

// Full-string verdict of `mode`, from the reference parser for the parsing
// modes and from a whole-text lex for Lexing.
bool oracle_accepts(const SqlSchema& schema, Mode mode, std::string_view text);

struct Enumeration {
  std::optional<std::vector<int>> best;  // ends with eos
  double score = 0.0;
  std::size_t valid = 0;  // valid sequences seen (all of them when !prune)
};

// Exhaustive search over token sequences of at most `max_length` tokens that
// end in eos, ranked by summed model score. With `prune`, branches whose
// partial score already falls below the best complete one are cut.
Enumeration enumerate_valid(const ScoringModel& model, const Vocabulary& vocab, const SqlSchema& schema, Mode mode,
                            int max_length, bool prune = true);

// A six-token problem over the toy schema: five pieces drawn from a small
// pool plus eos, and a noise-only scripted model.
struct MicroInstance {
  std::shared_ptr<const SqlSchema> schema;
  std::shared_ptr<const Vocabulary> vocab;
  std::shared_ptr<const ScriptedModel> model;
};
// Retries until some sequence of at most `max_length` tokens is valid with guards.
MicroInstance make_micro_instance(std::uint64_t seed, int max_length = 8);


}  // namespace sqlgate::testing
