#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqlgate/corpus.hpp"
#include "sqlgate/decoder.hpp"
#include "sqlgate/schema.hpp"
#include "sqlgate/scoring_model.hpp"
#include "sqlgate/vocabulary.hpp"

namespace sqlgate {

// The kinds of wrong turn a path model is tempted into, by the weakest mode
// that catches each.
enum class Distractor : std::uint8_t { Lexical, Syntax, Schema, Guard };
std::string_view distractor_name(Distractor d);

struct InstanceShape {
  SchemaShape schema{6, 6};
  int max_vocab = 64;
  int max_length = 24;
  int max_distractors = 4;
  // Fraction of instances without any distractor.
  double clean_fraction = 0.15;
  double target_bonus = 12.0;
  double distractor_bonus = 13.0;
  double noise = 1.0;
};

struct Branch {
  Distractor kind;
  std::vector<int> tokens;  // full sequence, ends with eos
};

// One decoding problem: a schema, a vocabulary and a scripted model steered
// towards a valid target sequence, with higher-scored distractor branches.
struct Instance {
  std::shared_ptr<const SqlSchema> schema;
  std::shared_ptr<const Vocabulary> vocabulary;
  std::shared_ptr<const ScriptedModel> model;
  std::vector<int> target;  // ends with eos
  std::vector<Branch> branches;
  int max_length = 24;
};

Instance make_instance(std::uint64_t seed, const InstanceShape& shape = {});

// Splits a query into vocabulary pieces: items preceded by whitespace get the
// boundary marker; qualified names split at the dot.
std::vector<std::string> query_pieces(const SqlSchema& schema, std::string_view text);

struct OracleResult {
  std::optional<std::vector<int>> best;  // ends with eos
  double log_score = 0.0;
  bool exhausted_budget = false;
};

// Highest-scoring sequence of at most `max_length` tokens accepted by the
// validator, by uniform-cost search over admissible prefixes.
OracleResult best_valid_sequence(const ScoringModel& model, const Validator& validator, int max_length,
                                 std::size_t expansion_budget = 200000);

struct ExperimentConfig {
  // A fixed problem from files; otherwise instances are generated from seed.
  std::optional<std::string> schema_path;
  std::optional<std::string> vocab_path;
  std::optional<std::string> model_path;
  std::uint64_t seed = 1;
  std::vector<Mode> modes = {Mode::Off, Mode::Lexing, Mode::ParsingNoGuards, Mode::ParsingWithGuards};
  std::vector<int> beams = {1, 2, 4, 8};
  std::vector<int> ks = {2, 4, 8};
  std::vector<Timing> timings = {Timing::Incremental, Timing::FinalizeOnly};
  int repetitions = 20;
  int max_length = 24;
  InstanceShape shape;
  // Wall-clock columns make the report non-reproducible; off writes zeros.
  bool record_latency = true;
  std::string output_path;
};

struct CellResult {
  Mode mode;
  int beam;
  int k;
  Timing timing;
  double valid_rate = 0.0;
  double oracle_match_rate = 0.0;
  double unusable_rate = 0.0;
  double invalid_rate = 0.0;  // a hypothesis was returned but fails the strictest check
  double mean_feed_latency_s = 0.0;
  double mean_decode_s = 0.0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::string error;
};

struct ExperimentReport {
  std::vector<CellResult> cells;

  std::string csv() const;
  // Per-cell decode time, its ratio to the Off cell with the same beam, k and
  // timing, and any per-run failures.
  std::string summary_json() const;
  const CellResult* find(Mode mode, int beam, int k, Timing timing) const;
};

std::string_view csv_header();

ExperimentReport run_experiment(const ExperimentConfig& config);
// Runs and writes config.output_path (CSV) plus `<output>.summary.json`.
ExperimentReport run_experiment_to_file(const ExperimentConfig& config);

}  // namespace sqlgate
