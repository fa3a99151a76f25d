#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace sqlgate {

// Next-token log-softmax source.
class ScoringModel {
 public:
  virtual ~ScoringModel() = default;
  virtual int vocab_size() const = 0;
  virtual std::vector<double> next_scores(std::span<const int> prefix) const = 0;
};

// Normalizes logits in place to log-probabilities.
void log_softmax(std::vector<double>& logits);

// Replayable model given by a table of logits per token-id prefix. Prefixes
// not in the table get uniform logits plus seeded noise.
class ScriptedModel : public ScoringModel {
 public:
  ScriptedModel(int vocab_size, std::uint64_t seed, double noise = 0.0);

  // Logits for the step after `prefix`; normalized on lookup.
  void set(std::span<const int> prefix, std::vector<double> logits);

  int vocab_size() const override { return vocab_size_; }
  std::vector<double> next_scores(std::span<const int> prefix) const override;

  std::uint64_t seed() const { return seed_; }
  double noise() const { return noise_; }
  std::size_t table_size() const { return table_.size(); }

  // {"vocab_size": V, "seed": S, "noise": N, "table": {"3 7": [logits...]}}
  std::string to_json() const;
  static ScriptedModel from_json(const std::string& text);
  static ScriptedModel load_file(const std::string& path);

  static std::string key(std::span<const int> prefix);

 private:
  int vocab_size_;
  std::uint64_t seed_;
  double noise_;
  std::map<std::string, std::vector<double>> table_;
};

}  // namespace sqlgate
