#include "sqlgate/scoring_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sqlgate {

void log_softmax(std::vector<double>& logits) {
  if (logits.empty()) return;
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double x : logits) sum += std::exp(x - top);
  const double lse = top + std::log(sum);
  for (double& x : logits) x -= lse;
}

ScriptedModel::ScriptedModel(int vocab_size, std::uint64_t seed, double noise)
    : vocab_size_(vocab_size), seed_(seed), noise_(noise) {
  if (vocab_size <= 0) throw std::invalid_argument("scripted model needs a positive vocabulary size");
}

std::string ScriptedModel::key(std::span<const int> prefix) {
  std::string k;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (i) k += ' ';
    k += std::to_string(prefix[i]);
  }
  return k;
}

void ScriptedModel::set(std::span<const int> prefix, std::vector<double> logits) {
  if (static_cast<int>(logits.size()) != vocab_size_) {
    throw std::invalid_argument("logit row has " + std::to_string(logits.size()) + " entries, expected " +
                                std::to_string(vocab_size_));
  }
  table_[key(prefix)] = std::move(logits);
}

std::vector<double> ScriptedModel::next_scores(std::span<const int> prefix) const {
  const std::string k = key(prefix);
  std::vector<double> logits;
  if (auto it = table_.find(k); it != table_.end()) {
    logits = it->second;
  } else {
    logits.assign(static_cast<std::size_t>(vocab_size_), 0.0);
    if (noise_ > 0.0) {
      // FNV-1a of the prefix key mixed with the seed.
      std::uint64_t h = 1469598103934665603ULL ^ seed_;
      for (unsigned char c : k) h = (h ^ c) * 1099511628211ULL;
      std::mt19937_64 rng(h);
      std::uniform_real_distribution<double> u(0.0, noise_);
      for (double& x : logits) x = u(rng);
    }
  }
  log_softmax(logits);
  return logits;
}

std::string ScriptedModel::to_json() const {
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [k, row] : table_) table[k] = row;
  nlohmann::json doc{{"vocab_size", vocab_size_}, {"seed", seed_}, {"noise", noise_}, {"table", table}};
  return doc.dump();
}

ScriptedModel ScriptedModel::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed scripted model: ") + e.what());
  }
  try {
    ScriptedModel model(doc.at("vocab_size").get<int>(), doc.value("seed", std::uint64_t{0}),
                        doc.value("noise", 0.0));
    if (auto it = doc.find("table"); it != doc.end()) {
      for (const auto& [k, row] : it->items()) {
        std::vector<int> prefix;
        std::istringstream in(k);
        for (int id; in >> id;) prefix.push_back(id);
        model.set(prefix, row.get<std::vector<double>>());
      }
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed scripted model: ") + e.what());
  }
}

ScriptedModel ScriptedModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace sqlgate
