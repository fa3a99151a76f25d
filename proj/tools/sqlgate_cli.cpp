#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sqlgate/sqlgate.h"

namespace {

constexpr int kExitRejected = 1;
constexpr int kExitError = 2;

int report(sqlgate_status status) {
  std::cerr << "sqlgate: " << sqlgate_last_error() << "\n";
  return status == SQLGATE_OK ? 0 : kExitError;
}

template <typename T, void (*Free)(T*)>
struct Owned {
  T* ptr = nullptr;
  ~Owned() { Free(ptr); }
};

struct Args {
  std::string schema;
  std::string vocab;
  std::string model;
  std::string mode = "parse-guards";
  std::string timing = "incremental";
  int beam = 4;
  int top_k = 4;
  int max_length = 64;
  int sweep_max_length = 24;
  std::uint64_t seed = 1;
  std::string out;
  std::string input;
  int repetitions = 20;
  bool no_latency = false;
  std::vector<std::string> modes;
  std::vector<int> beams;
  std::vector<int> ks;
  std::vector<std::string> timings;
};

int run_validate(const Args& a) {
  sqlgate_mode mode;
  if (sqlgate_mode_from_name(a.mode.c_str(), &mode) != SQLGATE_OK) return report(SQLGATE_ERR_ARGUMENT);
  if (mode == SQLGATE_MODE_OFF) {
    std::cerr << "sqlgate: validate needs a checking mode other than off\n";
    return kExitError;
  }
  Owned<sqlgate_schema, sqlgate_schema_free> schema;
  if (auto s = sqlgate_schema_load_file(a.schema.c_str(), &schema.ptr); s != SQLGATE_OK) return report(s);

  std::ifstream file;
  if (!a.input.empty() && a.input != "-") {
    file.open(a.input);
    if (!file) {
      std::cerr << "sqlgate: cannot open input '" << a.input << "'\n";
      return kExitError;
    }
  }
  std::istream& in = file.is_open() ? static_cast<std::istream&>(file) : std::cin;
  bool all_accepted = true;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    sqlgate_verdict v;
    if (auto s = sqlgate_validate_text(schema.ptr, mode, line.data(), line.size(), &v); s != SQLGATE_OK) return report(s);
    if (v.accepted) {
      std::cout << "accept\n";
    } else {
      all_accepted = false;
      std::cout << "reject " << v.reason << " " << v.offset << "\n";
    }
  }
  return all_accepted ? 0 : kExitRejected;
}

int run_decode(const Args& a) {
  sqlgate_mode mode;
  sqlgate_timing timing;
  if (sqlgate_mode_from_name(a.mode.c_str(), &mode) != SQLGATE_OK) return report(SQLGATE_ERR_ARGUMENT);
  if (sqlgate_timing_from_name(a.timing.c_str(), &timing) != SQLGATE_OK) return report(SQLGATE_ERR_ARGUMENT);
  Owned<sqlgate_schema, sqlgate_schema_free> schema;
  Owned<sqlgate_vocab, sqlgate_vocab_free> vocab;
  Owned<sqlgate_model, sqlgate_model_free> model;
  Owned<sqlgate_validator, sqlgate_validator_free> validator;
  if (auto s = sqlgate_schema_load_file(a.schema.c_str(), &schema.ptr); s != SQLGATE_OK) return report(s);
  if (auto s = sqlgate_vocab_load_file(a.vocab.c_str(), &vocab.ptr); s != SQLGATE_OK) return report(s);
  if (auto s = sqlgate_model_load_file(a.model.c_str(), &model.ptr); s != SQLGATE_OK) return report(s);
  if (auto s = sqlgate_validator_new(schema.ptr, vocab.ptr, mode, timing, &validator.ptr); s != SQLGATE_OK) {
    return report(s);
  }
  sqlgate_decode_result r;
  if (auto s = sqlgate_decode(model.ptr, validator.ptr, a.beam, a.top_k, a.max_length, &r); s != SQLGATE_OK) {
    return report(s);
  }
  if (!r.found) {
    std::cout << "NO-VALID-HYPOTHESIS\n";
    return kExitRejected;
  }
  char score[64];
  std::snprintf(score, sizeof score, "%.6f", r.log_score);
  std::cout << r.text << "\t" << score << "\n";
  sqlgate_string_free(r.text);
  return 0;
}

int run_experiment(const Args& a) {
  sqlgate_experiment_config c;
  sqlgate_experiment_config_init(&c);
  const bool files = !a.schema.empty() || !a.vocab.empty() || !a.model.empty();
  if (files) {
    c.schema_path = a.schema.empty() ? nullptr : a.schema.c_str();
    c.vocab_path = a.vocab.empty() ? nullptr : a.vocab.c_str();
    c.model_path = a.model.empty() ? nullptr : a.model.c_str();
  }
  c.seed = a.seed;
  c.repetitions = a.repetitions;
  c.max_length = a.sweep_max_length;
  c.record_latency = a.no_latency ? 0 : 1;
  std::vector<sqlgate_mode> modes;
  for (const std::string& m : a.modes) {
    sqlgate_mode mode;
    if (sqlgate_mode_from_name(m.c_str(), &mode) != SQLGATE_OK) return report(SQLGATE_ERR_ARGUMENT);
    modes.push_back(mode);
  }
  std::vector<sqlgate_timing> timings;
  for (const std::string& t : a.timings) {
    sqlgate_timing timing;
    if (sqlgate_timing_from_name(t.c_str(), &timing) != SQLGATE_OK) return report(SQLGATE_ERR_ARGUMENT);
    timings.push_back(timing);
  }
  if (!modes.empty()) {
    c.modes = modes.data();
    c.mode_count = modes.size();
  }
  if (!a.beams.empty()) {
    c.beams = a.beams.data();
    c.beam_count = a.beams.size();
  }
  if (!a.ks.empty()) {
    c.ks = a.ks.data();
    c.k_count = a.ks.size();
  }
  if (!timings.empty()) {
    c.timings = timings.data();
    c.timing_count = timings.size();
  }
  c.out_path = a.out.empty() ? nullptr : a.out.c_str();
  char* csv = nullptr;
  if (auto s = sqlgate_experiment_run(&c, &csv, nullptr); s != SQLGATE_OK) return report(s);
  if (a.out.empty()) std::cout << csv;
  sqlgate_string_free(csv);
  return 0;
}

int run_serve(const Args& a) {
  sqlgate_mode mode;
  sqlgate_timing timing;
  if (sqlgate_mode_from_name(a.mode.c_str(), &mode) != SQLGATE_OK) return report(SQLGATE_ERR_ARGUMENT);
  if (sqlgate_timing_from_name(a.timing.c_str(), &timing) != SQLGATE_OK) return report(SQLGATE_ERR_ARGUMENT);
  Owned<sqlgate_schema, sqlgate_schema_free> schema;
  Owned<sqlgate_vocab, sqlgate_vocab_free> vocab;
  Owned<sqlgate_server, sqlgate_server_free> server;
  if (auto s = sqlgate_schema_load_file(a.schema.c_str(), &schema.ptr); s != SQLGATE_OK) return report(s);
  if (auto s = sqlgate_vocab_load_file(a.vocab.c_str(), &vocab.ptr); s != SQLGATE_OK) return report(s);
  if (auto s = sqlgate_server_new(schema.ptr, vocab.ptr, mode, timing, &server.ptr); s != SQLGATE_OK) return report(s);
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    char* response = nullptr;
    if (auto s = sqlgate_server_handle(server.ptr, line.data(), line.size(), &response); s != SQLGATE_OK) {
      return report(s);
    }
    std::cout << response << "\n" << std::flush;
    sqlgate_string_free(response);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schema-aware SQL validation for constrained decoding"};
  app.require_subcommand(1);
  Args a;
  const std::vector<std::string> mode_names{"off", "lex", "parse", "parse-guards"};
  const std::vector<std::string> timing_names{"incremental", "final"};

  auto* validate = app.add_subcommand("validate", "Check SQL lines from stdin (or --input) against a schema");
  validate->add_option("--schema", a.schema, "Schema JSON file")->required();
  validate->add_option("--mode", a.mode, "Checking mode")->check(CLI::IsMember(mode_names));
  validate->add_option("--input", a.input, "Input file, one query per line (default stdin)");

  auto* decode = app.add_subcommand("decode", "Beam-search a scripted model under a checking mode");
  decode->add_option("--schema", a.schema, "Schema JSON file")->required();
  decode->add_option("--vocab", a.vocab, "Vocabulary file")->required();
  decode->add_option("--model", a.model, "Scripted model JSON file")->required();
  decode->add_option("--mode", a.mode, "Checking mode")->check(CLI::IsMember(mode_names));
  decode->add_option("--timing", a.timing, "When to check")->check(CLI::IsMember(timing_names));
  decode->add_option("--beam", a.beam, "Beam size")->check(CLI::PositiveNumber);
  decode->add_option("--top-k", a.top_k, "Tokens considered per hypothesis")->check(CLI::PositiveNumber);
  decode->add_option("--max-length", a.max_length, "Maximum tokens, eos included")->check(CLI::PositiveNumber);

  auto* experiment = app.add_subcommand("experiment", "Run the mode/beam/k/timing sweep and write CSV");
  experiment->add_option("--schema", a.schema, "Fixed schema (with --vocab and --model)");
  experiment->add_option("--vocab", a.vocab, "Fixed vocabulary");
  experiment->add_option("--model", a.model, "Fixed scripted model");
  experiment->add_option("--seed", a.seed, "Instance generator seed");
  experiment->add_option("--mode", a.modes, "Modes to sweep (repeatable)")->check(CLI::IsMember(mode_names));
  experiment->add_option("--beam", a.beams, "Beam sizes to sweep (repeatable)")->check(CLI::PositiveNumber);
  experiment->add_option("--top-k", a.ks, "k values to sweep (repeatable)")->check(CLI::PositiveNumber);
  experiment->add_option("--timing", a.timings, "Timings to sweep (repeatable)")->check(CLI::IsMember(timing_names));
  experiment->add_option("--repetitions", a.repetitions, "Instances per cell")->check(CLI::PositiveNumber);
  experiment->add_option("--max-length", a.sweep_max_length, "Maximum tokens, eos included")->check(CLI::PositiveNumber);
  experiment->add_option("--out", a.out, "CSV output path (default stdout)");
  experiment->add_flag("--no-latency", a.no_latency, "Write zero latency for reproducible output");

  auto* serve = app.add_subcommand("serve", "Line-delimited JSON sessions on stdin/stdout");
  serve->add_option("--schema", a.schema, "Schema JSON file")->required();
  serve->add_option("--vocab", a.vocab, "Vocabulary file")->required();
  serve->add_option("--mode", a.mode, "Default mode for sessions")->check(CLI::IsMember(mode_names));
  serve->add_option("--timing", a.timing, "Default timing for sessions")->check(CLI::IsMember(timing_names));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  if (*validate) return run_validate(a);
  if (*decode) return run_decode(a);
  if (*experiment) return run_experiment(a);
  return run_serve(a);
}
