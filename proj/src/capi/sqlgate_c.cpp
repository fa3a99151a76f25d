#include "sqlgate/sqlgate.h"

#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "sqlgate/decoder.hpp"
#include "sqlgate/experiment.hpp"
#include "sqlgate/schema.hpp"
#include "sqlgate/scoring_model.hpp"
#include "sqlgate/session_server.hpp"
#include "sqlgate/vocabulary.hpp"

struct sqlgate_schema {
  std::shared_ptr<const sqlgate::SqlSchema> schema;
};
struct sqlgate_vocab {
  std::shared_ptr<const sqlgate::Vocabulary> vocab;
};
struct sqlgate_model {
  std::shared_ptr<const sqlgate::ScriptedModel> model;
};
struct sqlgate_validator {
  std::shared_ptr<const sqlgate::SqlSchema> schema;
  std::shared_ptr<const sqlgate::Vocabulary> vocab;
  sqlgate::Validator validator;
};
struct sqlgate_checkpoint {
  sqlgate::Checkpoint checkpoint;
};
struct sqlgate_server {
  sqlgate::SessionServer server;
};

namespace {

thread_local std::string last_error;

sqlgate_status fail(sqlgate_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

sqlgate_status ok() {
  last_error.clear();
  return SQLGATE_OK;
}

// Runs `body`, mapping exceptions to status codes.
template <typename F>
sqlgate_status guarded(F&& body, sqlgate_status invalid_argument_status = SQLGATE_ERR_ARGUMENT) {
  try {
    return body();
  } catch (const sqlgate::SchemaError& e) {
    return fail(e.kind() == sqlgate::SchemaError::Kind::Format ? SQLGATE_ERR_FORMAT : SQLGATE_ERR_INTEGRITY, e.what());
  } catch (const sqlgate::VocabularyError& e) {
    return fail(SQLGATE_ERR_FORMAT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(invalid_argument_status, e.what());
  } catch (const std::out_of_range& e) {
    return fail(SQLGATE_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SQLGATE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SQLGATE_ERR_INTERNAL, e.what());
  }
}

bool readable(const char* path) {
  std::ifstream in(path, std::ios::binary);
  return static_cast<bool>(in);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bool valid_mode(sqlgate_mode m) { return m >= SQLGATE_MODE_OFF && m <= SQLGATE_MODE_PARSE_GUARDS; }
bool valid_timing(sqlgate_timing t) { return t == SQLGATE_TIMING_INCREMENTAL || t == SQLGATE_TIMING_FINAL; }

sqlgate::Mode to_mode(sqlgate_mode m) { return static_cast<sqlgate::Mode>(m); }
sqlgate::Timing to_timing(sqlgate_timing t) { return static_cast<sqlgate::Timing>(t); }

void fill_verdict(sqlgate_verdict* out, const std::optional<sqlgate::Rejection>& r) {
  if (!out) return;
  if (r) {
    out->accepted = 0;
    out->reason = sqlgate::reason_name(r->reason).data();
    out->offset = r->offset;
  } else {
    out->accepted = 1;
    out->reason = nullptr;
    out->offset = 0;
  }
}

}  // namespace

extern "C" {

const char* sqlgate_last_error(void) { return last_error.c_str(); }

void sqlgate_string_free(char* s) { std::free(s); }

const char* sqlgate_mode_name(sqlgate_mode mode) {
  if (!valid_mode(mode)) return "?";
  return sqlgate::mode_name(to_mode(mode)).data();
}

sqlgate_status sqlgate_mode_from_name(const char* name, sqlgate_mode* out) {
  if (!name || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  auto m = sqlgate::mode_from_name(name);
  if (!m) return fail(SQLGATE_ERR_ARGUMENT, std::string("unknown mode '") + name + "'");
  *out = static_cast<sqlgate_mode>(*m);
  return ok();
}

const char* sqlgate_timing_name(sqlgate_timing timing) {
  if (!valid_timing(timing)) return "?";
  return sqlgate::timing_name(to_timing(timing)).data();
}

sqlgate_status sqlgate_timing_from_name(const char* name, sqlgate_timing* out) {
  if (!name || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  auto t = sqlgate::timing_from_name(name);
  if (!t) return fail(SQLGATE_ERR_ARGUMENT, std::string("unknown timing '") + name + "'");
  *out = static_cast<sqlgate_timing>(*t);
  return ok();
}

sqlgate_status sqlgate_schema_load_file(const char* path, sqlgate_schema** out) {
  if (!path || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  if (!readable(path)) return fail(SQLGATE_ERR_IO, std::string("cannot open schema file '") + path + "'");
  return guarded([&] {
    auto schema = std::make_shared<const sqlgate::SqlSchema>(sqlgate::load_schema_file(path));
    *out = new sqlgate_schema{std::move(schema)};
    return ok();
  });
}

sqlgate_status sqlgate_schema_load_string(const char* json, size_t len, sqlgate_schema** out) {
  if (!json || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    auto schema = std::make_shared<const sqlgate::SqlSchema>(sqlgate::load_schema_string(std::string_view(json, len)));
    *out = new sqlgate_schema{std::move(schema)};
    return ok();
  });
}

void sqlgate_schema_free(sqlgate_schema* schema) { delete schema; }

sqlgate_status sqlgate_vocab_load_file(const char* path, sqlgate_vocab** out) {
  if (!path || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  if (!readable(path)) return fail(SQLGATE_ERR_IO, std::string("cannot open vocabulary file '") + path + "'");
  return guarded([&] {
    auto vocab = std::make_shared<const sqlgate::Vocabulary>(sqlgate::load_vocabulary_file(path));
    *out = new sqlgate_vocab{std::move(vocab)};
    return ok();
  });
}

int sqlgate_vocab_size(const sqlgate_vocab* vocab) { return vocab ? vocab->vocab->size() : 0; }
int sqlgate_vocab_eos(const sqlgate_vocab* vocab) { return vocab ? vocab->vocab->eos_id() : -1; }
void sqlgate_vocab_free(sqlgate_vocab* vocab) { delete vocab; }

sqlgate_status sqlgate_model_load_file(const char* path, sqlgate_model** out) {
  if (!path || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  if (!readable(path)) return fail(SQLGATE_ERR_IO, std::string("cannot open model file '") + path + "'");
  return guarded(
      [&] {
        auto model = std::make_shared<const sqlgate::ScriptedModel>(sqlgate::ScriptedModel::load_file(path));
        *out = new sqlgate_model{std::move(model)};
        return ok();
      },
      SQLGATE_ERR_FORMAT);
}

void sqlgate_model_free(sqlgate_model* model) { delete model; }

sqlgate_status sqlgate_validate_text(const sqlgate_schema* schema, sqlgate_mode mode, const char* text, size_t len,
                                     sqlgate_verdict* out) {
  if (!schema || (!text && len > 0) || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  if (!valid_mode(mode)) return fail(SQLGATE_ERR_ARGUMENT, "invalid mode");
  return guarded([&] {
    // The check ignores the vocabulary; a one-token table stands in.
    static const sqlgate::Vocabulary placeholder({std::string()}, 0);
    sqlgate::Validator v(*schema->schema, placeholder, to_mode(mode));
    fill_verdict(out, v.check_full(std::string_view(text ? text : "", len)));
    return ok();
  });
}

sqlgate_status sqlgate_validator_new(const sqlgate_schema* schema, const sqlgate_vocab* vocab, sqlgate_mode mode,
                                     sqlgate_timing timing, sqlgate_validator** out) {
  if (!schema || !vocab || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  if (!valid_mode(mode) || !valid_timing(timing)) return fail(SQLGATE_ERR_ARGUMENT, "invalid mode or timing");
  return guarded([&] {
    *out = new sqlgate_validator{schema->schema, vocab->vocab,
                                 sqlgate::Validator(*schema->schema, *vocab->vocab, to_mode(mode), to_timing(timing))};
    return ok();
  });
}

void sqlgate_validator_free(sqlgate_validator* validator) { delete validator; }

sqlgate_status sqlgate_checkpoint_new(const sqlgate_validator* validator, sqlgate_checkpoint** out) {
  if (!validator || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new sqlgate_checkpoint{validator->validator.initial()};
    return ok();
  });
}

sqlgate_status sqlgate_checkpoint_clone(const sqlgate_checkpoint* cp, sqlgate_checkpoint** out) {
  if (!cp || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new sqlgate_checkpoint{cp->checkpoint};
    return ok();
  });
}

sqlgate_status sqlgate_checkpoint_feed(const sqlgate_validator* validator, const sqlgate_checkpoint* parent,
                                       int token_id, sqlgate_feed_kind* kind, sqlgate_verdict* verdict,
                                       sqlgate_checkpoint** next) {
  if (!validator || !parent || !kind) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  if (!validator->vocab->contains(token_id)) {
    return fail(SQLGATE_ERR_ARGUMENT, "token id " + std::to_string(token_id) + " is not in the vocabulary");
  }
  return guarded([&] {
    sqlgate::FeedResult r = validator->validator.feed_token(parent->checkpoint, token_id);
    *kind = r.kind == sqlgate::FeedResult::Kind::Accepted   ? SQLGATE_FEED_ACCEPTED
            : r.kind == sqlgate::FeedResult::Kind::Finished ? SQLGATE_FEED_FINISHED
                                                            : SQLGATE_FEED_REJECTED;
    fill_verdict(verdict, r.rejection);
    if (next) *next = r.ok() ? new sqlgate_checkpoint{std::move(r.checkpoint)} : nullptr;
    return ok();
  });
}

void sqlgate_checkpoint_free(sqlgate_checkpoint* cp) { delete cp; }

sqlgate_status sqlgate_warp_scores(const sqlgate_validator* validator, const sqlgate_checkpoint* cp,
                                   const double* scores, size_t n, int top_k, double* out) {
  if (!validator || !cp || (!scores && n > 0) || (!out && n > 0)) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  if (top_k < 1) return fail(SQLGATE_ERR_ARGUMENT, "top_k must be positive");
  return guarded([&] {
    std::vector<double> warped = sqlgate::warp_scores(validator->validator, cp->checkpoint, {scores, n}, top_k);
    std::copy(warped.begin(), warped.end(), out);
    return ok();
  });
}

sqlgate_status sqlgate_decode(const sqlgate_model* model, const sqlgate_validator* validator, int beam, int top_k,
                              int max_length, sqlgate_decode_result* out) {
  if (!model || !validator || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  if (beam < 1 || top_k < 1 || max_length < 1) return fail(SQLGATE_ERR_ARGUMENT, "beam, top_k and max_length must be positive");
  if (model->model->vocab_size() != validator->vocab->size()) {
    return fail(SQLGATE_ERR_ARGUMENT, "model and vocabulary sizes differ");
  }
  return guarded([&] {
    sqlgate::SearchOptions options;
    options.beam_size = beam;
    options.top_k = top_k;
    options.max_length = max_length;
    sqlgate::SearchResult r = sqlgate::beam_search(*model->model, validator->validator, options);
    out->found = 0;
    out->text = nullptr;
    out->log_score = -std::numeric_limits<double>::infinity();
    if (!r.hypotheses.empty()) {
      const sqlgate::Hypothesis& top = r.hypotheses.front();
      out->text = copy_string(validator->vocab->detokenize(top.tokens));
      out->found = 1;
      out->log_score = top.log_score;
    }
    return ok();
  });
}

void sqlgate_experiment_config_init(sqlgate_experiment_config* config) {
  if (!config) return;
  const sqlgate::ExperimentConfig defaults;
  *config = sqlgate_experiment_config{};
  config->seed = defaults.seed;
  config->repetitions = defaults.repetitions;
  config->max_length = defaults.max_length;
  config->record_latency = defaults.record_latency ? 1 : 0;
}

sqlgate_status sqlgate_experiment_run(const sqlgate_experiment_config* config, char** csv, char** summary) {
  if (!config) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  for (const char* p : {config->schema_path, config->vocab_path, config->model_path}) {
    if (p && !readable(p)) return fail(SQLGATE_ERR_IO, std::string("cannot open '") + p + "'");
  }
  return guarded([&] {
    sqlgate::ExperimentConfig c;
    if (config->schema_path) c.schema_path = config->schema_path;
    if (config->vocab_path) c.vocab_path = config->vocab_path;
    if (config->model_path) c.model_path = config->model_path;
    c.seed = config->seed;
    if (config->modes) {
      c.modes.clear();
      for (size_t i = 0; i < config->mode_count; ++i) {
        if (!valid_mode(config->modes[i])) return fail(SQLGATE_ERR_ARGUMENT, "invalid mode");
        c.modes.push_back(to_mode(config->modes[i]));
      }
    }
    if (config->beams) c.beams.assign(config->beams, config->beams + config->beam_count);
    if (config->ks) c.ks.assign(config->ks, config->ks + config->k_count);
    if (config->timings) {
      c.timings.clear();
      for (size_t i = 0; i < config->timing_count; ++i) {
        if (!valid_timing(config->timings[i])) return fail(SQLGATE_ERR_ARGUMENT, "invalid timing");
        c.timings.push_back(to_timing(config->timings[i]));
      }
    }
    c.repetitions = config->repetitions;
    c.max_length = config->max_length;
    c.record_latency = config->record_latency != 0;
    if (config->out_path) c.output_path = config->out_path;
    sqlgate::ExperimentReport report = sqlgate::run_experiment_to_file(c);
    if (csv) *csv = copy_string(report.csv());
    if (summary) *summary = copy_string(report.summary_json());
    return ok();
  });
}

sqlgate_status sqlgate_server_new(const sqlgate_schema* schema, const sqlgate_vocab* vocab, sqlgate_mode mode,
                                  sqlgate_timing timing, sqlgate_server** out) {
  if (!schema || !vocab || !out) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  if (!valid_mode(mode) || !valid_timing(timing)) return fail(SQLGATE_ERR_ARGUMENT, "invalid mode or timing");
  return guarded([&] {
    *out = new sqlgate_server{sqlgate::SessionServer(schema->schema, vocab->vocab, to_mode(mode), to_timing(timing))};
    return ok();
  });
}

sqlgate_status sqlgate_server_handle(sqlgate_server* server, const char* line, size_t len, char** response) {
  if (!server || (!line && len > 0) || !response) return fail(SQLGATE_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    *response = copy_string(server->server.handle(std::string_view(line ? line : "", len)));
    return ok();
  });
}

void sqlgate_server_free(sqlgate_server* server) { delete server; }

}  // extern "C"
