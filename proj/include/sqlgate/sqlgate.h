#ifndef SQLGATE_SQLGATE_H
#define SQLGATE_SQLGATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(SQLGATE_BUILDING)
#define SQLGATE_API __attribute__((visibility("default")))
#else
#define SQLGATE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sqlgate_status {
  SQLGATE_OK = 0,
  SQLGATE_ERR_IO = 1,         /* file missing or unreadable */
  SQLGATE_ERR_FORMAT = 2,     /* malformed schema, vocabulary or model file */
  SQLGATE_ERR_INTEGRITY = 3,  /* well-formed but inconsistent content */
  SQLGATE_ERR_ARGUMENT = 4,
  SQLGATE_ERR_INTERNAL = 5
} sqlgate_status;

typedef enum sqlgate_mode {
  SQLGATE_MODE_OFF = 0,
  SQLGATE_MODE_LEX = 1,
  SQLGATE_MODE_PARSE = 2,
  SQLGATE_MODE_PARSE_GUARDS = 3
} sqlgate_mode;

typedef enum sqlgate_timing { SQLGATE_TIMING_INCREMENTAL = 0, SQLGATE_TIMING_FINAL = 1 } sqlgate_timing;

typedef enum sqlgate_feed_kind {
  SQLGATE_FEED_ACCEPTED = 0,
  SQLGATE_FEED_REJECTED = 1,
  SQLGATE_FEED_FINISHED = 2
} sqlgate_feed_kind;

typedef struct sqlgate_schema sqlgate_schema;
typedef struct sqlgate_vocab sqlgate_vocab;
typedef struct sqlgate_model sqlgate_model;
typedef struct sqlgate_validator sqlgate_validator;
typedef struct sqlgate_checkpoint sqlgate_checkpoint;
typedef struct sqlgate_server sqlgate_server;

/* Message of the last failed call on this thread; empty after success. */
SQLGATE_API const char* sqlgate_last_error(void);

/* Strings returned through char** out-parameters are released with this. */
SQLGATE_API void sqlgate_string_free(char* s);

SQLGATE_API const char* sqlgate_mode_name(sqlgate_mode mode);
SQLGATE_API sqlgate_status sqlgate_mode_from_name(const char* name, sqlgate_mode* out);
SQLGATE_API const char* sqlgate_timing_name(sqlgate_timing timing);
SQLGATE_API sqlgate_status sqlgate_timing_from_name(const char* name, sqlgate_timing* out);

SQLGATE_API sqlgate_status sqlgate_schema_load_file(const char* path, sqlgate_schema** out);
SQLGATE_API sqlgate_status sqlgate_schema_load_string(const char* json, size_t len, sqlgate_schema** out);
SQLGATE_API void sqlgate_schema_free(sqlgate_schema* schema);

SQLGATE_API sqlgate_status sqlgate_vocab_load_file(const char* path, sqlgate_vocab** out);
SQLGATE_API int sqlgate_vocab_size(const sqlgate_vocab* vocab);
SQLGATE_API int sqlgate_vocab_eos(const sqlgate_vocab* vocab);
SQLGATE_API void sqlgate_vocab_free(sqlgate_vocab* vocab);

SQLGATE_API sqlgate_status sqlgate_model_load_file(const char* path, sqlgate_model** out);
SQLGATE_API void sqlgate_model_free(sqlgate_model* model);

typedef struct sqlgate_verdict {
  int accepted;
  const char* reason; /* static string, NULL when accepted */
  size_t offset;
} sqlgate_verdict;

/* Full-string check of `text` in `mode`. */
SQLGATE_API sqlgate_status sqlgate_validate_text(const sqlgate_schema* schema, sqlgate_mode mode, const char* text,
                                                 size_t len, sqlgate_verdict* out);

/* The schema and vocabulary must outlive the validator. */
SQLGATE_API sqlgate_status sqlgate_validator_new(const sqlgate_schema* schema, const sqlgate_vocab* vocab,
                                                 sqlgate_mode mode, sqlgate_timing timing, sqlgate_validator** out);
SQLGATE_API void sqlgate_validator_free(sqlgate_validator* validator);

SQLGATE_API sqlgate_status sqlgate_checkpoint_new(const sqlgate_validator* validator, sqlgate_checkpoint** out);
SQLGATE_API sqlgate_status sqlgate_checkpoint_clone(const sqlgate_checkpoint* cp, sqlgate_checkpoint** out);
/* `*next` is set only when the token is not rejected; `parent` is unchanged. */
SQLGATE_API sqlgate_status sqlgate_checkpoint_feed(const sqlgate_validator* validator, const sqlgate_checkpoint* parent,
                                                   int token_id, sqlgate_feed_kind* kind, sqlgate_verdict* verdict,
                                                   sqlgate_checkpoint** next);
SQLGATE_API void sqlgate_checkpoint_free(sqlgate_checkpoint* cp);

/* Writes n warped scores to `out`: rejected and dismissed tokens get -inf. */
SQLGATE_API sqlgate_status sqlgate_warp_scores(const sqlgate_validator* validator, const sqlgate_checkpoint* cp,
                                               const double* scores, size_t n, int top_k, double* out);

typedef struct sqlgate_decode_result {
  int found;       /* 0 when no hypothesis finished */
  char* text;      /* detokenized top hypothesis; free with sqlgate_string_free */
  double log_score;
} sqlgate_decode_result;

SQLGATE_API sqlgate_status sqlgate_decode(const sqlgate_model* model, const sqlgate_validator* validator, int beam,
                                          int top_k, int max_length, sqlgate_decode_result* out);

typedef struct sqlgate_experiment_config {
  const char* schema_path; /* all three paths set, or all NULL for generated instances */
  const char* vocab_path;
  const char* model_path;
  uint64_t seed;
  const sqlgate_mode* modes; /* NULL keeps the default sweep */
  size_t mode_count;
  const int* beams;
  size_t beam_count;
  const int* ks;
  size_t k_count;
  const sqlgate_timing* timings;
  size_t timing_count;
  int repetitions;
  int max_length;
  int record_latency;
  const char* out_path; /* NULL: nothing written */
} sqlgate_experiment_config;

SQLGATE_API void sqlgate_experiment_config_init(sqlgate_experiment_config* config);
/* csv and summary may be NULL. */
SQLGATE_API sqlgate_status sqlgate_experiment_run(const sqlgate_experiment_config* config, char** csv, char** summary);

SQLGATE_API sqlgate_status sqlgate_server_new(const sqlgate_schema* schema, const sqlgate_vocab* vocab,
                                              sqlgate_mode mode, sqlgate_timing timing, sqlgate_server** out);
/* One request line to one response line. */
SQLGATE_API sqlgate_status sqlgate_server_handle(sqlgate_server* server, const char* line, size_t len,
                                                 char** response);
SQLGATE_API void sqlgate_server_free(sqlgate_server* server);

#ifdef __cplusplus
}
#endif

#endif
