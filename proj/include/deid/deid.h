#ifndef DEID_DEID_H
#define DEID_DEID_H

/* C interface to the de-identification toolkit: corpora, rule and CRF
 * taggers, evaluation, ablation and anonymisation.
 *
 * Every function returns a deid_status. On failure the message of the last
 * error on the calling thread is available from deid_last_error(). Handles
 * are opaque and owned by the caller; release them with the matching
 * *_free function (passing NULL is allowed). Strings are UTF-8, and text
 * offsets count Unicode code points. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DEID_BUILDING_LIBRARY)
#    define DEID_API __declspec(dllexport)
#  else
#    define DEID_API __declspec(dllimport)
#  endif
#else
#  define DEID_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum deid_status {
  DEID_OK = 0,
  DEID_INVALID_ARGUMENT,
  DEID_FILE_MISSING,
  DEID_MALFORMED_LINE,
  DEID_OFFSET_MISMATCH,
  DEID_UNKNOWN_LABEL,
  DEID_OVERLAP,
  DEID_ILL_FORMED_SEQUENCE,
  DEID_EMPTY_CORPUS,
  DEID_MALFORMED_ROW,
  DEID_LABEL_VOCABULARY,
  DEID_EMPTY_TRAINING_SET,
  DEID_DIVERGENCE_DETECTED,
  DEID_VERSION_MISMATCH,
  DEID_CORRUPT_FILE,
  DEID_LENGTH_MISMATCH,
  DEID_CROSS_DOCUMENT_ANNOTATION,
  DEID_UNKNOWN_CATEGORY,
  DEID_OFFSET_OUT_OF_RANGE,
  DEID_INDEX_OUT_OF_RANGE,
  DEID_NUMERICAL_OVERFLOW,
  DEID_IO,
  DEID_INTERNAL
} deid_status;

typedef enum deid_scenario {
  DEID_TOKEN_DETECTION = 0,
  DEID_TOKEN_RELAXED,
  DEID_TOKEN_STRICT,
  DEID_ENTITY_DETECTION,
  DEID_ENTITY_CLASSIFICATION
} deid_scenario;

typedef enum deid_anon_mode {
  DEID_ANON_MASK = 0,
  DEID_ANON_PLACEHOLDER,
  DEID_ANON_SURROGATE
} deid_anon_mode;

typedef struct deid_corpus deid_corpus;
typedef struct deid_rules deid_rules;
typedef struct deid_crf_model deid_crf_model;
typedef struct deid_report deid_report;

typedef struct deid_span {
  const char* category;
  size_t start;
  size_t end;
} deid_span;

typedef struct deid_metric {
  double precision, recall, f1;
  size_t tp, fp, fn;
} deid_metric;

typedef struct deid_crf_config {
  int max_iterations;
  double c1;
  double c2;
  int all_transitions;
  double tolerance;
  int lbfgs_memory;
  int threads; /* 0: one per hardware thread */
} deid_crf_config;

typedef struct deid_train_stats {
  int iterations;
  double objective;
  double wall_seconds;
  size_t num_parameters;
  double dev_accuracy;
} deid_train_stats;

typedef struct deid_anon_policy {
  deid_anon_mode mode;
  uint32_t mask_char;
  const char* placeholder_format; /* "{CAT}" marks the category; NULL: "[--{CAT}--]" */
  int fit_placeholder_length;
  uint64_t seed;
  int date_shift_min, date_shift_max;
  int age_shift_min, age_shift_max;
  const char* names_dir; /* ine_female.txt, ine_male.txt, surnames.txt; NULL: no name pools */
} deid_anon_policy;

DEID_API const char* deid_version(void);
DEID_API const char* deid_last_error(void);
DEID_API const char* deid_status_name(deid_status status);

/* Strings returned through char** out-parameters. */
DEID_API void deid_string_free(char* s);

/* Corpora. `labels_path` may be NULL for the built-in NUBes-PHI categories. */
DEID_API deid_status deid_corpus_generate(uint64_t seed, size_t n_documents, deid_corpus** out);
DEID_API deid_status deid_corpus_read_brat(const char* dir, const char* labels_path, deid_corpus** out);
DEID_API deid_status deid_corpus_write_brat(const deid_corpus* corpus, const char* dir);
DEID_API deid_status deid_corpus_size(const deid_corpus* corpus, size_t* out);
DEID_API deid_status deid_corpus_annotation_count(const deid_corpus* corpus, size_t* out);
DEID_API deid_status deid_corpus_hash(const deid_corpus* corpus, uint64_t* out);
/* Pointers stay valid until the corpus is freed. */
DEID_API deid_status deid_corpus_document(const deid_corpus* corpus, size_t index, const char** id,
                                          const char** text);
DEID_API deid_status deid_corpus_split(const deid_corpus* corpus, double train, double dev, double test,
                                       uint64_t seed, deid_corpus** train_out, deid_corpus** dev_out,
                                       deid_corpus** test_out);
DEID_API void deid_corpus_free(deid_corpus* corpus);

/* Interchange TSV. `pred` may be NULL (pred column written as '-'). */
DEID_API deid_status deid_interchange_write(const deid_corpus* gold, const deid_corpus* pred,
                                           const char* path);
DEID_API deid_status deid_interchange_import(const deid_corpus* gold, const char* path,
                                            const char* labels_path, deid_corpus** pred_out);

/* Rule tagger. `names_path` may be NULL for an empty name list. */
DEID_API deid_status deid_rules_build(const deid_corpus* train, const char* names_path, deid_rules** out);
DEID_API deid_status deid_rules_save(const deid_rules* rules, const char* dir);
DEID_API deid_status deid_rules_load(const char* dir, deid_rules** out);
DEID_API void deid_rules_free(deid_rules* rules);

/* CRF tagger. */
DEID_API void deid_crf_config_default(deid_crf_config* config);
DEID_API deid_status deid_crf_train(const deid_corpus* train, const deid_corpus* dev,
                                    const deid_crf_config* config, deid_crf_model** out,
                                    deid_train_stats* stats);
DEID_API deid_status deid_crf_save(const deid_crf_model* model, const char* path);
DEID_API deid_status deid_crf_load(const char* path, deid_crf_model** out);
DEID_API void deid_crf_free(deid_crf_model* model);

/* Tagging keeps ids and texts and replaces the annotations. */
DEID_API deid_status deid_tag_rules(const deid_rules* rules, const deid_corpus* in, int threads,
                                    deid_corpus** out);
DEID_API deid_status deid_tag_crf(const deid_crf_model* model, const deid_corpus* in, int threads,
                                  deid_corpus** out);

/* Evaluation. `labels_path` may be NULL for the built-in categories. */
DEID_API deid_status deid_evaluate(const deid_corpus* gold, const deid_corpus* pred,
                                   const char* labels_path, deid_report** out);
DEID_API deid_status deid_evaluate_interchange(const deid_corpus* gold, const char* tsv_path,
                                               const char* labels_path, deid_report** out);
DEID_API deid_status deid_report_metric(const deid_report* report, deid_scenario scenario,
                                        deid_metric* out);
DEID_API deid_status deid_report_min_f1(const deid_report* report, double* out);
/* CSV with header `system,fraction,scenario,precision,recall,f1,tp,fp,fn`. */
DEID_API deid_status deid_report_csv(const deid_report* report, const char* system, int fraction,
                                     char** out);
/* Tab-separated confusion matrix; row-normalized when `normalized` != 0. */
DEID_API deid_status deid_report_confusion(const deid_report* report, int normalized, char** out);
DEID_API void deid_report_free(deid_report* report);

/* Learning-curve study. `systems` is a comma-separated list of "crf" and
 * "rules". Writes the report CSV to *csv_out and the F1 deltas CSV to
 * *deltas_out (either may be NULL). */
DEID_API deid_status deid_ablate(const deid_corpus* train, const deid_corpus* dev, const deid_corpus* test,
                                 const char* systems, const int* fractions, size_t n_fractions,
                                 uint64_t seed, const deid_crf_config* config, const char* names_path,
                                 const char* labels_path, char** csv_out, char** deltas_out);

/* Anonymisation. */
DEID_API void deid_anon_policy_default(deid_anon_policy* policy);
DEID_API deid_status deid_anonymise_text(const char* doc_id, const char* text, const deid_span* spans,
                                         size_t n_spans, const deid_anon_policy* policy, char** out);
/* Annotations of the output corpus point at the replacement strings. When
 * `mapping_dir` is not NULL, one <id>.map.json side table is written per
 * document. `gazetteers` (optional) supplies same-category surrogates. */
DEID_API deid_status deid_anonymise_corpus(const deid_corpus* in, const deid_anon_policy* policy,
                                           const deid_rules* gazetteers, const char* mapping_dir,
                                           deid_corpus** out);

#ifdef __cplusplus
}
#endif

#endif /* DEID_DEID_H */
