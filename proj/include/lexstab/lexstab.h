/*
 * lexstab.h - C interface to the lexstab library.
 *
 * Objects are opaque handles created by *_load / *_parse / *_compute / *_run
 * functions and released with the matching *_free. Every fallible call
 * returns a lexstab_status; on failure lexstab_last_error() describes the
 * problem (thread-local, valid until the next call on the same thread).
 * Strings returned through char** are owned by the caller and released with
 * lexstab_string_free(). const char* results point into the owning handle.
 */
#ifndef LEXSTAB_H
#define LEXSTAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LEXSTAB_BUILDING)
#    define LEXSTAB_API __declspec(dllexport)
#  else
#    define LEXSTAB_API __declspec(dllimport)
#  endif
#else
#  define LEXSTAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lexstab_status {
  LEXSTAB_OK = 0,
  LEXSTAB_ERR_ARGUMENT = 1, /* null handle, bad enum, out-of-range index */
  LEXSTAB_ERR_PARSE = 2,    /* malformed Newick; location is a character offset */
  LEXSTAB_ERR_DATA = 3,     /* malformed cognate table or cache; location is a line */
  LEXSTAB_ERR_DOMAIN = 4,   /* analysis precondition not met */
  LEXSTAB_ERR_IO = 5,       /* file could not be read or written */
  LEXSTAB_ERR_INTERNAL = 6
} lexstab_status;

typedef struct lexstab_tree lexstab_tree;
typedef struct lexstab_cognates lexstab_cognates;
typedef struct lexstab_diagnostics lexstab_diagnostics;
typedef struct lexstab_metrics lexstab_metrics;
typedef struct lexstab_analysis lexstab_analysis;

LEXSTAB_API const char* lexstab_version(void);
LEXSTAB_API const char* lexstab_status_name(lexstab_status status);
LEXSTAB_API const char* lexstab_last_error(void);
/* Character offset (parse errors) or 1-based line (data errors) of the last error; 0 if none. */
LEXSTAB_API size_t lexstab_last_error_location(void);
LEXSTAB_API void lexstab_string_free(char* str);

/* ---- trees ---- */

typedef struct lexstab_tree_summary {
  size_t tips;
  size_t nodes;
  double height;
  int is_binary;
  size_t polytomies;
  size_t defaulted_lengths;
} lexstab_tree_summary;

LEXSTAB_API lexstab_status lexstab_tree_parse(const char* text, size_t len, lexstab_tree** out);
LEXSTAB_API lexstab_status lexstab_tree_load(const char* path, lexstab_tree** out);
LEXSTAB_API void lexstab_tree_free(lexstab_tree* tree);
LEXSTAB_API lexstab_status lexstab_tree_write_newick(const lexstab_tree* tree, char** out);
LEXSTAB_API lexstab_status lexstab_tree_get_summary(const lexstab_tree* tree, lexstab_tree_summary* out);
/* NULL when i is out of range. */
LEXSTAB_API const char* lexstab_tree_tip_label(const lexstab_tree* tree, size_t i);
LEXSTAB_API lexstab_status lexstab_tree_prune(const lexstab_tree* tree, const char* const* labels, size_t n_labels,
                                              lexstab_tree** out);

/* ---- cognate tables ---- */

typedef struct lexstab_cognate_counts {
  size_t languages;
  size_t concepts;
  size_t rows;
  size_t loans;
} lexstab_cognate_counts;

/* warnings (may be NULL) receives non-fatal diagnostics such as a missing loan column. */
LEXSTAB_API lexstab_status lexstab_cognates_parse(const char* text, size_t len, lexstab_cognates** out,
                                                  lexstab_diagnostics** warnings);
LEXSTAB_API lexstab_status lexstab_cognates_load(const char* path, lexstab_cognates** out,
                                                 lexstab_diagnostics** warnings);
LEXSTAB_API void lexstab_cognates_free(lexstab_cognates* cognates);
LEXSTAB_API lexstab_status lexstab_cognates_get_counts(const lexstab_cognates* cognates, lexstab_cognate_counts* out);

/* ---- diagnostics ---- */

typedef enum lexstab_level { LEXSTAB_LEVEL_ERROR = 0, LEXSTAB_LEVEL_WARNING = 1 } lexstab_level;

/* Checks both files and their agreement. Returns LEXSTAB_ERR_IO only when a
 * file cannot be read; syntax problems are reported as error diagnostics. */
LEXSTAB_API lexstab_status lexstab_validate_files(const char* tree_path, const char* cognates_path,
                                                  lexstab_diagnostics** out);
LEXSTAB_API size_t lexstab_diagnostics_count(const lexstab_diagnostics* diags);
LEXSTAB_API size_t lexstab_diagnostics_count_level(const lexstab_diagnostics* diags, lexstab_level level);
LEXSTAB_API lexstab_level lexstab_diagnostic_level(const lexstab_diagnostics* diags, size_t i);
LEXSTAB_API size_t lexstab_diagnostic_line(const lexstab_diagnostics* diags, size_t i);
LEXSTAB_API const char* lexstab_diagnostic_message(const lexstab_diagnostics* diags, size_t i);
LEXSTAB_API void lexstab_diagnostics_free(lexstab_diagnostics* diags);

/* ---- comparative methods ---- */

typedef struct lexstab_dstat_result {
  double d_obs;
  double mean_d_random;
  double mean_d_bm;
  double sd_d_random;
  double sd_d_bm;
  double D;
  double p_random;
  double p_bm;
  size_t n_reps;
  size_t n_tips_used;
  size_t n_present;
} lexstab_dstat_result;

/* D statistic of one cognate class over the tree's tips. The null streams are
 * seeded from (seed, concept, class), exactly as in lexstab_metrics_compute. */
LEXSTAB_API lexstab_status lexstab_dstat(const lexstab_tree* tree, const lexstab_cognates* cognates,
                                         const char* concept_id, const char* cognate_id, size_t n_reps,
                                         uint64_t seed, size_t workers, lexstab_dstat_result* out);

/* Brownian-motion tip values in tip order; `values` must hold n = tip count doubles. */
LEXSTAB_API lexstab_status lexstab_simulate_bm(const lexstab_tree* tree, double sigma2, double root_value,
                                               uint64_t seed, double* values, size_t n);
/* Same values as a tab-separated table: header "tip\tvalue", one row per tip. */
LEXSTAB_API lexstab_status lexstab_simulate_bm_table(const lexstab_tree* tree, double sigma2, double root_value,
                                                     uint64_t seed, char** out);

/* ---- pipeline ---- */

typedef struct lexstab_config {
  uint64_t seed;
  size_t n_reps;        /* null replicates per class, default 1000 */
  size_t wordlist_k;    /* default 30 */
  size_t cluster_k;     /* 0 = choose by silhouette over [k_min, k_max] */
  size_t k_min;         /* default 2 */
  size_t k_max;         /* default 6 */
  size_t restarts;      /* k-means restarts, default 25 */
  double stability_mix; /* SE-quadrant warning threshold, default 0.8 */
  size_t workers;       /* threads; results never depend on it */
} lexstab_config;

LEXSTAB_API void lexstab_config_init(lexstab_config* config);

LEXSTAB_API lexstab_status lexstab_metrics_compute(const lexstab_tree* tree, const lexstab_cognates* cognates,
                                                   const lexstab_config* config, lexstab_metrics** out);
LEXSTAB_API lexstab_status lexstab_metrics_load(const char* path, lexstab_metrics** out);
LEXSTAB_API lexstab_status lexstab_metrics_save(const lexstab_metrics* metrics, const char* path);
LEXSTAB_API size_t lexstab_metrics_concept_count(const lexstab_metrics* metrics);
LEXSTAB_API uint64_t lexstab_metrics_seed(const lexstab_metrics* metrics);
/* Feature table (CSV) and its provenance sidecar (JSON). */
LEXSTAB_API lexstab_status lexstab_metrics_write_table(const lexstab_metrics* metrics, const char* path);
LEXSTAB_API lexstab_status lexstab_metrics_write_provenance(const lexstab_metrics* metrics, const char* path);
LEXSTAB_API void lexstab_metrics_free(lexstab_metrics* metrics);

typedef enum lexstab_output {
  LEXSTAB_OUTPUT_REPORT = 0,   /* JSON report, schema lexstab.report/1 */
  LEXSTAB_OUTPUT_RANKING = 1,  /* TSV: concept, PC1, PC2, score, rank, quadrant, cluster */
  LEXSTAB_OUTPUT_SCATTER = 2,  /* SVG */
  LEXSTAB_OUTPUT_PCA = 3,      /* JSON */
  LEXSTAB_OUTPUT_CLUSTERS = 4  /* JSON */
} lexstab_output;

LEXSTAB_API lexstab_status lexstab_analysis_run(const lexstab_metrics* metrics, const lexstab_config* config,
                                                lexstab_analysis** out);
LEXSTAB_API lexstab_status lexstab_analysis_render(const lexstab_analysis* analysis, lexstab_output kind, char** out);
LEXSTAB_API lexstab_status lexstab_analysis_write(const lexstab_analysis* analysis, lexstab_output kind,
                                                  const char* path);
LEXSTAB_API size_t lexstab_analysis_cluster_k(const lexstab_analysis* analysis);
LEXSTAB_API size_t lexstab_analysis_selected_count(const lexstab_analysis* analysis);
LEXSTAB_API const char* lexstab_analysis_selected(const lexstab_analysis* analysis, size_t i);
LEXSTAB_API size_t lexstab_analysis_warning_count(const lexstab_analysis* analysis);
LEXSTAB_API const char* lexstab_analysis_warning(const lexstab_analysis* analysis, size_t i);
LEXSTAB_API void lexstab_analysis_free(lexstab_analysis* analysis);

#ifdef __cplusplus
}
#endif

#endif /* LEXSTAB_H */
