/*
 * bjq - dynamic treatment regime learning for right-censored survival data.
 *
 * C interface to the shared library. All functions return a status code
 * (BJQ_OK on success); on failure bjq_last_error() holds a thread-local
 * message describing what went wrong. Objects are exchanged as opaque
 * handles that must be released with the matching *_free function.
 */
#ifndef BJQ_H
#define BJQ_H

#ifdef __cplusplus
extern "C" {
#endif

#define BJQ_OK 0
#define BJQ_ERR_VALIDATION 2
#define BJQ_ERR_FIT 3
#define BJQ_ERR_IO 4

typedef struct bjq_cohort_s bjq_cohort;
typedef struct bjq_policy_s bjq_policy;

const char* bjq_version(void);

/* Message for the most recent failing call on this thread ("" if none). */
const char* bjq_last_error(void);

/*
 * Run the replicated simulation experiment described by the configuration
 * file (NULL or "" = built-in defaults) and write summary.csv,
 * accuracies.csv, qvalues.csv and manifest.txt under out_dir.
 * threads <= 0 picks the hardware concurrency.
 */
int bjq_simulate_file(const char* config_path, const char* out_dir, int threads);

/* Same, but the configuration document is passed as a string. */
int bjq_simulate_text(const char* config_text, const char* out_dir, int threads);

/*
 * Column mapping for long-format CSV data (one row per subject and stage).
 * NULL fields take the defaults: id, stage, time, event, treatment; with
 * covariate_cols NULL every remaining column is a covariate.
 * covariate_cols is comma-separated. treatment_a_label names the label to
 * treat as arm A (default: "A" if present, else "1").
 */
typedef struct bjq_csv_schema_s {
  const char* subject_col;
  const char* stage_col;
  const char* time_col;
  const char* event_col;
  const char* treatment_col;
  const char* covariate_cols;
  const char* treatment_a_label;
} bjq_csv_schema;

int bjq_cohort_read_csv(const char* path, const bjq_csv_schema* schema, bjq_cohort** out);
int bjq_cohort_write_csv(const bjq_cohort* cohort, const char* path);
void bjq_cohort_free(bjq_cohort* cohort);
int bjq_cohort_subjects(const bjq_cohort* cohort);
int bjq_cohort_stages(const bjq_cohort* cohort);

/*
 * Fit a treatment policy over `stages` decision stages.
 *   method: "bj" (Buckley-James imputation) or "cox" (proportional hazards).
 *   terms:  model formula, e.g. "intercept + sex + tumor_size + treatment
 *           + tumor_size:treatment"; NULL = intercept + every covariate
 *           + treatment.
 */
int bjq_policy_fit(const bjq_cohort* cohort, int stages, const char* method, const char* terms,
                   bjq_policy** out);

/*
 * Fit and also write model files plus recommendations.csv, imputed.csv and
 * (single-stage data) km_curves.csv under out_dir.
 */
int bjq_policy_fit_outputs(const bjq_cohort* cohort, int stages, const char* method,
                           const char* terms, const char* out_dir, bjq_policy** out);

int bjq_policy_save(const bjq_policy* policy, const char* dir);
int bjq_policy_load(const char* dir, bjq_policy** out);
void bjq_policy_free(bjq_policy* policy);
int bjq_policy_stages(const bjq_policy* policy);

/*
 * Stage coefficients (1-based stage). Writes up to buf_len values and stores
 * the full length in *n_out; fails if buf_len is too small and buf not NULL.
 */
int bjq_policy_coefficients(const bjq_policy* policy, int stage, double* buf, int buf_len,
                            int* n_out);

/* Per-subject recommended arms and counterfactual Q-values per stage. */
int bjq_policy_recommend_csv(const bjq_policy* policy, const bjq_cohort* cohort,
                             const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif /* BJQ_H */
