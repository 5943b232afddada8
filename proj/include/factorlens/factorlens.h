/*
 * factorlens C API.
 *
 * Every function returns an fl_status. On failure, fl_last_error() returns a
 * message for the calling thread that stays valid until that thread's next
 * API call. Matrices are row-major arrays of doubles. Handles are opaque and
 * released with their matching _free function (which accepts NULL).
 */
#ifndef FACTORLENS_FACTORLENS_H
#define FACTORLENS_FACTORLENS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FACTORLENS_BUILDING_LIBRARY)
#    define FL_API __declspec(dllexport)
#  else
#    define FL_API __declspec(dllimport)
#  endif
#else
#  define FL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fl_status {
  FL_OK = 0,
  FL_CHECK_FAILED = 1,      /* suitability verdict failed (check subcommand) */
  FL_ERR_VALIDATION = 2,    /* bad input data, files, or arguments */
  FL_ERR_NUMERICAL = 3,     /* singular/indefinite matrix, degenerate statistic */
  FL_ERR_INTERNAL = 4
} fl_status;

typedef enum fl_message_level { FL_MSG_INFO = 0, FL_MSG_WARNING = 1 } fl_message_level;

typedef void (*fl_message_fn)(fl_message_level level, const char* message, void* user_data);

FL_API const char* fl_version(void);
FL_API const char* fl_last_error(void);

/* ---- pipeline ---------------------------------------------------------- */

typedef struct fl_config fl_config;

FL_API fl_config* fl_config_new(void);
FL_API void fl_config_free(fl_config* config);

/*
 * Sets one option from its textual form. Keys: profiles, survey, out, window,
 * retention (kaiser | cumvar:<pct> | fixed:<k>), cutoff, kaiser_normalize
 * (true|false), scores (regression | sum-of-assigned), log1p (true|false), l2,
 * folds, seed, format (json|csv), question (1..6|all), lenient (true|false),
 * averaging (weighted|positive), kmo_min, alpha, users.
 */
FL_API fl_status fl_config_set(fl_config* config, const char* key, const char* value);

FL_API void fl_config_set_message_callback(fl_config* config, fl_message_fn fn, void* user_data);

/* Runs ingest, check, efa, train, report or synth. */
FL_API fl_status fl_run(const fl_config* config, const char* subcommand);

/* ---- numerical kernels ------------------------------------------------- */

/* data: n x p; out_r: p x p. */
FL_API fl_status fl_correlation(const double* data, size_t n, size_t p, double* out_r);

/* m: p x p symmetric; eigenvalues descending into out_values (p);
 * eigenvectors as columns of out_vectors (p x p), may be NULL. */
FL_API fl_status fl_eigen_sym(const double* m, size_t p, double* out_values, double* out_vectors);

FL_API fl_status fl_kmo(const double* r, size_t p, double* out_kmo);

FL_API fl_status fl_bartlett(const double* r, size_t p, size_t n, double* out_chi2, int* out_df,
                             double* out_p_value);

FL_API fl_status fl_chi_square_upper_tail(double x, double df, double* out_p);

/* loadings: p x k. out_rotated: p x k; out_rotation: k x k, may be NULL. */
FL_API fl_status fl_varimax(const double* loadings, size_t p, size_t k, int kaiser_normalize,
                            double* out_rotated, double* out_rotation);

/* ---- factor model ------------------------------------------------------ */

typedef struct fl_efa_model fl_efa_model;

/*
 * Fits PCA extraction + varimax on an n x p data matrix. retention uses the
 * same syntax as the config key; names may be NULL.
 */
FL_API fl_status fl_efa_fit(const double* data, size_t n, size_t p, const char* const* names,
                            const char* retention, double cutoff, int kaiser_normalize,
                            fl_efa_model** out_model);
FL_API void fl_efa_free(fl_efa_model* model);

FL_API size_t fl_efa_variables(const fl_efa_model* model);
FL_API size_t fl_efa_factors(const fl_efa_model* model);
/* p values. */
FL_API fl_status fl_efa_eigenvalues(const fl_efa_model* model, double* out);
/* p values. */
FL_API fl_status fl_efa_communalities(const fl_efa_model* model, double* out);
/* p x k. */
FL_API fl_status fl_efa_unrotated(const fl_efa_model* model, double* out);
FL_API fl_status fl_efa_rotated(const fl_efa_model* model, double* out);
/* p entries: 1-based factor index, or 0 when unassigned. */
FL_API fl_status fl_efa_assignment(const fl_efa_model* model, int* out);
/* n x k regression-method scores for the data the model was fit on. */
FL_API fl_status fl_efa_scores(const fl_efa_model* model, double* out);

/* ---- logistic regression ----------------------------------------------- */

typedef struct fl_logit_model fl_logit_model;

/* x: n x d (no intercept column), y: n entries of 0/1. */
FL_API fl_status fl_logit_fit(const double* x, size_t n, size_t d, const int* y, double l2,
                              fl_logit_model** out_model);
FL_API void fl_logit_free(fl_logit_model* model);
/* d + 1 weights, intercept first. */
FL_API fl_status fl_logit_weights(const fl_logit_model* model, double* out);
FL_API int fl_logit_converged(const fl_logit_model* model);
FL_API fl_status fl_logit_predict(const fl_logit_model* model, const double* x, size_t d, double* out_probability,
                                  int* out_label);

#ifdef __cplusplus
}
#endif

#endif /* FACTORLENS_FACTORLENS_H */
