/* C API for the kernel SVM training engine.
 *
 * All functions return ksvm_status; KSVM_OK is zero. On failure a
 * thread-local message is available via ksvm_last_error(). Objects are
 * opaque handles released with their _free function. Passing NULL where a
 * handle or required pointer is expected yields KSVM_ERR_CONFIG.
 */
#ifndef KSVM_H
#define KSVM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    KSVM_OK = 0,
    KSVM_ERR_DATA = 2,   /* file/parse/shape problems */
    KSVM_ERR_SOLVER = 3, /* optimizer stalled or diverged */
    KSVM_ERR_CONFIG = 4, /* invalid options or arguments */
    KSVM_ERR_INTERNAL = 5
} ksvm_status;

/* Message for the most recent failure on this thread; never NULL. */
const char* ksvm_last_error(void);

/* Cap internal linear-algebra parallelism; n < 1 restores the default. */
void ksvm_set_max_threads(int n);

typedef struct ksvm_dataset ksvm_dataset;
typedef struct ksvm_model ksvm_model;

/* ---- datasets ---- */

/* LIBSVM sparse format; dim_override > 0 fixes the feature count. */
ksvm_status ksvm_dataset_load_libsvm(const char* path, int dim_override,
                                     ksvm_dataset** out);

/* CSV. label_column: column name (with header) or decimal 0-based index;
 * NULL or "" means no label column (prediction-only data). */
ksvm_status ksvm_dataset_load_csv(const char* path, const char* label_column,
                                  int has_header, ksvm_dataset** out);

/* Row-major n x d points; labels may be NULL (unlabeled). */
ksvm_status ksvm_dataset_from_arrays(const double* points, const double* labels,
                                     int64_t n, int64_t d, ksvm_dataset** out);

/* First n rows as a new dataset (benchmark subsets). */
ksvm_status ksvm_dataset_subset(const ksvm_dataset* data, int64_t n,
                                ksvm_dataset** out);

int64_t ksvm_dataset_rows(const ksvm_dataset* data);
int64_t ksvm_dataset_cols(const ksvm_dataset* data);
int ksvm_dataset_has_labels(const ksvm_dataset* data);
/* Copies n labels (+-1) into out. */
ksvm_status ksvm_dataset_labels(const ksvm_dataset* data, double* out);
void ksvm_dataset_free(ksvm_dataset* data);

/* ---- training ---- */

typedef struct {
    double train_fraction; /* balanced split, default 0.5 */
    uint64_t seed;
    int mi_bins;     /* histogram bins for feature scoring, default 10 */
    int window_size; /* max features per kernel window, default 3 */
    const char* windows; /* explicit "0,1,2;3,4" (0-based) or NULL for auto */
    const double* length_scales; /* per window, or one shared; NULL = 1.0 */
    int num_length_scales;
    int fast_backend;    /* 1 = Fourier-based matvec (default), 0 = exact */
    const char* precond; /* none | cholesky-greedy | cholesky-random |
                            nystrom-columns | nystrom-gaussian | rff */
    int rank;            /* total preconditioner rank, split across windows */
    double cholesky_err_tol;
    int fastsum_bandwidth;
    int fastsum_cutoff;
    int fastsum_oversampling;
    double fastsum_torus_radius;
    double C;
    double sigma;  /* barrier reduction factor */
    double gamma0; /* fraction-to-boundary */
    double tol_ip;
    int max_ip_iters;
    double tol_gmres;
    int max_gmres_iters;
    double mu0;
} ksvm_train_options;

/* Fill with defaults; call before overriding fields. */
void ksvm_train_options_init(ksvm_train_options* opts);

typedef struct {
    int64_t n_train;
    int64_t n_test;
    int d;
    int P;    /* number of kernel windows */
    int rank; /* achieved stacked preconditioner rank */
    double fit_seconds;
    double precond_setup_seconds;
    int ipm_iters;
    double mean_gmres;
    double xi_alpha;
    double xi_lambda;
    double mu_final;
    int status; /* 0 converged, 1 iteration cap, 2 stalled */
} ksvm_train_report;

/* Balance + split + normalize internally, then fit. test_out (optional)
 * receives the held-out normalized split; report is optional too. */
ksvm_status ksvm_train(const ksvm_dataset* data,
                       const ksvm_train_options* opts, ksvm_model** model_out,
                       ksvm_dataset** test_out, ksvm_train_report* report);

/* ---- prediction ---- */

/* Raw (unnormalized) points; the model applies its stored normalization.
 * decision_values and labels_out each hold n doubles; either may be NULL. */
ksvm_status ksvm_predict(const ksvm_model* model, const ksvm_dataset* data,
                         int fast_backend, double* decision_values,
                         double* labels_out);

/* Predictions for an already-normalized dataset (e.g. the test_out split of
 * ksvm_train). Same output contract as ksvm_predict. */
ksvm_status ksvm_predict_normalized(const ksvm_model* model,
                                    const ksvm_dataset* data, int fast_backend,
                                    double* decision_values,
                                    double* labels_out);

/* ---- model persistence ---- */

ksvm_status ksvm_model_save(const ksvm_model* model, const char* path);
ksvm_status ksvm_model_load(const char* path, ksvm_model** out);
int64_t ksvm_model_num_support(const ksvm_model* model);
double ksvm_model_bias(const ksvm_model* model);
void ksvm_model_free(ksvm_model* model);

/* ---- hyperparameter search ---- */

typedef struct {
    double ell_min; /* log-uniform length-scale range, default [0.1, 10] */
    double ell_max;
    double c_min; /* uniform C range, default [0.1, 0.7] */
    double c_max;
    int trials;
    uint64_t seed;
    int shared_lengthscale; /* 1 = one length scale for all windows */
    int holdout; /* 1 = carve validation out of the training part (3-way
                    split) instead of scoring on the test part */
} ksvm_tune_options;

void ksvm_tune_options_init(ksvm_tune_options* opts);

typedef struct {
    double best_C;
    double best_accuracy;
    int best_trial;
} ksvm_tune_summary;

/* Random search: split per train_opts, evaluate each trial on the held-out
 * part. csv_out (optional) receives a malloc'd per-trial log; free with
 * ksvm_string_free. best_model_out is optional. */
ksvm_status ksvm_tune(const ksvm_dataset* data,
                      const ksvm_train_options* train_opts,
                      const ksvm_tune_options* tune_opts,
                      ksvm_model** best_model_out, ksvm_tune_summary* summary,
                      char** csv_out);

void ksvm_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* KSVM_H */
