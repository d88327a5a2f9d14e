/* C API of the invgap library.
 *
 * All functions return an ig_status; IG_OK means success. On failure a
 * thread-local message is available through ig_last_error(). Objects are
 * opaque handles created by ig_*_create functions and released with the
 * matching ig_*_free; strings returned through char** are released with
 * ig_string_free.
 */
#ifndef INVGAP_INVGAP_H
#define INVGAP_INVGAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IG_API __declspec(dllexport)
#else
#define IG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t ig_status;

enum {
    IG_OK = 0,
    IG_ERROR_NULL_POINTER = 1,
    IG_ERROR_INVALID_ARGUMENT = 2,
    IG_ERROR_NUMERICAL = 3,
    IG_ERROR_IO = 4,
    IG_ERROR_INTERNAL = 5
};

typedef struct ig_gaussian_s ig_gaussian;
typedef struct ig_model_s ig_model;
typedef struct ig_mlp_s ig_mlp;

IG_API const char* ig_version(void);

/* Message describing the most recent failure on this thread. */
IG_API const char* ig_last_error(void);

IG_API void ig_string_free(char* s);

/* ---- Gaussians -------------------------------------------------------- */

IG_API ig_status ig_gaussian_create_diagonal(int64_t dim, const double* mean,
                                             const double* variances, ig_gaussian** out);
IG_API ig_status ig_gaussian_create_dense(int64_t dim, const double* mean,
                                          const double* cov_row_major, ig_gaussian** out);
IG_API void ig_gaussian_free(ig_gaussian* g);

IG_API int64_t ig_gaussian_dim(const ig_gaussian* g);
IG_API ig_status ig_gaussian_mean(const ig_gaussian* g, double* out);
IG_API ig_status ig_gaussian_covariance(const ig_gaussian* g, double* out_row_major);
IG_API ig_status ig_gaussian_log_density(const ig_gaussian* g, const double* w, double* out);
/* count draws written row-major (count x dim); deterministic in (seed, count). */
IG_API ig_status ig_gaussian_sample(const ig_gaussian* g, uint64_t seed, int64_t count,
                                    double* out);
IG_API ig_status ig_gaussian_kl(const ig_gaussian* q, const ig_gaussian* p, double* out);
IG_API ig_status ig_gaussian_to_json(const ig_gaussian* g, char** json_out);
IG_API ig_status ig_gaussian_from_json(const char* json, ig_gaussian** out);

/* ---- Translation-invariant linear model ------------------------------- */

/* x may be NULL (all-ones). prior_mean may be NULL (zero). prior_var may be
 * NULL, in which case the default prior variance k * sigma2_0 is used. */
IG_API ig_status ig_model_create(int64_t k, const double* x, const double* y, int64_t n_obs,
                                 double sigma2_y, const double* prior_mean,
                                 const double* prior_var, double sigma2_0, ig_model** out);
IG_API void ig_model_free(ig_model* m);

IG_API ig_status ig_model_theta_mix_star(const ig_model* m, double* m_out, double* lambda_out);
IG_API ig_status ig_model_theta_0_star(const ig_model* m, double* m_out, double* lambda_out);
IG_API ig_status ig_model_invariance_gap(const ig_model* m, const double* theta_m,
                                         const double* theta_lambda, double* gap_out);
/* which: 0 = mean-field q0, 1 = invariance-abiding qmix. */
IG_API ig_status ig_model_elbo_terms(const ig_model* m, const double* theta_m,
                                     const double* theta_lambda, int32_t which, double* ell,
                                     double* kl, double* elbo, double* predictive_variance);
IG_API ig_status ig_model_data_related_bound(const ig_model* m, double* out);
IG_API ig_status ig_model_log_evidence(const ig_model* m, double* out);
IG_API ig_status ig_model_true_posterior(const ig_model* m, ig_gaussian** out);
IG_API ig_status ig_model_q0_posterior(const ig_model* m, const double* theta_m,
                                       const double* theta_lambda, ig_gaussian** out,
                                       double* log_z0);
IG_API ig_status ig_model_qmix_posterior(const ig_model* m, const double* theta_m,
                                         const double* theta_lambda, ig_gaussian** out,
                                         double* log_zmix);

/* ---- Feed-forward networks -------------------------------------------- */

/* activation: "identity", "tanh" or "relu" (shared by all layers). */
IG_API ig_status ig_mlp_create(const int64_t* widths, int64_t n_widths, const char* activation,
                               ig_mlp** out);
IG_API void ig_mlp_free(ig_mlp* mlp);
IG_API int64_t ig_mlp_num_weights(const ig_mlp* mlp);
IG_API ig_status ig_mlp_forward(const ig_mlp* mlp, const double* w, const double* x,
                                double* out);
IG_API ig_status ig_mlp_permutation_count(const ig_mlp* mlp, int64_t* out);

/* ---- Experiment runners ------------------------------------------------ */

/* config_json accepts the SweepConfig fields: k_values (or k_min/k_max/
 * k_step), n_obs, y, sigma2_y (number or the literal "1/(2*pi*e)"),
 * sigma2_0, seed. Output is written to out_path (when non-NULL) and/or
 * returned through csv_out. */
IG_API ig_status ig_run_gap_sweep(const char* config_json, const char* out_path,
                                  char** csv_out);
IG_API ig_status ig_run_elbo_sweep(const char* config_json, const char* out_path,
                                   char** csv_out);

/* suite: "gaussian", "invariance", "linear", "bnn" or "all". widths_json,
 * when non-NULL, is a JSON array of layer widths for the bnn suite.
 * all_passed receives 1 when every check passed. */
IG_API ig_status ig_run_verify(const char* suite, uint64_t seed, const char* widths_json,
                               char** json_out, int32_t* all_passed);

/* config_json: {"widths": [...], "activation": "...", "seed": ...,
 * "sigma2_y": ..., "dataset": {"x": [[...]...], "y": [...]} |
 * "synthetic_n": n, "fit": bool, ...}. */
IG_API ig_status ig_run_bnn_check(const char* config_json, char** json_out,
                                  int32_t* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* INVGAP_INVGAP_H */
