/* C interface to the fossils least-squares library.
 *
 * Objects are opaque handles created by *_create / *_generate functions and
 * released with the matching *_destroy. Every fallible call returns an
 * fls_status; on failure, fls_last_error() describes the problem (the message
 * is thread-local and valid until the next failing call on that thread).
 * Matrices are column-major. Pointers returned by getters are borrowed and
 * stay valid for the lifetime of the owning handle.
 */
#ifndef FOSSILS_FOSSILS_H
#define FOSSILS_FOSSILS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FLS_API __declspec(dllexport)
#else
#define FLS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fls_status {
  FLS_OK = 0,
  FLS_ERR_DIMENSION = 1,
  FLS_ERR_PARAMETER = 2,
  FLS_ERR_SINGULAR = 3,
  FLS_ERR_CONVERGENCE = 4,
  FLS_ERR_DIVERGENCE = 5,
  FLS_ERR_BREAKDOWN = 6,
  FLS_ERR_PARSE = 7,
  FLS_ERR_UNSUPPORTED = 8,
  FLS_ERR_IO = 9,
  FLS_ERR_NULL_ARGUMENT = 10,
  FLS_ERR_INTERNAL = 11
} fls_status;

FLS_API const char* fls_status_name(fls_status status);
FLS_API const char* fls_last_error(void);
FLS_API double fls_unit_roundoff(void);

/* ---- matrices ---------------------------------------------------------- */

typedef struct fls_matrix fls_matrix;

/* colmajor may be NULL for a zero matrix. */
FLS_API fls_status fls_matrix_create(size_t rows, size_t cols, const double* colmajor,
                                     fls_matrix** out);
FLS_API void fls_matrix_destroy(fls_matrix* m);
FLS_API size_t fls_matrix_rows(const fls_matrix* m);
FLS_API size_t fls_matrix_cols(const fls_matrix* m);
FLS_API const double* fls_matrix_data(const fls_matrix* m);

/* MatrixMarket: array or coordinate, real or integer, general. */
FLS_API fls_status fls_matrix_read(const char* path, fls_matrix** out);
/* coordinate != 0 writes the coordinate format, else array. */
FLS_API fls_status fls_matrix_write(const fls_matrix* m, const char* path, int coordinate);

/* ---- solver configuration ---------------------------------------------- */

typedef struct fls_config fls_config;

/* Defaults: d_factor 12, zeta 8, q_max 100, gamma 10, rho 0.4, tolerance
 * multiplier 1, check every 5, mu factor 10, seed 0. */
FLS_API fls_status fls_config_create(fls_config** out);
FLS_API void fls_config_destroy(fls_config* cfg);
FLS_API fls_status fls_config_set_d_factor(fls_config* cfg, double d_factor);
FLS_API fls_status fls_config_set_zeta(fls_config* cfg, size_t zeta);
/* eta <= 0 restores the default sqrt(n/d). */
FLS_API fls_status fls_config_set_eta(fls_config* cfg, double eta);
FLS_API fls_status fls_config_set_safety(fls_config* cfg, int enabled);
FLS_API fls_status fls_config_set_q_max(fls_config* cfg, size_t q_max);
FLS_API fls_status fls_config_set_gamma(fls_config* cfg, double gamma);
FLS_API fls_status fls_config_set_rho(fls_config* cfg, double rho);
FLS_API fls_status fls_config_set_tolerance_multiplier(fls_config* cfg, double mult);
FLS_API fls_status fls_config_set_check_every(fls_config* cfg, size_t every);
FLS_API fls_status fls_config_set_mu_factor(fls_config* cfg, double factor);
FLS_API fls_status fls_config_set_seed(fls_config* cfg, uint64_t seed);

/* ---- synthetic problems ----------------------------------------------- */

typedef struct fls_problem fls_problem;

FLS_API fls_status fls_problem_generate(size_t m, size_t n, double kappa, double resid_norm,
                                        uint64_t seed, fls_problem** out);
/* kappa = difficulty, residual norm = difficulty * u. */
FLS_API fls_status fls_problem_difficulty(size_t m, size_t n, double difficulty, uint64_t seed,
                                          fls_problem** out);
FLS_API void fls_problem_destroy(fls_problem* p);
FLS_API const fls_matrix* fls_problem_matrix(const fls_problem* p);
FLS_API const double* fls_problem_rhs(const fls_problem* p, size_t* len);
FLS_API const double* fls_problem_solution(const fls_problem* p, size_t* len);

/* ---- solving ------------------------------------------------------------ */

typedef enum fls_solver {
  FLS_SOLVER_FOSSILS = 0,       /* recommended: scaling, SVD preconditioner, adaptive */
  FLS_SOLVER_FOSSILS_BASIC = 1, /* QR preconditioner, `iters` updates per step */
  FLS_SOLVER_SPIR_LSQR = 2,     /* `iters` per refinement step */
  FLS_SOLVER_SPIR_CG = 3,
  FLS_SOLVER_ISK_MOMENTUM = 4,  /* `iters` total */
  FLS_SOLVER_SAP_ZERO = 5,
  FLS_SOLVER_SAP_SKS = 6,
  FLS_SOLVER_QR = 7
} fls_solver;

/* Names: fossils, fossils-basic, spir-lsqr, spir-cg, isk-momentum, sap-zero,
 * sap-sks, qr. */
FLS_API fls_status fls_solver_from_name(const char* name, fls_solver* out);
FLS_API const char* fls_solver_name(fls_solver solver);

/* Receives every recorded iterate; iteration 0 is the initial guess. */
typedef void (*fls_iterate_callback)(size_t iteration, const double* x, size_t n, void* user);

typedef struct fls_result fls_result;

/* cfg may be NULL for defaults; callback may be NULL. `iters` is ignored by
 * FLS_SOLVER_FOSSILS and FLS_SOLVER_QR. */
FLS_API fls_status fls_solve(fls_solver solver, const fls_matrix* a, const double* b,
                             size_t b_len, const fls_config* cfg, size_t iters,
                             fls_iterate_callback callback, void* user, fls_result** out);
FLS_API void fls_result_destroy(fls_result* r);
FLS_API const double* fls_result_solution(const fls_result* r, size_t* len);
FLS_API int fls_result_converged(const fls_result* r);
FLS_API int fls_result_regularized(const fls_result* r);
FLS_API double fls_result_mu(const fls_result* r);
FLS_API double fls_result_condest(const fls_result* r);
FLS_API double fls_result_normest(const fls_result* r);
FLS_API double fls_result_eta(const fls_result* r);
FLS_API double fls_result_iteration_floor(const fls_result* r);
FLS_API size_t fls_result_refinement_steps(const fls_result* r);
FLS_API size_t fls_result_step_iterations(const fls_result* r, size_t step);
FLS_API size_t fls_result_total_iterations(const fls_result* r);
FLS_API const double* fls_result_update_norms(const fls_result* r, size_t* len);
FLS_API const double* fls_result_be_history(const fls_result* r, size_t* len);
/* Step 0 is the initial iterate; returns NULL past the last step. */
FLS_API const double* fls_result_step_solution(const fls_result* r, size_t step, size_t* len);
FLS_API size_t fls_result_warning_count(const fls_result* r);
FLS_API const char* fls_result_warning(const fls_result* r, size_t index);

/* ---- error measurement ------------------------------------------------- */

typedef struct fls_evaluator fls_evaluator;

typedef struct fls_metrics {
  double forward_err;  /* NaN without a reference solution */
  double residual_err; /* NaN without a reference solution */
  double kw;           /* NaN unless exact_kw was requested */
  double kw_sketched;
  double resid_orth;
} fls_metrics;

/* Measures on the problem normalized to ||A|| = ||b|| = 1 with an independent
 * measurement sketch (20n rows). x_true may be NULL. */
FLS_API fls_status fls_evaluator_create(const fls_matrix* a, const double* b, size_t b_len,
                                        const double* x_true, size_t x_len, uint64_t seed,
                                        int exact_kw, fls_evaluator** out);
FLS_API void fls_evaluator_destroy(fls_evaluator* e);
FLS_API fls_status fls_evaluator_measure(const fls_evaluator* e, const double* xhat,
                                         size_t len, fls_metrics* out);

#ifdef __cplusplus
}
#endif

#endif
