/*
 * diffgraph C API.
 *
 * Every function returns a dg_status; DG_OK is zero. On failure the message for the calling
 * thread is available from dg_last_error_message() until the next failing call on that thread.
 * Objects are opaque handles released with the matching *_free function; passing NULL to a
 * *_free function is a no-op. Matrices cross the boundary as row-major double arrays.
 */
#ifndef DIFFGRAPH_DIFFGRAPH_H
#define DIFFGRAPH_DIFFGRAPH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DIFFGRAPH_BUILDING_LIBRARY)
#    define DG_API __declspec(dllexport)
#  else
#    define DG_API __declspec(dllimport)
#  endif
#else
#  define DG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dg_status {
  DG_OK = 0,
  DG_ERR_INVALID_ARGUMENT = 1,
  DG_ERR_SHAPE_MISMATCH = 2,
  DG_ERR_IO = 3,
  DG_ERR_PARSE = 4,
  DG_ERR_NUMERICAL = 5,
  DG_ERR_DIVERGED = 6,
  DG_ERR_CAP_EXCEEDED = 7,
  DG_ERR_SEARCH_FAILED = 8,
  DG_ERR_INTERNAL = 9
} dg_status;

typedef enum dg_penalty_kind { DG_PENALTY_LASSO = 0, DG_PENALTY_LOGSUM = 1, DG_PENALTY_SCAD = 2 } dg_penalty_kind;

typedef enum dg_algorithm { DG_ALGORITHM_AUTO = 0, DG_ALGORITHM_LLA = 1, DG_ALGORITHM_REDISTRIBUTION = 2 } dg_algorithm;

typedef enum dg_warm_start {
  DG_WARM_DEFAULT = 0,
  DG_WARM_ZEROS = 1,
  DG_WARM_LASSO = 2,
  DG_WARM_SUPPLIED = 3
} dg_warm_start;

typedef enum dg_graph_kind { DG_GRAPH_ER = 0, DG_GRAPH_BA = 1 } dg_graph_kind;

typedef enum dg_grid_mode { DG_GRID_SYNTHETIC = 0, DG_GRID_REAL = 1 } dg_grid_mode;

typedef enum dg_selection { DG_SELECT_MAXF1 = 0, DG_SELECT_BIC = 1 } dg_selection;

typedef struct dg_matrix dg_matrix;
typedef struct dg_covariance dg_covariance;
typedef struct dg_result dg_result;
typedef struct dg_model dg_model;
typedef struct dg_benchmark dg_benchmark;
typedef struct dg_ingest_options dg_ingest_options;

DG_API const char* dg_version(void);
DG_API const char* dg_last_error_message(void);
DG_API const char* dg_status_name(dg_status status);
/* Releases strings returned through char** out-parameters. */
DG_API void dg_string_free(char* s);

/* ---- block matrices ---------------------------------------------------------------------- */

/* data: (m*p)^2 row-major values, or NULL for zeros. */
DG_API dg_status dg_matrix_create(size_t block_size, size_t nodes, const double* data, dg_matrix** out);
DG_API void dg_matrix_free(dg_matrix* a);
DG_API size_t dg_matrix_block_size(const dg_matrix* a);
DG_API size_t dg_matrix_nodes(const dg_matrix* a);
DG_API size_t dg_matrix_side(const dg_matrix* a);
DG_API dg_status dg_matrix_get(const dg_matrix* a, size_t row, size_t col, double* out);
/* out must hold side*side doubles, written row-major. */
DG_API dg_status dg_matrix_copy_data(const dg_matrix* a, double* out, size_t capacity);
/* out must hold nodes*nodes doubles: Frobenius norm of every block, row-major. */
DG_API dg_status dg_matrix_block_norms(const dg_matrix* a, double* out, size_t capacity);
DG_API dg_status dg_matrix_symmetrize(const dg_matrix* a, dg_matrix** out);
DG_API dg_status dg_matrix_load_csv(const char* path, size_t block_size, dg_matrix** out);
DG_API dg_status dg_matrix_save_csv(const dg_matrix* a, const char* path);
DG_API dg_status dg_matrix_load_json(const char* path, dg_matrix** out);
DG_API dg_status dg_matrix_save_json(const dg_matrix* a, const char* path);

/* Dense numeric CSV (a first row with a non-numeric field is skipped as a header). Free data with
 * dg_data_free. */
DG_API dg_status dg_csv_read(const char* path, double** data, size_t* rows, size_t* cols);
/* header: NULL or cols column names. */
DG_API dg_status dg_csv_write(const char* path, const double* data, size_t rows, size_t cols,
                              const char* const* header);

/* ---- penalties and solver configuration -------------------------------------------------- */

typedef struct dg_penalty {
  dg_penalty_kind kind;
  double lambda;
  double epsilon; /* log-sum */
  double a;       /* SCAD */
} dg_penalty;

typedef struct dg_solver_config {
  dg_algorithm algorithm;
  int i_max;
  double delta_tol;
  dg_warm_start warm_start;
  int lla_rounds;
  double edge_threshold;
} dg_solver_config;

DG_API dg_penalty dg_penalty_default(dg_penalty_kind kind, double lambda);
DG_API dg_solver_config dg_solver_config_default(void);
DG_API dg_status dg_penalty_rho(const dg_penalty* spec, double u, double* out);
DG_API dg_status dg_penalty_rho_prime(const dg_penalty* spec, double u, double* out);

/* ---- covariances and loss ---------------------------------------------------------------- */

/* x, y: row-major sample matrices with (block_size*nodes) columns. */
DG_API dg_status dg_covariance_from_samples(const double* x, size_t n_x, const double* y, size_t n_y,
                                            size_t block_size, size_t nodes, int center, dg_covariance** out);
DG_API dg_status dg_covariance_from_matrices(const dg_matrix* sigma_x, const dg_matrix* sigma_y, size_t n_x,
                                             size_t n_y, dg_covariance** out);
DG_API void dg_covariance_free(dg_covariance* cov);
DG_API dg_status dg_covariance_sigma_x(const dg_covariance* cov, dg_matrix** out);
DG_API dg_status dg_covariance_sigma_y(const dg_covariance* cov, dg_matrix** out);

DG_API dg_status dg_dtrace_loss(const dg_matrix* delta, const dg_covariance* cov, double* out);
DG_API dg_status dg_dtrace_gradient(const dg_matrix* delta, const dg_covariance* cov, dg_matrix** out);
DG_API dg_status dg_penalized_objective(const dg_matrix* delta, const dg_covariance* cov, const dg_penalty* spec,
                                        double* out);
DG_API dg_status dg_lipschitz(const dg_covariance* cov, const dg_penalty* spec, dg_algorithm algorithm, double* out);
/* weights: nodes*nodes row-major, nonnegative. */
DG_API dg_status dg_prox_block_l2(const dg_matrix* a, const double* weights, double eta, dg_matrix** out);

/* ---- estimation -------------------------------------------------------------------------- */

/* warm_start may be NULL unless config->warm_start is DG_WARM_SUPPLIED. */
DG_API dg_status dg_estimate(const dg_covariance* cov, const dg_penalty* spec, const dg_solver_config* config,
                             const dg_matrix* warm_start, dg_result** out);
DG_API void dg_result_free(dg_result* r);
/* Symmetrized estimate. */
DG_API dg_status dg_result_delta(const dg_result* r, dg_matrix** out);
DG_API dg_status dg_result_delta_raw(const dg_result* r, dg_matrix** out);
DG_API size_t dg_result_edge_count(const dg_result* r);
/* Edge i as (k, l), 0-based, k < l, in ascending order. */
DG_API dg_status dg_result_edge(const dg_result* r, size_t i, size_t* k, size_t* l);
DG_API int dg_result_iterations(const dg_result* r);
DG_API int dg_result_total_iterations(const dg_result* r);
DG_API int dg_result_converged(const dg_result* r);
DG_API double dg_result_wall_time(const dg_result* r);
DG_API dg_algorithm dg_result_algorithm(const dg_result* r);
/* Objective trace of the final inner run. */
DG_API size_t dg_result_trace_length(const dg_result* r);
DG_API double dg_result_trace_value(const dg_result* r, size_t i);
DG_API dg_status dg_result_save_trace_csv(const dg_result* r, const char* path);
/* JSON summary (iterations, convergence, timing, penalty, warnings). Free with dg_string_free. */
DG_API dg_status dg_result_summary_json(const dg_result* r, char** out);

/* ---- model selection --------------------------------------------------------------------- */

typedef struct dg_grid_options {
  dg_grid_mode mode;
  int grid_size;
  double seed_lambda;
  double lambda_floor;
  double rel_precision;
  int max_bisection_steps;
  int max_solver_calls;
} dg_grid_options;

DG_API dg_grid_options dg_grid_options_default(void);
DG_API dg_status dg_bic(const dg_matrix* delta, const dg_covariance* cov, double* out);
/* lambda_sm plus grid_size points written to points (capacity >= grid_size). */
DG_API dg_status dg_build_grid(const dg_covariance* cov, const dg_penalty* spec, const dg_solver_config* config,
                               const dg_grid_options* options, double* lambda_sm, double* points, size_t capacity,
                               size_t* count);
/* Standardized BIC selection; the curve is written as CSV (lambda,bic,edges,objective) when curve_csv is
 * non-NULL (free with dg_string_free). */
DG_API dg_status dg_select_bic(const dg_covariance* cov, const dg_penalty* spec, const dg_solver_config* config,
                               const dg_grid_options* options, double* lambda_star, dg_result** out,
                               char** curve_csv);

/* ---- synthetic models -------------------------------------------------------------------- */

typedef struct dg_model_params {
  dg_graph_kind kind;
  size_t nodes;
  size_t block_size;
  double p_er;
  double p_er_delta;
  int conjunction_support;
  double pd_margin;
  uint64_t seed;
} dg_model_params;

DG_API dg_model_params dg_model_params_default(void);
DG_API dg_status dg_model_generate(const dg_model_params* params, dg_model** out);
DG_API void dg_model_free(dg_model* model);
DG_API dg_status dg_model_omega_x(const dg_model* model, dg_matrix** out);
DG_API dg_status dg_model_omega_y(const dg_model* model, dg_matrix** out);
DG_API dg_status dg_model_delta_star(const dg_model* model, dg_matrix** out);
DG_API dg_status dg_model_sigma_x(const dg_model* model, dg_matrix** out);
DG_API dg_status dg_model_sigma_y(const dg_model* model, dg_matrix** out);
DG_API double dg_model_gamma(const dg_model* model);
DG_API size_t dg_model_support_size(const dg_model* model);
DG_API dg_status dg_model_support_edge(const dg_model* model, size_t i, size_t* k, size_t* l);
/* n draws of x and y as row-major n x (m*p) arrays, each of capacity n*m*p. */
DG_API dg_status dg_model_sample(const dg_model* model, size_t n, uint64_t seed, double* x, double* y,
                                 size_t capacity);
DG_API dg_status dg_model_save_json(const dg_model* model, const char* path);
DG_API dg_status dg_model_load_json(const char* path, dg_model** out);

/* ---- metrics ----------------------------------------------------------------------------- */

typedef struct dg_eval_report {
  double f1;
  size_t hamming;
  double frob_error;
  int support_recovered;
  size_t tp;
  size_t fp;
  size_t fn;
} dg_eval_report;

typedef struct dg_mean_sd {
  double mean;
  double sd;
} dg_mean_sd;

typedef struct dg_summary {
  size_t runs;
  dg_mean_sd f1;
  dg_mean_sd hamming;
  dg_mean_sd frob_error;
  dg_mean_sd support_recovered;
} dg_summary;

DG_API dg_status dg_evaluate(const dg_result* estimate, const dg_model* truth, dg_eval_report* out);
DG_API dg_status dg_aggregate(const dg_eval_report* reports, size_t count, dg_summary* out);

/* ---- benchmark --------------------------------------------------------------------------- */

typedef struct dg_benchmark_config {
  dg_model_params model;
  const size_t* sample_sizes;
  size_t sample_size_count;
  const dg_penalty_kind* penalties;
  size_t penalty_count;
  double epsilon;
  double a;
  int runs;
  uint64_t base_seed;
  dg_selection selection;
  dg_solver_config solver;
  dg_grid_options grid;
  int threads;
} dg_benchmark_config;

/* Called after each (n, run, penalty) outcome; index is the outcome's position. */
typedef void (*dg_progress_fn)(size_t index, void* user);

DG_API dg_benchmark_config dg_benchmark_config_default(void);
DG_API dg_status dg_benchmark_run(const dg_benchmark_config* config, dg_progress_fn progress, void* user,
                                  dg_benchmark** out);
DG_API void dg_benchmark_free(dg_benchmark* b);

typedef struct dg_run_outcome {
  int run;
  uint64_t seed;
  size_t n;
  dg_penalty_kind penalty;
  dg_algorithm algorithm;
  int ok;
  double lambda;
  double lambda_sm;
  dg_eval_report report;
  double time;
  int iterations;
  int converged;
  double best_grid_f1;
  double max_lla_ascent;
  size_t true_edges;
} dg_run_outcome;

typedef struct dg_cell_summary {
  size_t n;
  dg_penalty_kind penalty;
  int runs;
  int failed;
  dg_summary metrics;
  dg_mean_sd time;
  dg_mean_sd best_grid_f1;
  double max_lla_ascent;
} dg_cell_summary;

DG_API size_t dg_benchmark_outcome_count(const dg_benchmark* b);
DG_API dg_status dg_benchmark_outcome(const dg_benchmark* b, size_t i, dg_run_outcome* out);
DG_API size_t dg_benchmark_cell_count(const dg_benchmark* b);
DG_API dg_status dg_benchmark_cell(const dg_benchmark* b, size_t i, dg_cell_summary* out);
/* which: 0 per-run CSV, 1 summary CSV, 2 text table. Free with dg_string_free. */
DG_API dg_status dg_benchmark_export(const dg_benchmark* b, int which, char** out);

/* ---- theory checks (small models only) ---------------------------------------------------- */

typedef struct dg_theory_constants {
  double M;
  double M_sigma;
  double kappa_gamma;
  double alpha;
  double sigma_bar_xy;
  double C0;
  double tau;
  double phi_min_star;
  int irrepresentable;
  size_t s;
} dg_theory_constants;

typedef struct dg_theorem1_report {
  double lambda_n;
  double n_min;
  double C_bar_alpha;
  double C_M_kappa;
  double C_b1;
  double C_b2;
  double error_bound;
  int satisfied;
} dg_theorem1_report;

typedef struct dg_convexity_report {
  double phi_product;
  double threshold;
  int convex;
} dg_convexity_report;

typedef struct dg_rsc_report {
  int trials;
  int violations_full;
  int violations_support;
  double min_ratio_full;
  double min_ratio_support;
  double phi_min_star;
  double n;
  double N2;
  int n_exceeds_N2;
} dg_rsc_report;

/* support: edge_count pairs (k, l), 0-based, as a flat array of 2*edge_count entries. */
DG_API dg_status dg_theory_constants_compute(const dg_matrix* sigma_x_star, const dg_matrix* sigma_y_star,
                                             const size_t* support, size_t edge_count, double tau,
                                             dg_theory_constants* out);
DG_API dg_status dg_theory_theorem1(const dg_theory_constants* c, double s, size_t p, double n,
                                    dg_theorem1_report* out);
DG_API dg_status dg_theory_theorem2(const dg_matrix* sigma_x_star, const dg_matrix* sigma_y_star,
                                    const dg_penalty* spec, double lambda_n, dg_convexity_report* out);
DG_API dg_status dg_theory_rsc_check(const dg_covariance* cov_hat, const dg_matrix* sigma_x_star,
                                     const dg_matrix* sigma_y_star, const size_t* support, size_t edge_count,
                                     int trials, uint64_t seed, dg_rsc_report* out);
DG_API dg_status dg_theory_stationarity_gap(const dg_matrix* delta, const dg_covariance* cov, const dg_penalty* spec,
                                            double* out);

/* ---- ingest ------------------------------------------------------------------------------ */

DG_API dg_status dg_ingest_options_create(dg_ingest_options** out);
DG_API void dg_ingest_options_free(dg_ingest_options* opt);
/*
 * Keys: features, sites, columns, kelvin_columns (comma-separated lists); site_column, time_column;
 * block_size (integer); hourly (0/1 or true/false); zero_offset (number).
 */
DG_API dg_status dg_ingest_options_set(dg_ingest_options* opt, const char* key, const char* value);
/* Loads and preprocesses; report_json (free with dg_string_free) may be NULL. */
DG_API dg_status dg_preprocess_file(const char* path, const dg_ingest_options* opt, double** data, size_t* rows,
                                    size_t* cols, char** report_json);
DG_API void dg_data_free(double* data);

#ifdef __cplusplus
}
#endif

#endif /* DIFFGRAPH_DIFFGRAPH_H */
