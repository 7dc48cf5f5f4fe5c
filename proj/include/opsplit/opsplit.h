/* C interface of the opsplit solver library.
 *
 * All objects are opaque handles created by the library and released with
 * the matching *_free function. Every fallible call returns an opsplit_status;
 * on failure opsplit_last_error() describes the problem (thread-local, valid
 * until the next failing call on the same thread). */
#ifndef OPSPLIT_OPSPLIT_H
#define OPSPLIT_OPSPLIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define OPSPLIT_API __declspec(dllexport)
#else
#define OPSPLIT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  OPSPLIT_OK = 0,
  OPSPLIT_INVALID_ARGUMENT = 1,
  OPSPLIT_INVALID_PARAMETER = 2,
  OPSPLIT_SOLVER_ERROR = 3,
  OPSPLIT_CONFIG_ERROR = 4,
  OPSPLIT_IO_ERROR = 5,
  OPSPLIT_INTERNAL_ERROR = 6
} opsplit_status;

typedef enum {
  OPSPLIT_BSFRB = 0,
  OPSPLIT_BSRFB = 1,
  OPSPLIT_SFRDR = 2,
  OPSPLIT_M_BSFRB = 3,
  OPSPLIT_M_BSRFB = 4,
  OPSPLIT_M_SFRDR = 5
} opsplit_algorithm;

typedef enum {
  OPSPLIT_MODE_STRICT = 0,
  OPSPLIT_MODE_PERMISSIVE = 1,
  OPSPLIT_MODE_FROM_CONFIG = 2 /* only meaningful for opsplit_config_load */
} opsplit_mode;

typedef enum {
  OPSPLIT_CONVERGED = 0,
  OPSPLIT_MAX_ITER = 1,
  OPSPLIT_DIVERGED = 2
} opsplit_termination;

typedef enum {
  OPSPLIT_SET_SEGMENT = 0, /* {t e_axis : lo <= t <= hi} in R^dim */
  OPSPLIT_SET_BOX = 1,     /* [lower, upper] */
  OPSPLIT_SET_BALL = 2,    /* center, radius */
  OPSPLIT_SET_SINGLETON = 3, /* {center} */
  OPSPLIT_SET_WHOLE_SPACE = 4
} opsplit_set_kind;

/* Descriptor of a closed convex set. Array fields have `dim` entries and are
 * copied by the constructors. */
typedef struct {
  opsplit_set_kind kind;
  size_t dim;
  size_t axis;
  double lo, hi;
  const double* lower;
  const double* upper;
  const double* center;
  double radius;
} opsplit_set;

typedef struct opsplit_problem opsplit_problem;
typedef struct opsplit_trace opsplit_trace;
typedef struct opsplit_config opsplit_config;
typedef struct opsplit_table opsplit_table;

OPSPLIT_API const char* opsplit_version(void);
OPSPLIT_API const char* opsplit_last_error(void);
OPSPLIT_API const char* opsplit_status_string(opsplit_status status);
OPSPLIT_API const char* opsplit_algorithm_name(opsplit_algorithm alg);
OPSPLIT_API opsplit_status opsplit_algorithm_from_name(const char* name, opsplit_algorithm* out);
OPSPLIT_API const char* opsplit_termination_name(opsplit_termination t);

/* Supremum of admissible stepsizes. beta = INFINITY encodes C = 0, L = 0
 * encodes B = 0; lambda is ignored except for the sfrdr family. */
OPSPLIT_API opsplit_status opsplit_max_gamma(opsplit_algorithm alg, double beta, double lipschitz,
                                             double lambda, double* out);

/* ---- Problems ---------------------------------------------------------- */

/* Projection of f onto the Minkowski sum of planar sets. Iterates live in
 * R^(2*fdim); the first fdim coordinates are the projection estimate.
 * weights may be NULL (uniform). Only m-operator algorithms apply. */
OPSPLIT_API opsplit_status opsplit_problem_minkowski(const opsplit_set* sets, size_t nsets,
                                                     const double* f, size_t fdim,
                                                     const double* weights,
                                                     opsplit_problem** out);

/* 0 in N_{S_1}x + ... + N_{S_n}x + Sx + (x - f). skew is a row-major
 * dim x dim skew-symmetric matrix or NULL. Four-operator algorithms need
 * nsets == 2. weights may be NULL (uniform). */
OPSPLIT_API opsplit_status opsplit_problem_synthetic(size_t dim, const opsplit_set* sets,
                                                     size_t nsets, const double* skew,
                                                     const double* f, const double* weights,
                                                     opsplit_problem** out);

/* Random synthetic instance (boxes and balls with a common interior point). */
OPSPLIT_API opsplit_status opsplit_problem_random_synthetic(size_t dim, size_t nsets,
                                                            uint64_t seed,
                                                            opsplit_problem** out);

OPSPLIT_API size_t opsplit_problem_dimension(const opsplit_problem* problem);
OPSPLIT_API void opsplit_problem_free(opsplit_problem* problem);

/* Independent reference solution of a synthetic problem (len == dimension). */
OPSPLIT_API opsplit_status opsplit_oracle_solve(const opsplit_problem* problem, double* x,
                                                size_t len);

/* Residual check of a candidate solution (sets *ok to 1 or 0). */
OPSPLIT_API opsplit_status opsplit_verify_solution(const opsplit_problem* problem,
                                                   const double* x, size_t len, double tol,
                                                   int* ok);

/* ---- Solving ----------------------------------------------------------- */

typedef struct {
  opsplit_algorithm algorithm;
  double gamma;
  double lambda; /* sfrdr family only */
  opsplit_mode mode;
  int stop_known_solution; /* nonzero: stop on distance to `target` */
  const double* target;
  size_t target_len;
  size_t target_offset;
  double epsilon;
  size_t max_iter;
  int lyapunov; /* nonzero: pre-solve an anchor and record V_n */
  double anchor_tolerance;
} opsplit_solve_params;

/* Defaults: bsfrb, strict, fixed-point rule with epsilon 1e-6, 1000 iterations. */
OPSPLIT_API void opsplit_solve_params_init(opsplit_solve_params* params);

/* Zero initialization. */
OPSPLIT_API opsplit_status opsplit_solve(const opsplit_problem* problem,
                                         const opsplit_solve_params* params,
                                         opsplit_trace** out);

OPSPLIT_API opsplit_termination opsplit_trace_termination(const opsplit_trace* trace);
OPSPLIT_API size_t opsplit_trace_iterations(const opsplit_trace* trace);
OPSPLIT_API size_t opsplit_trace_record_count(const opsplit_trace* trace);
/* Missing values (distance, lyapunov) are reported as NaN. */
OPSPLIT_API opsplit_status opsplit_trace_record(const opsplit_trace* trace, size_t index,
                                                double* residual, double* distance,
                                                double* lyapunov);
OPSPLIT_API size_t opsplit_trace_solution_length(const opsplit_trace* trace);
OPSPLIT_API opsplit_status opsplit_trace_solution(const opsplit_trace* trace, double* x,
                                                  size_t len);
OPSPLIT_API double opsplit_trace_seconds(const opsplit_trace* trace);
/* CSV text (n,residual,dist_to_solution,lyapunov); owned by the trace. */
OPSPLIT_API const char* opsplit_trace_csv(opsplit_trace* trace);
OPSPLIT_API void opsplit_trace_free(opsplit_trace* trace);

/* ---- Configured runs --------------------------------------------------- */

OPSPLIT_API opsplit_status opsplit_config_load(const char* path, opsplit_mode mode,
                                               opsplit_config** out);
OPSPLIT_API opsplit_status opsplit_config_set_lyapunov(opsplit_config* config, int enabled);
/* NULL or "" clears the output directory. */
OPSPLIT_API opsplit_status opsplit_config_set_output_dir(opsplit_config* config,
                                                         const char* dir);
/* Output directory from the config or the last setter call ("" if none). */
OPSPLIT_API const char* opsplit_config_output_dir(const opsplit_config* config);
OPSPLIT_API void opsplit_config_free(opsplit_config* config);

typedef struct {
  size_t case_index;
  double gamma;
  double lambda; /* NaN when not applicable */
  size_t iterations;
  double seconds;
  double residual;
  double distance; /* NaN when unknown */
  opsplit_termination termination;
} opsplit_row;

OPSPLIT_API opsplit_status opsplit_run_table(const opsplit_config* config, opsplit_table** out);
OPSPLIT_API size_t opsplit_table_row_count(const opsplit_table* table);
OPSPLIT_API opsplit_status opsplit_table_row(const opsplit_table* table, size_t index,
                                             opsplit_row* row);
OPSPLIT_API int opsplit_table_all_converged(const opsplit_table* table);
OPSPLIT_API size_t opsplit_table_warning_count(const opsplit_table* table);
OPSPLIT_API const char* opsplit_table_warning(const opsplit_table* table, size_t index);
/* Aligned text summary; owned by the table. */
OPSPLIT_API const char* opsplit_table_text(opsplit_table* table);
/* Writes summary.csv and per-run trace CSVs into dir. */
OPSPLIT_API opsplit_status opsplit_table_write(const opsplit_table* table, const char* dir);
OPSPLIT_API void opsplit_table_free(opsplit_table* table);

#ifdef __cplusplus
}
#endif

#endif /* OPSPLIT_OPSPLIT_H */
