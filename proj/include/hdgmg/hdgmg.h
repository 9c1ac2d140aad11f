#ifndef HDGMG_H
#define HDGMG_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(HDGMG_BUILDING_LIBRARY)
#    define HDGMG_API __declspec(dllexport)
#  else
#    define HDGMG_API __declspec(dllimport)
#  endif
#else
#  define HDGMG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hdgmg_status {
  HDGMG_OK = 0,
  HDGMG_ERR_INVALID_ARGUMENT = 1,
  HDGMG_ERR_CANNOT_COARSEN = 2,
  HDGMG_ERR_NUMERICAL_BREAKDOWN = 3,
  HDGMG_ERR_UNSUPPORTED_ORDER = 4,
  HDGMG_ERR_DIMENSION_MISMATCH = 5,
  HDGMG_ERR_CONFIGURATION = 6,
  HDGMG_ERR_INTERNAL = 99
} hdgmg_status;

/* Message of the last failing call on this thread ("" if none). */
HDGMG_API const char* hdgmg_last_error(void);
HDGMG_API const char* hdgmg_status_string(hdgmg_status status);
HDGMG_API const char* hdgmg_version(void);
/* Caps the worker count of parallel regions; n <= 0 restores the default. */
HDGMG_API void hdgmg_set_threads(int n);

/* ------------------------------------------------------------------ */
/* Problems: -div(K grad u) = f on the unit square, u = g on the boundary. */

typedef struct hdgmg_problem hdgmg_problem;

typedef double (*hdgmg_scalar_fn)(double x, double y, void* user);
typedef void (*hdgmg_vector_fn)(double x, double y, double out[2], void* user);

typedef struct hdgmg_problem_callbacks {
  hdgmg_scalar_fn coefficient; /* K > 0; NULL means K = 1 */
  hdgmg_scalar_fn source;      /* f; NULL means 0 */
  hdgmg_scalar_fn dirichlet;   /* g; NULL means 0 */
  hdgmg_scalar_fn exact_u;     /* optional */
  hdgmg_vector_fn exact_q;     /* optional, q = -K grad u */
  void* user;
} hdgmg_problem_callbacks;

/* u = x(x-1)y(y-1)exp(-x^2-y^2), K = tanh(x+y)+1. */
HDGMG_API hdgmg_status hdgmg_problem_manufactured(double tau, hdgmg_problem** out);
/* The callbacks must stay valid for the lifetime of every object built from the problem. */
HDGMG_API hdgmg_status hdgmg_problem_create(const hdgmg_problem_callbacks* callbacks, double tau,
                                            hdgmg_problem** out);
HDGMG_API void hdgmg_problem_destroy(hdgmg_problem* problem);

/* ------------------------------------------------------------------ */
/* Discretisation on an nx x ny Cartesian mesh. */

typedef struct hdgmg_discretization hdgmg_discretization;

typedef enum hdgmg_matvec_mode { HDGMG_MATVEC_FREE = 0, HDGMG_MATVEC_CSR = 1 } hdgmg_matvec_mode;

typedef struct hdgmg_counters {
  double flops;
  double bytes;
  double arithmetic_intensity;
} hdgmg_counters;

typedef struct hdgmg_error_norms {
  double u;
  double q;
  double u_star; /* NaN when not computed */
} hdgmg_error_norms;

typedef struct hdgmg_krylov_report {
  int iterations;
  int converged;
  double relative_residual;
} hdgmg_krylov_report;

HDGMG_API hdgmg_status hdgmg_discretization_create(const hdgmg_problem* problem, int nx, int ny, int order,
                                                   hdgmg_discretization** out);
HDGMG_API void hdgmg_discretization_destroy(hdgmg_discretization* d);
HDGMG_API hdgmg_status hdgmg_discretization_size(const hdgmg_discretization* d, size_t* n);
HDGMG_API hdgmg_status hdgmg_discretization_rhs(const hdgmg_discretization* d, double* b, size_t n);
HDGMG_API hdgmg_status hdgmg_discretization_matvec(const hdgmg_discretization* d, hdgmg_matvec_mode mode,
                                                   const double* x, double* y, size_t n);
HDGMG_API hdgmg_status hdgmg_discretization_counters(const hdgmg_discretization* d, hdgmg_matvec_mode mode,
                                                     hdgmg_counters* out);
/* Number of stored entries of the assembled trace matrix. */
HDGMG_API hdgmg_status hdgmg_discretization_nnz(const hdgmg_discretization* d, size_t* nnz);
HDGMG_API hdgmg_status hdgmg_discretization_solve_direct(const hdgmg_discretization* d, double* x, size_t n);
/* Unpreconditioned CG from the contents of x. */
HDGMG_API hdgmg_status hdgmg_discretization_solve_cg(const hdgmg_discretization* d, double rel_tol, int max_iter,
                                                     double* x, size_t n, hdgmg_krylov_report* report);
/* L2 errors of the reconstruction from trace x; needs an exact solution. */
HDGMG_API hdgmg_status hdgmg_discretization_errors(const hdgmg_discretization* d, const double* x, size_t n,
                                                   int with_postprocess, hdgmg_error_norms* out);

/* ------------------------------------------------------------------ */
/* h/p multigrid. */

typedef struct hdgmg_multigrid hdgmg_multigrid;

typedef enum hdgmg_cycle { HDGMG_CYCLE_V = 0, HDGMG_CYCLE_W = 1, HDGMG_CYCLE_FMG = 2 } hdgmg_cycle;
typedef enum hdgmg_coarse_operator { HDGMG_COARSE_GALERKIN = 0, HDGMG_COARSE_REDISCRETIZED = 1 } hdgmg_coarse_operator;
typedef enum hdgmg_interior_extension {
  HDGMG_EXTENSION_HARMONIC = 0,
  HDGMG_EXTENSION_LOCAL_SOLVER = 1
} hdgmg_interior_extension;
typedef enum hdgmg_h_space { HDGMG_H_SPACE_CONTINUOUS = 0, HDGMG_H_SPACE_TRACE = 1 } hdgmg_h_space;
typedef enum hdgmg_level_kind { HDGMG_LEVEL_P = 0, HDGMG_LEVEL_H = 1, HDGMG_LEVEL_COARSEST = 2 } hdgmg_level_kind;

typedef struct hdgmg_mg_options {
  int nu1;
  int nu2;
  int fsai_power;      /* 1: lower(A), 2: lower(A^2) */
  double omega;
  double fsai_drop_tol;
  int coarse_cap;
  hdgmg_coarse_operator coarse_operator;
  hdgmg_interior_extension interior_extension;
  hdgmg_h_space h_space;
  double omega_bound;  /* <= 0 disables the per-level cap on omega * lambda_max */
} hdgmg_mg_options;

typedef struct hdgmg_level_info {
  int order;
  int nx;
  int ny;
  size_t size;
  hdgmg_level_kind kind;
  double operator_complexity; /* 0 on the coarsest level */
} hdgmg_level_info;

typedef struct hdgmg_mg_report {
  int iterations;
  int converged;
  int diverged;
  double relative_residual;
  double asymptotic_rate;
} hdgmg_mg_report;

typedef struct hdgmg_fmg_report {
  hdgmg_error_norms fmg_error;
  hdgmg_error_norms direct_error;
  double relative_residual;
} hdgmg_fmg_report;

HDGMG_API void hdgmg_mg_options_default(hdgmg_mg_options* opts);
/* opts may be NULL for the defaults. */
HDGMG_API hdgmg_status hdgmg_multigrid_create(const hdgmg_problem* problem, int nx, int ny, int order,
                                              const hdgmg_mg_options* opts, hdgmg_multigrid** out);
HDGMG_API void hdgmg_multigrid_destroy(hdgmg_multigrid* mg);
HDGMG_API hdgmg_status hdgmg_multigrid_num_levels(const hdgmg_multigrid* mg, int* levels);
HDGMG_API hdgmg_status hdgmg_multigrid_level_info(const hdgmg_multigrid* mg, int level, hdgmg_level_info* out);
/* The fine-level discretisation, owned by mg. */
HDGMG_API hdgmg_status hdgmg_multigrid_fine(const hdgmg_multigrid* mg, const hdgmg_discretization** out);
/* V or W cycles on the fine system from the contents of x until ||r|| <= rel_tol ||b||.
   history (may be NULL) receives ||r_k||, k = 0..iterations, up to capacity entries. */
HDGMG_API hdgmg_status hdgmg_multigrid_solve(const hdgmg_multigrid* mg, hdgmg_cycle cycle, double rel_tol,
                                             int max_cycles, double* x, size_t n, double* history,
                                             size_t capacity, hdgmg_mg_report* report);
/* CG preconditioned by one V-cycle. */
HDGMG_API hdgmg_status hdgmg_multigrid_pcg(const hdgmg_multigrid* mg, double rel_tol, int max_iter, double* x,
                                           size_t n, hdgmg_krylov_report* report);
/* One full multigrid sweep; x receives the fine trace. */
HDGMG_API hdgmg_status hdgmg_multigrid_fmg(const hdgmg_multigrid* mg, double* x, size_t n, hdgmg_fmg_report* report);

/* ------------------------------------------------------------------ */
/* Performance model. */

typedef struct hdgmg_machine {
  double peak_flops;     /* FLOP/s */
  double peak_bandwidth; /* bytes/s */
  char label[64];
} hdgmg_machine;

typedef struct hdgmg_cost {
  double flops;
  double memops;
  double arithmetic_intensity;
} hdgmg_cost;

typedef struct hdgmg_roofline {
  double arithmetic_intensity;
  double attainable;     /* FLOP/s */
  double achieved;       /* FLOP/s, NaN without a timing */
} hdgmg_roofline;

typedef struct hdgmg_work_point {
  int p;
  double flops;
  double l2_error;
} hdgmg_work_point;

HDGMG_API void hdgmg_machine_default(hdgmg_machine* out);
/* Text with peak_gflops= and peak_gbs= lines (label= optional). */
HDGMG_API hdgmg_status hdgmg_machine_read(const char* path, hdgmg_machine* out);
HDGMG_API hdgmg_status hdgmg_projection_cost(int p, int k, hdgmg_cost* out);
/* measured_seconds <= 0 means no timing. */
HDGMG_API hdgmg_status hdgmg_roofline_point(const hdgmg_machine* machine, double flops, double memops,
                                            double measured_seconds, hdgmg_roofline* out);
/* orders strictly increasing in 1..8; solve_only and postprocessed each receive
   count points; crossover is -1 when absent. */
HDGMG_API hdgmg_status hdgmg_work_precision(const hdgmg_problem* problem, int n, const int* orders, size_t count,
                                            hdgmg_work_point* solve_only, hdgmg_work_point* postprocessed,
                                            int* crossover);

#ifdef __cplusplus
}
#endif

#endif
