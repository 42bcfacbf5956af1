/* cavitylb: large-system cavity analysis and finite-N simulation of the push,
 * pull, water-filling and resource-pooling dispatching policies under
 * phase-type job sizes.
 *
 * Every function returns a clb_status. On failure the message for the
 * calling thread is available from clb_last_error() until the next call.
 * Strings returned through char** are owned by the caller and released with
 * clb_string_free. */
#ifndef CAVITYLB_H
#define CAVITYLB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CLB_API __declspec(dllexport)
#else
#define CLB_API __attribute__((visibility("default")))
#endif

typedef enum clb_status {
  CLB_OK = 0,
  CLB_INVALID_ARGUMENT = 1, /* parameter outside its domain */
  CLB_SOLVER_ERROR = 2,     /* numerical procedure failed */
  CLB_PARSE_ERROR = 3,      /* malformed spec string or JSON */
  CLB_IO_ERROR = 4,         /* file could not be read or written */
  CLB_INTERNAL_ERROR = 5
} clb_status;

typedef enum clb_policy {
  CLB_PUSH = 0,
  CLB_PULL = 1,
  CLB_WATERFILL = 2,
  CLB_POOLING = 3
} clb_policy;

typedef struct clb_ph clb_ph;
typedef struct clb_solution clb_solution;

CLB_API const char* clb_last_error(void);
CLB_API const char* clb_version(void);
CLB_API const char* clb_status_name(clb_status status);
CLB_API void clb_string_free(char* s);

/* Phase-type job sizes. spec: exponential | erlang:k | hyperexp:scv,f |
 * hypererlang:k,l,p | zeps:eps | file:<path to {"alpha","S"} JSON>. */
CLB_API clb_status clb_ph_parse(const char* spec, clb_ph** out);
/* alpha has n entries, S is n×n row-major. label may be NULL. */
CLB_API clb_status clb_ph_create(const double* alpha, const double* S, int n, const char* label,
                                 clb_ph** out);
CLB_API void clb_ph_free(clb_ph* ph);
CLB_API clb_status clb_ph_phases(const clb_ph* ph, int* out);
CLB_API clb_status clb_ph_mean(const clb_ph* ph, double* out);
CLB_API clb_status clb_ph_scv(const clb_ph* ph, double* out);
/* Probability that a job finishes before an exponential timer of rate delta. */
CLB_API clb_status clb_ph_timer_y(const clb_ph* ph, double delta, double* out);
CLB_API clb_status clb_ph_to_json(const clb_ph* ph, char** out);

/* Cavity solutions. For pull, delta0 is the idle-server update rate and
 * delta1 the update probability at a completion. */
CLB_API clb_status clb_solve_push(const clb_ph* ph, double lambda, double delta, clb_solution** out);
CLB_API clb_status clb_solve_pull(const clb_ph* ph, double lambda, double delta0, double delta1,
                                  clb_solution** out);
CLB_API clb_status clb_solve_waterfill(const clb_ph* ph, double lambda, double delta,
                                       clb_solution** out);
CLB_API clb_status clb_solve_pooling(const clb_ph* ph, double lambda, double p, clb_solution** out);
/* Idle-server update rate δ₀ giving overall rate δ = λδ₁ + (1−λ)δ₀. */
CLB_API clb_status clb_pull_delta0(double lambda, double delta, double delta1, double* out);
CLB_API void clb_solution_free(clb_solution* sol);

CLB_API clb_status clb_solution_policy(const clb_solution* sol, clb_policy* out);
CLB_API clb_status clb_solution_mean_response(const clb_solution* sol, double* out);
CLB_API clb_status clb_solution_mean_queue(const clb_solution* sol, double* out);
/* Real-valued maximum-queue level; for pooling the integer m. */
CLB_API clb_status clb_solution_m_tilde(const clb_solution* sol, double* out);
CLB_API clb_status clb_solution_max_queue(const clb_solution* sol, int* out);
/* ν (push, pull), c (waterfill) or ω (pooling). */
CLB_API clb_status clb_solution_rate(const clb_solution* sol, double* out);
/* Bounds on the mean queue length; pooling has none (CLB_INVALID_ARGUMENT). */
CLB_API clb_status clb_solution_bounds(const clb_solution* sol, double* lower, double* upper);
/* Copies min(cap, size) entries of π_0, π_1, ... into buf; *size receives
 * the full length. buf may be NULL when cap is 0. */
CLB_API clb_status clb_solution_q_marginal(const clb_solution* sol, double* buf, size_t cap,
                                           size_t* size);
/* Fixed-point residual: rate balance (push, pull), token balance (pooling),
 * |π₀ − (1−λ)| (waterfill). */
CLB_API clb_status clb_solution_residual(const clb_solution* sol, double* out);
/* with_states nonzero adds the labelled stationary vector. */
CLB_API clb_status clb_solution_to_json(const clb_solution* sol, int with_states, char** out);

/* Simulation driven by a JSON config; see the README for the keys. */
CLB_API clb_status clb_simulate_json(const char* config_json, char** report_json);
/* Student-t 95% half-width of a run sample (n ≥ 2). */
CLB_API clb_status clb_aggregate(const double* values, size_t n, double* mean, double* halfwidth);

/* Published table rows, n ∈ {1,2,3,4}, as a JSON array. Each row carries the
 * cavity limit computed here ("cavity") next to the published columns. */
CLB_API clb_status clb_table_rows_json(int n, char** out);

#ifdef __cplusplus
}
#endif

#endif /* CAVITYLB_H */
