/* Generated by cbindgen from crates/ffi. Do not edit. */

#ifndef GRAPHQUBO_H
#define GRAPHQUBO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum GqStatus {
  GQ_STATUS_OK = 0,
  // Null pointer or otherwise unusable argument.
  GQ_STATUS_INVALID_ARGUMENT = 1,
  GQ_STATUS_INVALID_EDGE = 2,
  GQ_STATUS_DUPLICATE_EDGE = 3,
  GQ_STATUS_INDEX_OUT_OF_RANGE = 4,
  GQ_STATUS_PARSE = 5,
  GQ_STATUS_FORMAT = 6,
  GQ_STATUS_INVALID_PARAMETER = 7,
  GQ_STATUS_INVALID_PAIR = 8,
  GQ_STATUS_DIMENSION = 9,
  GQ_STATUS_PROBLEM_TOO_LARGE = 10,
  GQ_STATUS_CONSTRAINT_VIOLATION = 11,
  GQ_STATUS_TIMEOUT = 12,
  GQ_STATUS_IO = 13,
  GQ_STATUS_JSON = 14,
  // A Rust panic was caught at the boundary.
  GQ_STATUS_PANIC = 99,
} GqStatus;

typedef enum GqModel {
  GQ_MODEL_MODEL1 = 1,
  GQ_MODEL_MODEL2 = 2,
} GqModel;

typedef enum GqAcceptance {
  GQ_ACCEPTANCE_PARALLEL_TRIAL = 0,
  GQ_ACCEPTANCE_SEQUENTIAL = 1,
} GqAcceptance;

// Opaque annealing result handle.
typedef struct GqAnnealResult GqAnnealResult;

// Opaque distance-matrix handle.
typedef struct GqDistances GqDistances;

// Opaque exact-solver result handle.
typedef struct GqExactResult GqExactResult;

// Opaque graph handle.
typedef struct GqGraph GqGraph;

// Opaque QUBO handle.
typedef struct GqQubo GqQubo;

// Model parameters. `u_bar <= 0` selects the default `N / K`.
typedef struct GqModelParams {
  enum GqModel model;
  size_t k_clusters;
  double penalty_p;
  double lambda_reg;
  double u_bar;
} GqModelParams;

// Annealing schedule. Non-positive `t_initial`, `t_final` and negative
// `offset_escape` select the problem-derived defaults; a negative
// `time_budget` means no budget.
typedef struct GqAnnealSchedule {
  double t_initial;
  double t_final;
  double cooling_ratio;
  size_t sweeps_per_temperature;
  size_t replicas;
  uint64_t seed;
  double offset_escape;
  enum GqAcceptance acceptance;
  // Restart cooling passes until the budget expires.
  bool restart_until_budget;
  double time_budget;
} GqAnnealSchedule;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *gq_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *gq_version(void);

// Builds a graph from parallel edge arrays. `weights` may be NULL for an
// unweighted graph.
enum GqStatus gq_graph_new(size_t n_vertices,
                           const size_t *src,
                           const size_t *dst,
                           const double *weights,
                           size_t n_edges,
                           struct GqGraph **out);

// Samples a stochastic block model graph. When `labels_out` is non-NULL it
// receives the planted block of every vertex (length = sum of block sizes).
enum GqStatus gq_graph_generate_sbm(const size_t *block_sizes,
                                    size_t n_blocks,
                                    double intra_lo,
                                    double intra_hi,
                                    double inter_lo,
                                    double inter_hi,
                                    uint64_t seed,
                                    struct GqGraph **out,
                                    size_t *labels_out);

enum GqStatus gq_graph_load(const char *path, struct GqGraph **out);

enum GqStatus gq_graph_save(const struct GqGraph *graph, const char *path);

// Vertex count, or 0 for a NULL handle.
size_t gq_graph_n_vertices(const struct GqGraph *graph);

size_t gq_graph_n_edges(const struct GqGraph *graph);

void gq_graph_free(struct GqGraph *graph);

enum GqStatus gq_burt_distance(const struct GqGraph *graph, size_t i, size_t j, double *out);

enum GqStatus gq_distances_new(const struct GqGraph *graph, struct GqDistances **out);

enum GqStatus gq_distances_get(const struct GqDistances *d, size_t i, size_t j, double *out);

size_t gq_distances_n(const struct GqDistances *d);

void gq_distances_free(struct GqDistances *d);

// Defaults: P = 16, lambda = 0.75, U = N / K.
struct GqModelParams gq_model_params_default(enum GqModel model, size_t k_clusters);

enum GqStatus gq_qubo_build(const struct GqDistances *d,
                            const struct GqModelParams *params,
                            struct GqQubo **out);

// Wraps a dense symmetric row-major matrix of `n_vars * n_vars` entries.
enum GqStatus gq_qubo_from_dense(size_t n_vars,
                                 const double *coefficients,
                                 double offset,
                                 struct GqQubo **out);

enum GqStatus gq_qubo_load_json(const char *path, struct GqQubo **out);

enum GqStatus gq_qubo_save_json(const struct GqQubo *qubo, const char *path);

size_t gq_qubo_n_vars(const struct GqQubo *qubo);

double gq_qubo_offset(const struct GqQubo *qubo);

enum GqStatus gq_qubo_energy(const struct GqQubo *qubo,
                             const uint8_t *state,
                             size_t len,
                             double *out);

enum GqStatus gq_qubo_delta_energy(const struct GqQubo *qubo,
                                   const uint8_t *state,
                                   size_t len,
                                   size_t var,
                                   double *out);

void gq_qubo_free(struct GqQubo *qubo);

struct GqAnnealSchedule gq_anneal_schedule_default(void);

enum GqStatus gq_anneal(const struct GqQubo *qubo,
                        const struct GqAnnealSchedule *schedule,
                        struct GqAnnealResult **out);

// Seconds until the target energy was first reached; `GQ_STATUS_TIMEOUT`
// when `budget_s` runs out first.
enum GqStatus gq_time_to_target(const struct GqQubo *qubo,
                                const struct GqAnnealSchedule *schedule,
                                double target,
                                double budget_s,
                                double *seconds_out);

double gq_anneal_result_best_energy(const struct GqAnnealResult *r);

double gq_anneal_result_wall_time(const struct GqAnnealResult *r);

uint64_t gq_anneal_result_sweeps(const struct GqAnnealResult *r);

// Copies the best state into `buf`, which must hold exactly the number of
// QUBO variables.
enum GqStatus gq_anneal_result_copy_state(const struct GqAnnealResult *r, uint8_t *buf, size_t len);

void gq_anneal_result_free(struct GqAnnealResult *r);

enum GqStatus gq_exact_solve(const struct GqQubo *qubo, size_t cap, struct GqExactResult **out);

enum GqStatus gq_exact_solve_labels(const struct GqDistances *d,
                                    const struct GqModelParams *params,
                                    size_t cap,
                                    struct GqExactResult **out);

double gq_exact_result_optimal_energy(const struct GqExactResult *r);

size_t gq_exact_result_n_states(const struct GqExactResult *r);

enum GqStatus gq_exact_result_copy_state(const struct GqExactResult *r,
                                         size_t index,
                                         uint8_t *buf,
                                         size_t len);

void gq_exact_result_free(struct GqExactResult *r);

// Decodes a spin state of `n * k` bits into `labels_out` (length `n`).
// With `repair` NULL the decode is strict and fails with
// `GQ_STATUS_CONSTRAINT_VIOLATION` on any non-one-hot vertex.
enum GqStatus gq_decode(const uint8_t *state,
                        size_t len,
                        size_t n,
                        size_t k,
                        const struct GqDistances *repair,
                        size_t *labels_out);

enum GqStatus gq_objective_value(const struct GqDistances *d,
                                 const size_t *labels,
                                 size_t n,
                                 size_t k,
                                 double *out);

enum GqStatus gq_adjusted_rand_index(const size_t *a, const size_t *b, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHQUBO_H */
