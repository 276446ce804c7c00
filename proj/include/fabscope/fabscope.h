/* SPDX-License-Identifier: Apache-2.0 */
/*
 * fabscope C API.
 *
 * Every fallible call returns a fabscope_status; on failure the message, the
 * violated rule name and (for CSV input) the line number are available from
 * the fabscope_last_error* functions of the calling thread.
 *
 * Handles are opaque. Topology, profile, records, matrix, prediction, report
 * and comparison handles are immutable after creation (except
 * fabscope_records_append) and may be read from several threads at once.
 * Strings returned through `char**` are heap-allocated and must be released
 * with fabscope_string_free.
 *
 * Array outputs follow one convention: up to `capacity` items are written and
 * `*count` receives the full number available.
 */
#ifndef FABSCOPE_H
#define FABSCOPE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FABSCOPE_BUILDING_LIBRARY)
#    define FABSCOPE_API __declspec(dllexport)
#  else
#    define FABSCOPE_API __declspec(dllimport)
#  endif
#else
#  define FABSCOPE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fabscope_status {
  FABSCOPE_OK = 0,
  FABSCOPE_ERR_INVALID_ARGUMENT = 1,
  FABSCOPE_ERR_SCHEMA = 2,
  FABSCOPE_ERR_INVARIANT = 3,
  FABSCOPE_ERR_UNKNOWN_DEVICE = 4,
  FABSCOPE_ERR_NO_ROUTE = 5,
  FABSCOPE_ERR_INVALID_SPEC = 6,
  FABSCOPE_ERR_PARSE = 7,
  FABSCOPE_ERR_GRID_MISMATCH = 8,
  FABSCOPE_ERR_IO = 9,
  FABSCOPE_ERR_MISSING_CALIBRATION = 10,
  FABSCOPE_ERR_INTERNAL = 99
} fabscope_status;

typedef enum fabscope_format { FABSCOPE_FORMAT_TABLE = 0, FABSCOPE_FORMAT_CSV = 1 } fabscope_format;

typedef enum fabscope_device_kind {
  FABSCOPE_DEVICE_GCD = 0,
  FABSCOPE_DEVICE_NUMA = 1
} fabscope_device_kind;

typedef struct fabscope_device {
  fabscope_device_kind kind;
  int id;
} fabscope_device;

typedef enum fabscope_tier {
  FABSCOPE_TIER_SINGLE = 0,
  FABSCOPE_TIER_DUAL = 1,
  FABSCOPE_TIER_QUAD = 2,
  FABSCOPE_TIER_CPU = 3
} fabscope_tier;

typedef enum fabscope_direction {
  FABSCOPE_UNIDIR = 0,
  FABSCOPE_BIDIR = 1
} fabscope_direction;

typedef struct fabscope_neighbor {
  fabscope_device device;
  fabscope_tier tier;
} fabscope_neighbor;

typedef enum fabscope_objective {
  FABSCOPE_OBJECTIVE_HOPS = 0,
  FABSCOPE_OBJECTIVE_BANDWIDTH = 1
} fabscope_objective;

typedef enum fabscope_matrix_metric {
  FABSCOPE_MATRIX_HOPS = 0,
  FABSCOPE_MATRIX_WIDEST_BW = 1,
  FABSCOPE_MATRIX_MISMATCH = 2
} fabscope_matrix_metric;

typedef enum fabscope_alloc {
  FABSCOPE_ALLOC_PAGEABLE = 0,
  FABSCOPE_ALLOC_PINNED_NONCOHERENT = 1,
  FABSCOPE_ALLOC_PINNED_COHERENT = 2,
  FABSCOPE_ALLOC_MANAGED = 3,
  FABSCOPE_ALLOC_DEVICE = 4
} fabscope_alloc;

/* FABSCOPE_API_NONE is plain kernel access (no movement call). */
typedef enum fabscope_api {
  FABSCOPE_API_EXPLICIT_COPY = 0,
  FABSCOPE_API_ZERO_COPY_KERNEL = 1,
  FABSCOPE_API_PAGE_MIGRATION = 2,
  FABSCOPE_API_MPI_P2P = 3,
  FABSCOPE_API_NONE = 4
} fabscope_api;

typedef enum fabscope_movement {
  FABSCOPE_MOVEMENT_EXPLICIT = 0,
  FABSCOPE_MOVEMENT_ZERO_COPY = 1,
  FABSCOPE_MOVEMENT_IMPLICIT = 2
} fabscope_movement;

typedef enum fabscope_collective {
  FABSCOPE_COLL_REDUCE = 0,
  FABSCOPE_COLL_BROADCAST = 1,
  FABSCOPE_COLL_ALLREDUCE = 2,
  FABSCOPE_COLL_REDUCE_SCATTER = 3,
  FABSCOPE_COLL_ALLGATHER = 4
} fabscope_collective;

typedef enum fabscope_metric {
  FABSCOPE_METRIC_BANDWIDTH_UNIDIR = 0,
  FABSCOPE_METRIC_BANDWIDTH_BIDIR = 1,
  FABSCOPE_METRIC_LATENCY = 2
} fabscope_metric;

typedef enum fabscope_verdict {
  FABSCOPE_VERDICT_PASS = 0,
  FABSCOPE_VERDICT_FAIL = 1,
  FABSCOPE_VERDICT_UNMODELED = 2
} fabscope_verdict;

typedef enum fabscope_anomaly_status {
  FABSCOPE_ANOMALY_FIRED = 0,
  FABSCOPE_ANOMALY_CLEAR = 1,
  FABSCOPE_ANOMALY_INCONCLUSIVE = 2
} fabscope_anomaly_status;

/* Enumerations that fabscope_parse_enum understands. */
typedef enum fabscope_enum_kind {
  FABSCOPE_ENUM_ALLOC = 0,
  FABSCOPE_ENUM_API = 1,
  FABSCOPE_ENUM_COLLECTIVE = 2,
  FABSCOPE_ENUM_MATRIX_METRIC = 3,
  FABSCOPE_ENUM_FORMAT = 4,
  FABSCOPE_ENUM_TIER = 5,
  FABSCOPE_ENUM_METRIC = 6
} fabscope_enum_kind;

/* A transfer between host memory or a GCD (`*_is_gcd` = 0 means host). */
typedef struct fabscope_transfer {
  int src_is_gcd;
  int src_id;
  int dst_is_gcd;
  int dst_id;
  uint64_t size_bytes;
  fabscope_alloc alloc;
  fabscope_api api;
  int sdma;
  int xnack;
} fabscope_transfer;

typedef struct fabscope_collective_estimate {
  double lower_bound_us;
  int has_ring;
  double ring_estimate_us;
  int participants;
  uint64_t message_bytes;
  int steps;
  double per_step_us;
  double edge_bandwidth_gbps;
} fabscope_collective_estimate;

/* Borrowed view of one measurement; pointers live as long as the handle. */
typedef struct fabscope_record_view {
  const char* benchmark;
  const char* src_kind;
  int src_id;
  const char* dst_kind;
  int dst_id;
  uint64_t size_bytes;
  fabscope_metric metric;
  double value;
  size_t line;
  const char* source; /* file name, "" for parsed strings */
} fabscope_record_view;

typedef struct fabscope_topology fabscope_topology;
typedef struct fabscope_profile fabscope_profile;
typedef struct fabscope_matrix fabscope_matrix;
typedef struct fabscope_prediction fabscope_prediction;
typedef struct fabscope_records fabscope_records;
typedef struct fabscope_report fabscope_report;
typedef struct fabscope_comparison fabscope_comparison;

/* ---- general ---------------------------------------------------------- */

FABSCOPE_API const char* fabscope_version(void);
FABSCOPE_API const char* fabscope_status_string(fabscope_status status);
FABSCOPE_API const char* fabscope_last_error(void);
FABSCOPE_API const char* fabscope_last_error_rule(void);
FABSCOPE_API size_t fabscope_last_error_line(void);
FABSCOPE_API void fabscope_string_free(char* s);

/* Paths of the bundled frontier-node.json and mi250x-paper.json. */
FABSCOPE_API const char* fabscope_bundled_topology_path(void);
FABSCOPE_API const char* fabscope_bundled_profile_path(void);

FABSCOPE_API fabscope_status fabscope_parse_enum(fabscope_enum_kind kind, const char* name,
                                                 int* out);

/* ---- topology --------------------------------------------------------- */

FABSCOPE_API fabscope_status fabscope_topology_load_file(const char* path,
                                                         fabscope_topology** out);
FABSCOPE_API fabscope_status fabscope_topology_load_string(const char* json,
                                                           fabscope_topology** out);
FABSCOPE_API void fabscope_topology_free(fabscope_topology* t);
FABSCOPE_API fabscope_status fabscope_topology_gcd_ids(const fabscope_topology* t, int* ids,
                                                       size_t capacity, size_t* count);
FABSCOPE_API fabscope_status fabscope_topology_render(const fabscope_topology* t, char** out);

/* `*linked` is 0 (and `*gbps` untouched) when the devices are not adjacent. */
FABSCOPE_API fabscope_status fabscope_theoretical_bandwidth(const fabscope_topology* t,
                                                            fabscope_device a,
                                                            fabscope_device b,
                                                            fabscope_direction dir,
                                                            double* gbps, int* linked);
FABSCOPE_API fabscope_status fabscope_neighbors(const fabscope_topology* t, fabscope_device d,
                                                fabscope_neighbor* out, size_t capacity,
                                                size_t* count);
FABSCOPE_API fabscope_status fabscope_neighbors_render(const fabscope_topology* t,
                                                       fabscope_device d, char** out);
/* Parses "3", "gcd:3" or "numa:3". */
FABSCOPE_API fabscope_status fabscope_parse_device(const char* text, fabscope_device* out);

/* ---- routing ---------------------------------------------------------- */

/* max_hops only applies to FABSCOPE_OBJECTIVE_BANDWIDTH; pass 0 for the default. */
FABSCOPE_API fabscope_status fabscope_route(const fabscope_topology* t, int a, int b,
                                            fabscope_objective objective, int max_hops,
                                            int* hops, size_t capacity, size_t* hop_len,
                                            double* bottleneck_gbps);
FABSCOPE_API fabscope_status fabscope_route_render(const fabscope_topology* t, int a, int b,
                                                   fabscope_objective objective, int max_hops,
                                                   char** out);

FABSCOPE_API fabscope_status fabscope_matrix_compute(const fabscope_topology* t,
                                                     fabscope_matrix_metric metric,
                                                     int max_hops, fabscope_matrix** out);
FABSCOPE_API void fabscope_matrix_free(fabscope_matrix* m);
FABSCOPE_API size_t fabscope_matrix_size(const fabscope_matrix* m);
FABSCOPE_API int fabscope_matrix_id(const fabscope_matrix* m, size_t index);
FABSCOPE_API double fabscope_matrix_value(const fabscope_matrix* m, size_t row, size_t col);
FABSCOPE_API fabscope_status fabscope_matrix_render(const fabscope_matrix* m,
                                                    fabscope_format format, char** out);

/* ---- transfer model --------------------------------------------------- */

FABSCOPE_API fabscope_status fabscope_profile_load_file(const char* path,
                                                        fabscope_profile** out);
FABSCOPE_API fabscope_status fabscope_profile_load_string(const char* json,
                                                          fabscope_profile** out);
/* New profile equal to `base` with cpu_gpu_per_gcd_bidir_gbps set. */
FABSCOPE_API fabscope_status fabscope_profile_with_per_gcd_bidir(const fabscope_profile* base,
                                                                 double gbps,
                                                                 fabscope_profile** out);
FABSCOPE_API void fabscope_profile_free(fabscope_profile* p);

FABSCOPE_API fabscope_status fabscope_resolve_movement(fabscope_alloc alloc, int xnack,
                                                       fabscope_api api,
                                                       fabscope_movement* movement,
                                                       int* coherent);

FABSCOPE_API fabscope_status fabscope_predict_h2d(const fabscope_transfer* spec,
                                                  const fabscope_topology* t,
                                                  const fabscope_profile* p,
                                                  fabscope_prediction** out);
FABSCOPE_API fabscope_status fabscope_predict_p2p(const fabscope_transfer* spec,
                                                  const fabscope_topology* t,
                                                  const fabscope_profile* p, int max_hops,
                                                  fabscope_prediction** out);
FABSCOPE_API fabscope_status fabscope_predict_multi_gpu(const fabscope_topology* t,
                                                        const fabscope_profile* p,
                                                        const int* gcds, size_t n,
                                                        fabscope_prediction** out);
FABSCOPE_API fabscope_status fabscope_predict_local_stream(const fabscope_topology* t,
                                                           const fabscope_profile* p,
                                                           fabscope_prediction** out);
FABSCOPE_API void fabscope_prediction_free(fabscope_prediction* p);
FABSCOPE_API int fabscope_prediction_has_bandwidth(const fabscope_prediction* p);
FABSCOPE_API double fabscope_prediction_bandwidth(const fabscope_prediction* p);
FABSCOPE_API fabscope_direction fabscope_prediction_direction(const fabscope_prediction* p);
FABSCOPE_API int fabscope_prediction_unstable(const fabscope_prediction* p);
/* Returns 1 and fills lo/hi when the prediction is an interval. */
FABSCOPE_API int fabscope_prediction_interval(const fabscope_prediction* p, double* lo,
                                              double* hi);
/* 'A'..'D', or '\0' when absent. */
FABSCOPE_API char fabscope_prediction_latency_tier(const fabscope_prediction* p);
FABSCOPE_API const char* fabscope_prediction_rule(const fabscope_prediction* p);
FABSCOPE_API fabscope_status fabscope_prediction_render(const fabscope_prediction* p,
                                                        char** out);

FABSCOPE_API fabscope_status fabscope_latency_tier(const fabscope_topology* t, int a, int b,
                                                   char* tier);
FABSCOPE_API fabscope_status fabscope_stream_bandwidth(double elapsed_s,
                                                       double bytes_per_buffer, int n_gpus,
                                                       double* gbps);

/* ---- collectives ------------------------------------------------------ */

FABSCOPE_API int fabscope_collective_passes(fabscope_collective op);
FABSCOPE_API fabscope_status fabscope_collective_lower_bound(fabscope_collective op,
                                                             double l_min_us, double* out_us);
/* `rendered` may be NULL. */
FABSCOPE_API fabscope_status fabscope_simulate_ring(
    fabscope_collective op, const int* participants, size_t n, uint64_t message_bytes,
    const fabscope_topology* t, const fabscope_profile* p, double hop_latency_us,
    fabscope_collective_estimate* out, char** rendered);

FABSCOPE_API fabscope_status fabscope_compare_backends(const fabscope_records* records,
                                                       const char* backend_a,
                                                       const char* backend_b,
                                                       fabscope_comparison** out);
FABSCOPE_API void fabscope_comparison_free(fabscope_comparison* c);
FABSCOPE_API size_t fabscope_comparison_rows(const fabscope_comparison* c);
/* Majority winner label for one collective, or NULL on a tie / absent op. */
FABSCOPE_API const char* fabscope_comparison_winner(const fabscope_comparison* c,
                                                    fabscope_collective op);
FABSCOPE_API fabscope_status fabscope_comparison_render(const fabscope_comparison* c,
                                                        fabscope_format format, char** out);

/* ---- measurements ----------------------------------------------------- */

FABSCOPE_API fabscope_status fabscope_records_parse(const char* csv, fabscope_records** out);
FABSCOPE_API fabscope_status fabscope_records_load_file(const char* path,
                                                        fabscope_records** out);
FABSCOPE_API fabscope_status fabscope_records_append(fabscope_records* dst,
                                                     const fabscope_records* src);
FABSCOPE_API void fabscope_records_free(fabscope_records* r);
FABSCOPE_API size_t fabscope_records_count(const fabscope_records* r);
FABSCOPE_API fabscope_status fabscope_records_get(const fabscope_records* r, size_t index,
                                                  fabscope_record_view* out);
/* FABSCOPE_FORMAT_CSV yields the canonical measurement CSV. */
FABSCOPE_API fabscope_status fabscope_records_render(const fabscope_records* r,
                                                     fabscope_format format, char** out);

/* tolerance < 0 selects the default of 0.10. */
FABSCOPE_API fabscope_status fabscope_validate(const fabscope_records* r,
                                               const fabscope_topology* t,
                                               const fabscope_profile* p, double tolerance,
                                               fabscope_report** out);
/* Report holding only anomaly findings. */
FABSCOPE_API fabscope_status fabscope_detect_anomalies(const fabscope_records* r,
                                                       const fabscope_topology* t,
                                                       fabscope_report** out);
FABSCOPE_API void fabscope_report_free(fabscope_report* rep);
FABSCOPE_API size_t fabscope_report_size(const fabscope_report* rep);
FABSCOPE_API size_t fabscope_report_count(const fabscope_report* rep, fabscope_verdict v);
FABSCOPE_API fabscope_verdict fabscope_report_verdict(const fabscope_report* rep, size_t index);
FABSCOPE_API size_t fabscope_report_anomaly_count(const fabscope_report* rep);
FABSCOPE_API fabscope_status fabscope_report_anomaly(const fabscope_report* rep, size_t index,
                                                     const char** signature,
                                                     fabscope_anomaly_status* status);
FABSCOPE_API fabscope_status fabscope_report_render(const fabscope_report* rep,
                                                    fabscope_format format, char** out);
FABSCOPE_API fabscope_status fabscope_report_render_anomalies(const fabscope_report* rep,
                                                              fabscope_format format,
                                                              char** out);

/* Plan manifest (JSON) for a suite name: cpu_gpu, p2p, mpi_p2p, collectives,
 * multi_gpu_stream. `case_count` may be NULL. */
FABSCOPE_API fabscope_status fabscope_plan_emit(const char* suite, const fabscope_topology* t,
                                                char** json_out, size_t* case_count);

#ifdef __cplusplus
}
#endif

#endif /* FABSCOPE_H */
