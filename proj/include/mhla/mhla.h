/* mhla: memory hierarchy layer assignment with DMA prefetch time extension.
 *
 * C interface to the exploration engine. All handles are opaque; every
 * fallible call returns a status code and leaves a message readable through
 * mhla_last_error() on failure. Strings returned through result accessors
 * stay valid until the owning result handle is freed.
 */
#ifndef MHLA_H
#define MHLA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define MHLA_API __attribute__((visibility("default")))

typedef enum mhla_status {
  MHLA_OK = 0,
  MHLA_ERR_INPUT = 1,    /* malformed or infeasible input */
  MHLA_ERR_INTERNAL = 2, /* broken invariant; a bug */
} mhla_status;

typedef struct mhla_model mhla_model;
typedef struct mhla_platform mhla_platform;
typedef struct mhla_result mhla_result;

typedef struct mhla_explore_options {
  int te;         /* nonzero: run the time-extension step */
  int oracle;     /* nonzero: exhaustive assignment instead of greedy */
  int with_trace; /* nonzero: keep per-capacity simulator event traces */
} mhla_explore_options;

typedef struct mhla_point {
  uint64_t capacity;
  uint64_t cycles_no_te;
  uint64_t cycles_te;
  const char* energy_pj; /* exact decimal string */
  uint64_t peak_bytes;
  int pareto;
} mhla_point;

MHLA_API const char* mhla_version(void);

/* Message describing the most recent failure on this thread. */
MHLA_API const char* mhla_last_error(void);

MHLA_API mhla_status mhla_model_parse(const char* json_text, mhla_model** out);
MHLA_API void mhla_model_free(mhla_model* model);

MHLA_API mhla_status mhla_platform_parse(const char* json_text, mhla_platform** out);
MHLA_API void mhla_platform_free(mhla_platform* platform);

MHLA_API mhla_status mhla_explore_run(const mhla_model* model, const mhla_platform* platform,
                                      const uint64_t* capacities, size_t capacity_count,
                                      const mhla_explore_options* options, mhla_result** out);
MHLA_API void mhla_result_free(mhla_result* result);

MHLA_API size_t mhla_result_point_count(const mhla_result* result);
MHLA_API mhla_status mhla_result_point(const mhla_result* result, size_t index, mhla_point* out);

/* The trade-off table (header + one row per capacity). */
MHLA_API const char* mhla_result_csv(const mhla_result* result);
/* Assignment and block-transfer schedule of one point, as JSON. */
MHLA_API const char* mhla_result_schedule_json(const mhla_result* result, size_t index);
/* Simulator event trace of one point ("cycle,event,object"); NULL unless
 * with_trace was set. */
MHLA_API const char* mhla_result_trace_csv(const mhla_result* result, size_t index);
/* On-chip live intervals of one point ("object,start_slot,end_slot,bytes,concurrent"). */
MHLA_API const char* mhla_result_intervals_csv(const mhla_result* result, size_t index);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MHLA_H */
