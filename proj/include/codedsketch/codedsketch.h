/* C interface to the coded-sketch library. All handles are opaque; every
 * fallible call returns a cs_status and leaves a message for cs_last_error()
 * on the calling thread. */
#ifndef CODEDSKETCH_H
#define CODEDSKETCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(CODEDSKETCH_BUILDING_LIBRARY)
#define CS_API __attribute__((visibility("default")))
#else
#define CS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cs_status {
  CS_OK = 0,
  CS_ERR_PARAMETER = 1,
  CS_ERR_PARTITION = 2,
  CS_ERR_CONFIGURATION = 3,
  CS_ERR_INSUFFICIENT_SAMPLES = 4,
  CS_ERR_NUMERICAL = 5,
  CS_ERR_STARVATION = 6,
  CS_ERR_IO = 7,
  CS_ERR_INTERNAL = 8
} cs_status;

typedef enum cs_grid { CS_GRID_ROOTS_OF_UNITY = 0, CS_GRID_CHEBYSHEV = 1 } cs_grid;
typedef enum cs_format { CS_FORMAT_JSON = 0, CS_FORMAT_CSV = 1 } cs_format;

typedef struct cs_matrix cs_matrix;
typedef struct cs_config cs_config;
typedef struct cs_report cs_report;

typedef struct cs_scheme {
  size_t p, m, n, bprime, d, workers;
  double epsilon, delta, log_base;
} cs_scheme;

CS_API const char* cs_version(void);
/* Message of the last failed call on this thread; "" if none. */
CS_API const char* cs_last_error(void);
CS_API const char* cs_status_name(cs_status status);

/* Matrices, row-major. `data` may be NULL for a zero matrix. */
CS_API cs_status cs_matrix_create(size_t rows, size_t cols, const double* data, cs_matrix** out);
CS_API void cs_matrix_destroy(cs_matrix* matrix);
CS_API size_t cs_matrix_rows(const cs_matrix* matrix);
CS_API size_t cs_matrix_cols(const cs_matrix* matrix);
CS_API cs_status cs_matrix_copy(const cs_matrix* matrix, double* out, size_t capacity);
CS_API cs_status cs_matrix_load(const char* path, cs_matrix** out);
CS_API cs_status cs_matrix_save(const cs_matrix* matrix, const char* path);

/* Scheme arithmetic. */
CS_API cs_status cs_scheme_from_accuracy(size_t p, size_t m, size_t n, double epsilon,
                                         double delta, double log_base, cs_scheme* out);
CS_API uint64_t cs_threshold_cs(size_t p, size_t bprime, size_t d);
CS_API uint64_t cs_threshold_exact(size_t p, size_t m, size_t n);
/* First term of the printed accuracy-driven bound, and the bound itself. */
CS_API cs_status cs_printed_bound(size_t p, size_t m, size_t n, double epsilon, double delta,
                                  double log_base, uint64_t* first_term, uint64_t* bound);

/* Full pipeline with every worker responding; decodes from the first
 * threshold results. */
CS_API cs_status cs_approximate_multiply(const cs_matrix* a, const cs_matrix* b,
                                         const cs_scheme* scheme, uint64_t seed,
                                         cs_grid grid, cs_matrix** out);

/* Experiments. Option names follow the CLI flags without dashes. */
CS_API cs_status cs_config_create(cs_config** out);
CS_API void cs_config_destroy(cs_config* config);
CS_API cs_status cs_config_set(cs_config* config, const char* key, const char* value);
CS_API cs_status cs_experiment_run(const cs_config* config, cs_report** out);
CS_API int cs_report_passed(const cs_report* report);
CS_API cs_status cs_report_to_string(const cs_report* report, cs_format format, char** out);
CS_API cs_status cs_report_write(const cs_report* report, cs_format format, const char* path);
CS_API void cs_report_destroy(cs_report* report);
CS_API void cs_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* CODEDSKETCH_H */
