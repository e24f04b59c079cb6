/* C interface to the phfb library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_destroy function. Functions return a phfb_status; on failure
 * phfb_last_error() describes the problem (per thread). Matrices cross the
 * boundary as dense row-major arrays.
 */
#ifndef PHFB_PHFB_H_
#define PHFB_PHFB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PHFB_API __declspec(dllexport)
#else
#define PHFB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum phfb_status {
  PHFB_OK = 0,
  /* Input is well formed but an existence condition or a structural
   * requirement does not hold. A report is still produced when possible. */
  PHFB_CONDITIONS_NOT_MET = 1,
  PHFB_INVALID_ARGUMENT = 2,
  PHFB_SHAPE_MISMATCH = 3,
  PHFB_PARSE_ERROR = 4,
  PHFB_IO_ERROR = 5,
  PHFB_NUMERICAL_BREAKDOWN = 6,
  PHFB_INTERNAL_ERROR = 7
} phfb_status;

typedef enum phfb_goal { PHFB_GOAL_STABILIZE = 0, PHFB_GOAL_PASSIFY = 1 } phfb_goal;

typedef struct phfb_tolerance {
  double rank_rtol;
  double psd_tol;
  double axis_tol;
  double stability_margin;
} phfb_tolerance;

/* Ranks below zero mean "use the default". Flags are 0 or 1. */
typedef struct phfb_gen_knobs {
  int rank_e;
  int rank_w;
  int force_axis_modes;
  int force_singular;
  int s_definite;
} phfb_gen_knobs;

typedef struct phfb_system phfb_system;
typedef struct phfb_feedback phfb_feedback;
typedef struct phfb_report phfb_report;

PHFB_API const char* phfb_version(void);
PHFB_API const char* phfb_status_name(phfb_status status);
/* Message of the last failed call on this thread; empty if none. */
PHFB_API const char* phfb_last_error(void);

PHFB_API phfb_tolerance phfb_default_tolerance(void);
PHFB_API phfb_gen_knobs phfb_default_gen_knobs(void);

/* E, J, R: n x n; G, P: n x m; D = S + N: m x m. */
PHFB_API phfb_status phfb_system_create(size_t n, size_t m, const double* E, const double* J,
                                        const double* R, const double* G, const double* P,
                                        const double* D, phfb_system** out);
PHFB_API phfb_status phfb_system_load(const char* path, phfb_system** out);
PHFB_API phfb_status phfb_system_parse(const char* json, phfb_system** out);
PHFB_API phfb_status phfb_system_save(const phfb_system* sys, const char* path);
/* The string is released with phfb_string_free. */
PHFB_API phfb_status phfb_system_to_json(const phfb_system* sys, char** out);
PHFB_API void phfb_system_destroy(phfb_system* sys);
PHFB_API size_t phfb_system_n(const phfb_system* sys);
PHFB_API size_t phfb_system_m(const phfb_system* sys);
/* name is one of "E", "J", "R", "G", "P", "S", "N", "D"; len must equal the
 * number of entries. */
PHFB_API phfb_status phfb_system_get_matrix(const phfb_system* sys, const char* name, double* out,
                                            size_t len);

PHFB_API phfb_status phfb_generate(size_t n, size_t m, uint64_t seed, const phfb_gen_knobs* knobs,
                                   phfb_system** out);

PHFB_API phfb_status phfb_feedback_create(size_t rows, size_t cols, const double* data,
                                          phfb_feedback** out);
/* Reads a document with a top-level "F" sized for sys. */
PHFB_API phfb_status phfb_feedback_load(const char* path, const phfb_system* sys,
                                        phfb_feedback** out);
PHFB_API phfb_status phfb_feedback_parse(const char* json, const phfb_system* sys,
                                         phfb_feedback** out);
PHFB_API void phfb_feedback_destroy(phfb_feedback* fb);
PHFB_API size_t phfb_feedback_rows(const phfb_feedback* fb);
PHFB_API size_t phfb_feedback_cols(const phfb_feedback* fb);
/* Row-major view valid for the lifetime of fb. */
PHFB_API const double* phfb_feedback_data(const phfb_feedback* fb);

/* Reports. The verdict is phfb_report_passed; the status only says whether
 * the computation ran. */
PHFB_API phfb_status phfb_validate(const phfb_system* sys, const phfb_tolerance* tol,
                                   phfb_report** out);
PHFB_API phfb_status phfb_analyze(const phfb_system* sys, const phfb_tolerance* tol,
                                  phfb_report** out);
/* On PHFB_CONDITIONS_NOT_MET *report is still set and *fb is NULL. The
 * report embeds "F" and the certification of the closed loop. */
PHFB_API phfb_status phfb_stabilize(const phfb_system* sys, const phfb_tolerance* tol,
                                    double margin, phfb_feedback** fb, phfb_report** report);
PHFB_API phfb_status phfb_passify(const phfb_system* sys, const phfb_tolerance* tol,
                                  phfb_feedback** fb, phfb_report** report);
PHFB_API phfb_status phfb_certify(const phfb_system* sys, const phfb_feedback* fb, phfb_goal goal,
                                  const phfb_tolerance* tol, phfb_report** out);
/* x0 (n entries) and v (m entries, held constant) may be NULL for zeros.
 * The trajectory CSV is the report attachment. */
PHFB_API phfb_status phfb_simulate(const phfb_system* sys, const phfb_feedback* fb,
                                   const double* x0, const double* v, double T, double dt,
                                   const phfb_tolerance* tol, phfb_report** out);

PHFB_API int phfb_report_passed(const phfb_report* report);
PHFB_API const char* phfb_report_json(const phfb_report* report);
/* NULL when the report has no attachment. */
PHFB_API const char* phfb_report_attachment(const phfb_report* report);
PHFB_API void phfb_report_destroy(phfb_report* report);

PHFB_API void phfb_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* PHFB_PHFB_H_ */
