#ifndef IDREFINE_IDREFINE_H
#define IDREFINE_IDREFINE_H

/* C interface to the influence-diagram refinement library.
 *
 * Every fallible call returns an idr_status; on failure the message is
 * available from idr_last_error_message() on the same thread until the next
 * call. Strings returned through char** are owned by the caller and released
 * with idr_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(IDR_BUILDING_LIBRARY)
#define IDR_API __declspec(dllexport)
#else
#define IDR_API __declspec(dllimport)
#endif
#else
#define IDR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define IDR_ABI_VERSION 1

typedef enum idr_status {
  IDR_OK = 0,
  IDR_ERR_PARSE = 1,
  IDR_ERR_VALIDATION = 2,
  IDR_ERR_ZERO_PROBABILITY = 3,
  IDR_ERR_ARGUMENT = 4,
  IDR_ERR_LIMIT = 5,
  IDR_ERR_IO = 6,
  IDR_ERR_INTERNAL = 7
} idr_status;

typedef enum idr_leaf_strategy {
  IDR_LEAF_POSTHOC = 0,
  IDR_LEAF_RANDOM = 1
} idr_leaf_strategy;

typedef enum idr_extension_strategy {
  IDR_EXT_GREEDY = 0,
  IDR_EXT_RANDOM = 1
} idr_extension_strategy;

typedef struct idr_diagram idr_diagram;
typedef struct idr_run idr_run;

IDR_API int idr_abi_version(void);
IDR_API const char* idr_status_name(idr_status status);
IDR_API const char* idr_last_error_message(void);
IDR_API void idr_string_free(char* s);

/* ------------------------------------------------------------ diagrams */

/* validate != 0 checks invariants and renormalizes CPT rows. */
IDR_API idr_status idr_diagram_parse(const char* text, size_t length,
                                     int validate, idr_diagram** out);
IDR_API idr_status idr_diagram_load(const char* path, int validate,
                                    idr_diagram** out);
IDR_API idr_status idr_diagram_fixture(const char* name, idr_diagram** out);
/* Space-separated fixture names. */
IDR_API idr_status idr_fixture_names(char** out);
/* two_stage == 0: single decision over n chance predecessors of `arity`
 * outcomes. two_stage != 0: two decisions with n observations. */
IDR_API idr_status idr_diagram_generate(size_t n, uint64_t seed, size_t arity,
                                        int two_stage, idr_diagram** out);
/* Loads a full Car Buyer diagram and checks its topology. */
IDR_API idr_status idr_diagram_load_car_buyer(const char* path,
                                              idr_diagram** out);
IDR_API void idr_diagram_free(idr_diagram* diagram);

/* Report is {"ok":bool,"violations":[{"kind":..,"message":..}]}. */
IDR_API idr_status idr_diagram_validate(const idr_diagram* diagram, int* ok,
                                        char** report_json);
IDR_API idr_status idr_diagram_to_json(const idr_diagram* diagram, char** out);
/* Decision names in decision order, space-separated. */
IDR_API idr_status idr_diagram_decisions(const idr_diagram* diagram,
                                         char** out);

/* ---------------------------------------------------------- refinement */

typedef struct idr_refine_options {
  int leaf;              /* idr_leaf_strategy */
  int extension;         /* idr_extension_strategy */
  uint64_t seed;
  int64_t max_extensions; /* negative: unset */
  int64_t max_fine_queries;
  int64_t max_passes;
  int has_min_evi;
  double min_evi;
  /* Run until the tree is complete. Also implied when no bound is set. */
  int run_to_complete;
  /* Joint configurations the summary's oracle may enumerate; 0 skips it. */
  uint64_t oracle_cap;
} idr_refine_options;

IDR_API void idr_refine_options_init(idr_refine_options* options);

/* Refines one decision; the other decisions act uniformly. */
IDR_API idr_status idr_solve(const idr_diagram* diagram, const char* decision,
                             const idr_refine_options* options, idr_run** out);

typedef struct idr_stage_options {
  const char* decision;
  idr_refine_options options;
} idr_stage_options;

/* Sweep-back over every decision. Stages without an entry in `stages` use
 * `defaults`. */
IDR_API idr_status idr_sweep(const idr_diagram* diagram,
                             const idr_refine_options* defaults,
                             const idr_stage_options* stages,
                             size_t stage_count, idr_run** out);

IDR_API void idr_run_free(idr_run* run);
/* 1 for idr_solve; one per decision (last decision first) for idr_sweep. */
IDR_API size_t idr_run_stage_count(const idr_run* run);
IDR_API idr_status idr_run_stage_decision(const idr_run* run, size_t stage,
                                          char** name);
IDR_API idr_status idr_run_trace_csv(const idr_run* run, size_t stage,
                                     char** csv);
IDR_API idr_status idr_run_policy_json(const idr_run* run, char** json);
IDR_API idr_status idr_run_summary_json(const idr_run* run, char** json);
/* Normalized expected value of the final policy. */
IDR_API double idr_run_value(const idr_run* run);

/* -------------------------------------------------------------- oracle */

/* decision == NULL: multistage backward induction over every decision. */
IDR_API idr_status idr_oracle(const idr_diagram* diagram, const char* decision,
                              uint64_t cap, char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* IDREFINE_IDREFINE_H */
