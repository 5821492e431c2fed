#ifndef FRAB_H
#define FRAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum FrabStatus {
  FRAB_STATUS_OK = 0,
  // Bad argument, configuration, dimension, or input text.
  FRAB_STATUS_USAGE = 1,
  // The iteration produced a non-finite value.
  FRAB_STATUS_NUMERICAL = 2,
  FRAB_STATUS_NULL_POINTER = 3,
  // A Rust panic was caught at the boundary.
  FRAB_STATUS_PANIC = 4,
  FRAB_STATUS_IO = 5,
} FrabStatus;

// How a run ended.
typedef enum FrabTermination {
  FRAB_TERMINATION_TOLERANCE = 0,
  FRAB_TERMINATION_MAX_ITER = 1,
  FRAB_TERMINATION_NUMERICAL_FAILURE = 2,
} FrabTermination;

// A solver configuration.
typedef struct FrabConfig FrabConfig;

// A parsed experiment: one problem plus labelled runs.
typedef struct FrabExperiment FrabExperiment;

// A problem instance.
typedef struct FrabProblem FrabProblem;

// The trace of one run.
typedef struct FrabRecord FrabRecord;

// Results of running an experiment.
typedef struct FrabReport FrabReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` and returns its
// length in bytes, excluding the terminator. Returns 0 when no error is set.
size_t frab_last_error(char *buf, size_t len);

// `out[i] = sign(x[i])·max(|x[i]| − delta, 0)`. `out` may alias `x`.
enum FrabStatus frab_soft_threshold(const double *x, size_t len, double delta, double *out);

// Clamps `x` into the box `[lo, hi]`. `out` may alias `x`.
enum FrabStatus frab_box_project(const double *x,
                                 const double *lo,
                                 const double *hi,
                                 size_t len,
                                 double *out);

// Builds the problem `0 ∈ slope·w + offset + weight·∂‖w‖₁` in `len`
// dimensions with default initial points `w0`, `w1`.
enum FrabStatus frab_problem_affine_l1(double slope,
                                       const double *offset,
                                       double weight,
                                       const double *w0,
                                       const double *w1,
                                       size_t len,
                                       struct FrabProblem **out);

enum FrabStatus frab_problem_dim(const struct FrabProblem *problem, size_t *dim);

// Natural residual `½‖w − J₁(w − Tw)‖²`, scaled by the problem's metric weight.
enum FrabStatus frab_problem_residual(const struct FrabProblem *problem,
                                      const double *w,
                                      size_t len,
                                      double *value);

void frab_problem_free(struct FrabProblem *problem);

// New configuration with library defaults. `algorithm` is one of
// `frab-adaptive`, `frab-fixed`, `frab-inertial`, `frab-inertial-variable`,
// `viscosity`, `inertial-viscosity`, `frbsm`, `rfbsm`.
enum FrabStatus frab_config_new(const char *algorithm, struct FrabConfig **out);

// Sets one key using the value syntax of spec files, for a problem of
// dimension `dim`. Accepts the run keys (`r_bar`, `sigma`, `anchor`,
// `theta`, `lambda`, ...) plus `tol`, `max_iter`, `stopping` and
// `keep_iterates`.
enum FrabStatus frab_config_set(struct FrabConfig *config,
                                const char *key,
                                const char *value,
                                size_t dim);

// Checks the configuration against `problem` without running it.
enum FrabStatus frab_config_validate(const struct FrabConfig *config,
                                     const struct FrabProblem *problem);

void frab_config_free(struct FrabConfig *config);

// Runs `config` on `problem`. `w0` and `w1` override the problem's initial
// points when both are non-null. A run that fails numerically still
// produces a record; the status is then `FRAB_STATUS_NUMERICAL`.
enum FrabStatus frab_solve(const struct FrabProblem *problem,
                           const struct FrabConfig *config,
                           const double *w0,
                           const double *w1,
                           size_t len,
                           struct FrabRecord **out);

enum FrabStatus frab_record_iterations(const struct FrabRecord *record, size_t *iterations);

enum FrabStatus frab_record_termination(const struct FrabRecord *record,
                                        enum FrabTermination *termination);

// Wall time in seconds plus operator and resolvent evaluation counts.
// Any output pointer may be null.
enum FrabStatus frab_record_costs(const struct FrabRecord *record,
                                  double *wall_s,
                                  size_t *operator_evals,
                                  size_t *resolvent_calls);

enum FrabStatus frab_record_final_iterate(const struct FrabRecord *record,
                                          double *buf,
                                          size_t len,
                                          size_t *needed);

// Residual after each iteration.
enum FrabStatus frab_record_residuals(const struct FrabRecord *record,
                                      double *buf,
                                      size_t len,
                                      size_t *needed);

// Step size after each iteration.
enum FrabStatus frab_record_steps(const struct FrabRecord *record,
                                  double *buf,
                                  size_t len,
                                  size_t *needed);

void frab_record_free(struct FrabRecord *record);

// Parses an experiment in the spec file format.
enum FrabStatus frab_experiment_parse(const char *text, struct FrabExperiment **out);

// Loads one of the builtin experiments by name.
enum FrabStatus frab_experiment_builtin(const char *name, struct FrabExperiment **out);

// Builds the experiment's problem as a standalone handle.
enum FrabStatus frab_experiment_problem(const struct FrabExperiment *experiment,
                                        struct FrabProblem **out);

enum FrabStatus frab_experiment_run_count(const struct FrabExperiment *experiment, size_t *count);

// Configuration of run `index`, with the experiment's shared tolerance,
// iteration cap and stopping rule applied.
enum FrabStatus frab_experiment_config(const struct FrabExperiment *experiment,
                                       size_t index,
                                       struct FrabConfig **out);

// Runs every configuration of the experiment. `out_dir` may be null;
// otherwise trace and summary CSVs are written there.
enum FrabStatus frab_experiment_run(const struct FrabExperiment *experiment,
                                    const char *out_dir,
                                    struct FrabReport **out);

void frab_experiment_free(struct FrabExperiment *experiment);

enum FrabStatus frab_report_len(const struct FrabReport *report, size_t *len);

enum FrabStatus frab_report_label(const struct FrabReport *report,
                                  size_t index,
                                  char *buf,
                                  size_t len,
                                  size_t *needed);

// Restoration SNR in dB of row `index`, or NaN when the problem is not an
// image problem.
enum FrabStatus frab_report_snr(const struct FrabReport *report, size_t index, double *snr);

// Copies the record of row `index` into a new handle.
enum FrabStatus frab_report_record(const struct FrabReport *report,
                                   size_t index,
                                   struct FrabRecord **out);

void frab_report_free(struct FrabReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAB_H */
