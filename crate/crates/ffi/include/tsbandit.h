#ifndef TSBANDIT_H
#define TSBANDIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum TsbStatus {
  TSB_STATUS_OK = 0,
  /**
   * An argument is outside the function's domain.
   */
  TSB_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The experiment configuration is malformed or inconsistent.
   */
  TSB_STATUS_CONFIG_ERROR = 2,
  /**
   * A simulation or numerical routine failed.
   */
  TSB_STATUS_RUNTIME_ERROR = 3,
  /**
   * A required pointer argument was null.
   */
  TSB_STATUS_NULL_POINTER = 4,
  /**
   * An internal panic was caught.
   */
  TSB_STATUS_PANIC = 5,
} TsbStatus;

/**
 * An experiment parsed from a configuration file.
 */
typedef struct TsbExperiment TsbExperiment;

/**
 * A single policy instance that the caller drives round by round.
 */
typedef struct TsbPolicy TsbPolicy;

/**
 * Regret estimates of a finished experiment.
 */
typedef struct TsbSummary TsbSummary;

/**
 * One checkpoint of a [`TsbSummary`].
 */
typedef struct TsbCheckpoint {
  uint64_t t;
  double mean;
  double std_error;
  double ci95;
} TsbCheckpoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if there was none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *tsb_last_error_message(void);

/**
 * Prior-free Bayesian regret bound `14 sqrt(n K)`.
 *
 * # Safety
 * `out` must be valid for writing one `double`.
 */
enum TsbStatus tsb_thm1_bound(uint64_t n, uint64_t k, double *out);

/**
 * Minimax lower bound `sqrt(n K) / 20`.
 *
 * # Safety
 * `out` must be valid for writing one `double`.
 */
enum TsbStatus tsb_minimax_lower_bound(uint64_t n, uint64_t k, double *out);

/**
 * Two-armed known-gap bound `delta + 578 / delta`.
 *
 * # Safety
 * `out` must be valid for writing one `double`.
 */
enum TsbStatus tsb_thm2_bound(double delta, double *out);

/**
 * `K`-armed bound for `len` gaps and minimum gap `epsilon`.
 *
 * # Safety
 * `gaps` must point to `len` doubles (or be null when `len` is 0); `out`
 * must be valid for writing one `double`.
 */
enum TsbStatus tsb_thm3_bound(const double *gaps, size_t len, double epsilon, double *out);

/**
 * `log int_{-inf}^{upper} exp(-(samples/3)(center - v)^2) dv`.
 *
 * # Safety
 * `out` must be valid for writing one `double`.
 */
enum TsbStatus tsb_log_trunc_gauss_integral(double center,
                                            double upper,
                                            uint64_t samples,
                                            double *out);

/**
 * Normalizes `len` log-weights into probabilities written to `probs`.
 *
 * # Safety
 * `log_weights` must point to `len` doubles and `probs` must be valid for
 * writing `len` doubles.
 */
enum TsbStatus tsb_normalize_log_weights(const double *log_weights, size_t len, double *probs);

/**
 * Parses an experiment from configuration text (the CLI's TOML format).
 *
 * # Safety
 * `config_text` must be a NUL-terminated UTF-8 string; `out` must be valid
 * for writing one pointer.
 */
enum TsbStatus tsb_experiment_from_toml(const char *config_text, struct TsbExperiment **out);

/**
 * Overrides the master seed of an experiment.
 *
 * # Safety
 * `experiment` must be a live handle.
 */
enum TsbStatus tsb_experiment_set_seed(struct TsbExperiment *experiment, uint64_t seed);

/**
 * Number of arms of the experiment's environment.
 *
 * # Safety
 * `experiment` must be a live handle; `out` must be valid for one write.
 */
enum TsbStatus tsb_experiment_arms(const struct TsbExperiment *experiment, size_t *out);

/**
 * Runs every episode; `workers == 0` uses all cores. The result does not
 * depend on `workers`.
 *
 * # Safety
 * `experiment` must be a live handle; `out` must be valid for one write.
 */
enum TsbStatus tsb_experiment_run(const struct TsbExperiment *experiment,
                                  size_t workers,
                                  struct TsbSummary **out);

/**
 * # Safety
 * `experiment` must be null or a handle not yet freed.
 */
void tsb_experiment_free(struct TsbExperiment *experiment);

/**
 * Number of checkpoints in the summary.
 *
 * # Safety
 * `summary` must be a live handle; `out` must be valid for one write.
 */
enum TsbStatus tsb_summary_len(const struct TsbSummary *summary, size_t *out);

/**
 * Copies checkpoint `index` into `out`.
 *
 * # Safety
 * `summary` must be a live handle; `out` must be valid for one write.
 */
enum TsbStatus tsb_summary_checkpoint(const struct TsbSummary *summary,
                                      size_t index,
                                      struct TsbCheckpoint *out);

/**
 * The summary as CSV text, identical to the CLI's output. Release the string
 * with [`tsb_string_free`].
 *
 * # Safety
 * `summary` must be a live handle; `out` must be valid for one write.
 */
enum TsbStatus tsb_summary_to_csv(const struct TsbSummary *summary, char **out);

/**
 * # Safety
 * `summary` must be null or a handle not yet freed.
 */
void tsb_summary_free(struct TsbSummary *summary);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void tsb_string_free(char *s);

/**
 * Creates the experiment's policy for episode `stream_id`. Under a prior the
 * instance is drawn from that stream first, exactly as the simulator does,
 * so the policy's own draws line up with episode `stream_id`.
 *
 * # Safety
 * `experiment` must be a live handle; `out` must be valid for one write.
 */
enum TsbStatus tsb_policy_new(const struct TsbExperiment *experiment,
                              uint64_t stream_id,
                              struct TsbPolicy **out);

/**
 * Chooses the arm (zero-based) for the current round.
 *
 * # Safety
 * `policy` must be a live handle; `arm` must be valid for one write.
 */
enum TsbStatus tsb_policy_select(struct TsbPolicy *policy, size_t *arm);

/**
 * Records the reward of `arm` and advances to the next round.
 *
 * # Safety
 * `policy` must be a live handle.
 */
enum TsbStatus tsb_policy_observe(struct TsbPolicy *policy, size_t arm, double reward);

/**
 * Pull count of `arm` so far.
 *
 * # Safety
 * `policy` must be a live handle; `out` must be valid for one write.
 */
enum TsbStatus tsb_policy_pulls(const struct TsbPolicy *policy, size_t arm, uint64_t *out);

/**
 * # Safety
 * `policy` must be null or a handle not yet freed.
 */
void tsb_policy_free(struct TsbPolicy *policy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TSBANDIT_H */
