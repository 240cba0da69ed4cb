#ifndef AAN_H
#define AAN_H

#include <stddef.h>
#include <stdint.h>

typedef enum AanStatus {
  AAN_STATUS_OK = 0,
  AAN_STATUS_NULL_POINTER = 1,
  AAN_STATUS_INVALID_ARGUMENT = 2,
  AAN_STATUS_SHAPE = 3,
  AAN_STATUS_NON_FINITE = 4,
  AAN_STATUS_BOUND = 5,
  AAN_STATUS_STEP_ABORTED = 6,
  AAN_STATUS_IO = 7,
  AAN_STATUS_FORMAT = 8,
  AAN_STATUS_CHECKSUM = 9,
  AAN_STATUS_CONFIG = 10,
  AAN_STATUS_BUFFER_TOO_SMALL = 11,
  AAN_STATUS_PANIC = 12,
} AanStatus;

// An Ising RBM with its momentum optimizer and a private random stream.
typedef struct AanRbm AanRbm;

// A training run.
typedef struct AanTrainer AanTrainer;

// Per-step monitoring values, mirroring one metrics CSV row.
typedef struct AanStepMetrics {
  uint64_t step;
  double log_d_real;
  double log_1m_d_fake;
  double log_d_fake;
  double ratio;
  double d_loss;
  double g_loss;
  double rbm_recon_error;
  double sample_diversity;
} AanStepMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` with a trailing
// NUL, truncating to `len`. Returns the full message length in bytes
// excluding the NUL; 0 after a successful call.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t aan_last_error_message(char *buf, size_t len);

// Creates an RBM with Gaussian weights (`init_std`) and zero biases, trained
// with SGD momentum (`lr`, `momentum`). `seed` drives initialization and
// every later sampling call on this handle.
//
// # Safety
// `out` must be valid for writes.
enum AanStatus aan_rbm_new(size_t n_visible,
                           size_t n_hidden,
                           double init_std,
                           double lr,
                           double momentum,
                           uint64_t seed,
                           struct AanRbm **out_rbm);

// Releases an RBM. Null is ignored.
//
// # Safety
// `rbm` must come from [`aan_rbm_new`] and not be used afterwards.
void aan_rbm_free(struct AanRbm *rbm);

// # Safety
// `rbm` must be a live handle; output pointers must be valid for writes.
enum AanStatus aan_rbm_dims(const struct AanRbm *rbm, size_t *n_visible, size_t *n_hidden);

// Copies the weights (`n_visible × n_hidden`, row-major) and biases out.
//
// # Safety
// Each buffer must be valid for its stated length.
enum AanStatus aan_rbm_get_params(const struct AanRbm *rbm,
                                  double *weights,
                                  size_t weights_len,
                                  double *visible_bias,
                                  size_t visible_len,
                                  double *hidden_bias,
                                  size_t hidden_len);

// Replaces the parameters. Lengths must match the RBM exactly and every
// value must be finite; on error the RBM is unchanged.
//
// # Safety
// Each buffer must be valid for its stated length.
enum AanStatus aan_rbm_set_params(struct AanRbm *rbm,
                                  const double *weights,
                                  size_t weights_len,
                                  const double *visible_bias,
                                  size_t visible_len,
                                  const double *hidden_bias,
                                  size_t hidden_len);

// Exact `log Z` by enumeration; fails with `Bound` for large models.
//
// # Safety
// `rbm` must be a live handle and `log_z` valid for writes.
enum AanStatus aan_rbm_log_partition(const struct AanRbm *rbm, double *log_z);

// Exact mean log-likelihood of `rows` spin vectors (row-major, ±1 as `i8`).
//
// # Safety
// `spins` must hold `rows * n_visible` values; `mean_ll` valid for writes.
enum AanStatus aan_rbm_log_likelihood(const struct AanRbm *rbm,
                                      const int8_t *spins,
                                      size_t rows,
                                      double *mean_ll);

// One CD-`k` momentum update on a batch. `recon_error` (nullable) receives
// the fraction of visible spins the chain flipped.
//
// # Safety
// `spins` must hold `rows * n_visible` values; `recon_error` null or valid.
enum AanStatus aan_rbm_cd_step(struct AanRbm *rbm,
                               const int8_t *spins,
                               size_t rows,
                               size_t k,
                               double *recon_error);

// Runs `rows` independent Gibbs chains from uniform random spins for
// `sweeps` sweeps and writes the visible states row-major.
//
// # Safety
// `out_spins` must be valid for `out_len` values.
enum AanStatus aan_rbm_sample(struct AanRbm *rbm,
                              size_t rows,
                              size_t sweeps,
                              int8_t *out_spins,
                              size_t out_len);

// Builds a trainer from `key = value` configuration text (unset keys take
// their defaults), loading its dataset.
//
// # Safety
// `config_text` must be a NUL-terminated string; `out_trainer` valid for writes.
enum AanStatus aan_trainer_new(const char *config_text, struct AanTrainer **out_trainer);

// Releases a trainer. Null is ignored.
//
// # Safety
// `trainer` must come from this library and not be used afterwards.
void aan_trainer_free(struct AanTrainer *trainer);

// One joint training step. A `StepAborted` status means a loss went
// non-finite and the trainer was left as it was before the call.
//
// # Safety
// `trainer` must be a live handle; `metrics` null or valid for writes.
enum AanStatus aan_trainer_step(struct AanTrainer *trainer, struct AanStepMetrics *metrics);

// Number of completed steps.
//
// # Safety
// `trainer` must be a live handle; `step` valid for writes.
enum AanStatus aan_trainer_step_count(const struct AanTrainer *trainer, uint64_t *step);

// Values per generated sample (pixels, or 2 for the toy dataset).
//
// # Safety
// `trainer` must be a live handle; `len` valid for writes.
enum AanStatus aan_trainer_sample_len(const struct AanTrainer *trainer, size_t *len);

// Writes `n` generator samples (`n * sample_len` values in [-1, 1]).
//
// # Safety
// `samples` must be valid for `samples_len` values.
enum AanStatus aan_trainer_generate(const struct AanTrainer *trainer,
                                    size_t n,
                                    uint64_t seed,
                                    double *samples,
                                    size_t samples_len);

// # Safety
// `trainer` must be a live handle; `path` a NUL-terminated UTF-8 string.
enum AanStatus aan_trainer_save_checkpoint(const struct AanTrainer *trainer, const char *path);

// Rebuilds a trainer from a checkpoint file.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out_trainer` valid for writes.
enum AanStatus aan_trainer_load_checkpoint(const char *path, struct AanTrainer **out_trainer);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AAN_H */
