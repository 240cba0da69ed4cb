//! C ABI over `aan-core`.
//!
//! Every function returns an [`AanStatus`]. On failure the message is kept in
//! a thread-local buffer readable with [`aan_last_error_message`]. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aan_core::data::Checkpoint;
use aan_core::nn::MomentumConfig;
use aan_core::rbm::{exact_log_likelihood, exact_log_partition, sample_spins, GibbsChain, RbmLearner, RbmParams, SpinBatch};
use aan_core::trainer::rng_stream;
use aan_core::{Error, StepMetrics, TrainConfig, Trainer};
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    NonFinite = 4,
    Bound = 5,
    StepAborted = 6,
    Io = 7,
    Format = 8,
    Checksum = 9,
    Config = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Per-step monitoring values, mirroring one metrics CSV row.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AanStepMetrics {
    pub step: u64,
    pub log_d_real: f64,
    pub log_1m_d_fake: f64,
    pub log_d_fake: f64,
    pub ratio: f64,
    pub d_loss: f64,
    pub g_loss: f64,
    pub rbm_recon_error: f64,
    pub sample_diversity: f64,
}

impl From<StepMetrics> for AanStepMetrics {
    fn from(m: StepMetrics) -> Self {
        AanStepMetrics {
            step: m.step,
            log_d_real: m.log_d_real,
            log_1m_d_fake: m.log_1m_d_fake,
            log_d_fake: m.log_d_fake,
            ratio: m.ratio,
            d_loss: m.d_loss,
            g_loss: m.g_loss,
            rbm_recon_error: m.rbm_recon_error,
            sample_diversity: m.sample_diversity,
        }
    }
}

/// An Ising RBM with its momentum optimizer and a private random stream.
pub struct AanRbm {
    learner: RbmLearner,
    rng: ChaCha8Rng,
}

/// A training run.
pub struct AanTrainer {
    trainer: Trainer,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(AanStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Shape { .. } => AanStatus::Shape,
            Error::NonFinite { .. } => AanStatus::NonFinite,
            Error::InvalidArgument(_) => AanStatus::InvalidArgument,
            Error::Bound { .. } => AanStatus::Bound,
            Error::NonFiniteLoss { .. } => AanStatus::StepAborted,
            Error::Io { .. } => AanStatus::Io,
            Error::Format { .. } => AanStatus::Format,
            Error::Checksum { .. } => AanStatus::Checksum,
            Error::Config(_) => AanStatus::Config,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: AanStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AanStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (AanStatus::Ok, String::new()),
        Ok(Err(Failure(s, m))) => (s, m),
        Err(payload) => {
            let m = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (AanStatus::Panic, format!("panic: {m}"))
        }
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(AanStatus::NullPointer, format!("{name} is null")))
}

unsafe fn handle_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| fail(AanStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    handle_mut(p, name)
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(AanStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(AanStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(AanStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, need: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len < need {
        return Err(fail(AanStatus::BufferTooSmall, format!("{name} holds {len}, needs {need}")));
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(AanStatus::NullPointer, format!("{name} is null")));
    }
    Ok(&mut std::slice::from_raw_parts_mut(p, len)[..need])
}

fn spin_batch(spins: &[i8], rows: usize, dim: usize) -> Result<SpinBatch, Failure> {
    Ok(SpinBatch::new(rows, dim, spins.to_vec())?)
}

/// Copies the calling thread's last error message into `buf` with a trailing
/// NUL, truncating to `len`. Returns the full message length in bytes
/// excluding the NUL; 0 after a successful call.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn aan_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Creates an RBM with Gaussian weights (`init_std`) and zero biases, trained
/// with SGD momentum (`lr`, `momentum`). `seed` drives initialization and
/// every later sampling call on this handle.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aan_rbm_new(
    n_visible: usize,
    n_hidden: usize,
    init_std: f64,
    lr: f64,
    momentum: f64,
    seed: u64,
    out_rbm: *mut *mut AanRbm,
) -> AanStatus {
    guard(|| {
        let slot = out(out_rbm, "out_rbm")?;
        if !(init_std >= 0.0 && init_std.is_finite()) {
            return Err(fail(AanStatus::InvalidArgument, format!("init_std {init_std}")));
        }
        let mut rng = rng_stream(seed, 0);
        let params = if init_std == 0.0 {
            RbmParams::zeros(n_visible, n_hidden)?
        } else {
            RbmParams::gaussian(n_visible, n_hidden, init_std, &mut rng)?
        };
        let learner = RbmLearner::new(params, MomentumConfig { lr, momentum });
        *slot = Box::into_raw(Box::new(AanRbm { learner, rng }));
        Ok(())
    })
}

/// Releases an RBM. Null is ignored.
///
/// # Safety
/// `rbm` must come from [`aan_rbm_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aan_rbm_free(rbm: *mut AanRbm) {
    if !rbm.is_null() {
        drop(Box::from_raw(rbm));
    }
}

/// # Safety
/// `rbm` must be a live handle; output pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aan_rbm_dims(rbm: *const AanRbm, n_visible: *mut usize, n_hidden: *mut usize) -> AanStatus {
    guard(|| {
        let p = &handle(rbm, "rbm")?.learner.params;
        *out(n_visible, "n_visible")? = p.n_visible;
        *out(n_hidden, "n_hidden")? = p.n_hidden;
        Ok(())
    })
}

/// Copies the weights (`n_visible × n_hidden`, row-major) and biases out.
///
/// # Safety
/// Each buffer must be valid for its stated length.
#[no_mangle]
pub unsafe extern "C" fn aan_rbm_get_params(
    rbm: *const AanRbm,
    weights: *mut f64,
    weights_len: usize,
    visible_bias: *mut f64,
    visible_len: usize,
    hidden_bias: *mut f64,
    hidden_len: usize,
) -> AanStatus {
    guard(|| {
        let p = &handle(rbm, "rbm")?.learner.params;
        slice_mut(weights, weights_len, p.weights.len(), "weights")?.copy_from_slice(&p.weights);
        slice_mut(visible_bias, visible_len, p.n_visible, "visible_bias")?.copy_from_slice(&p.visible_bias);
        slice_mut(hidden_bias, hidden_len, p.n_hidden, "hidden_bias")?.copy_from_slice(&p.hidden_bias);
        Ok(())
    })
}

/// Replaces the parameters. Lengths must match the RBM exactly and every
/// value must be finite; on error the RBM is unchanged.
///
/// # Safety
/// Each buffer must be valid for its stated length.
#[no_mangle]
pub unsafe extern "C" fn aan_rbm_set_params(
    rbm: *mut AanRbm,
    weights: *const f64,
    weights_len: usize,
    visible_bias: *const f64,
    visible_len: usize,
    hidden_bias: *const f64,
    hidden_len: usize,
) -> AanStatus {
    guard(|| {
        let r = handle_mut(rbm, "rbm")?;
        let mut p = r.learner.params.clone();
        let (w, b, c) = (
            slice(weights, weights_len, "weights")?,
            slice(visible_bias, visible_len, "visible_bias")?,
            slice(hidden_bias, hidden_len, "hidden_bias")?,
        );
        if w.len() != p.weights.len() || b.len() != p.n_visible || c.len() != p.n_hidden {
            return Err(fail(
                AanStatus::Shape,
                format!("expected {}/{}/{} values, got {}/{}/{}", p.weights.len(), p.n_visible, p.n_hidden, w.len(), b.len(), c.len()),
            ));
        }
        p.weights.copy_from_slice(w);
        p.visible_bias.copy_from_slice(b);
        p.hidden_bias.copy_from_slice(c);
        p.validate()?;
        r.learner.params = p;
        Ok(())
    })
}

/// Exact `log Z` by enumeration; fails with `Bound` for large models.
///
/// # Safety
/// `rbm` must be a live handle and `log_z` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aan_rbm_log_partition(rbm: *const AanRbm, log_z: *mut f64) -> AanStatus {
    guard(|| {
        let r = handle(rbm, "rbm")?;
        *out(log_z, "log_z")? = exact_log_partition(&r.learner.params)?;
        Ok(())
    })
}

/// Exact mean log-likelihood of `rows` spin vectors (row-major, ±1 as `i8`).
///
/// # Safety
/// `spins` must hold `rows * n_visible` values; `mean_ll` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aan_rbm_log_likelihood(
    rbm: *const AanRbm,
    spins: *const i8,
    rows: usize,
    mean_ll: *mut f64,
) -> AanStatus {
    guard(|| {
        let r = handle(rbm, "rbm")?;
        let nv = r.learner.params.n_visible;
        let batch = spin_batch(slice(spins, rows * nv, "spins")?, rows, nv)?;
        *out(mean_ll, "mean_ll")? = exact_log_likelihood(&r.learner.params, &batch)?;
        Ok(())
    })
}

/// One CD-`k` momentum update on a batch. `recon_error` (nullable) receives
/// the fraction of visible spins the chain flipped.
///
/// # Safety
/// `spins` must hold `rows * n_visible` values; `recon_error` null or valid.
#[no_mangle]
pub unsafe extern "C" fn aan_rbm_cd_step(
    rbm: *mut AanRbm,
    spins: *const i8,
    rows: usize,
    k: usize,
    recon_error: *mut f64,
) -> AanStatus {
    guard(|| {
        let r = handle_mut(rbm, "rbm")?;
        let nv = r.learner.params.n_visible;
        let batch = spin_batch(slice(spins, rows * nv, "spins")?, rows, nv)?;
        let mut learner = r.learner.clone();
        let step = learner.cd_update(&batch, k, &mut r.rng)?;
        learner.params.validate()?;
        r.learner = learner;
        if let Some(e) = recon_error.as_mut() {
            *e = step.reconstruction_error;
        }
        Ok(())
    })
}

/// Runs `rows` independent Gibbs chains from uniform random spins for
/// `sweeps` sweeps and writes the visible states row-major.
///
/// # Safety
/// `out_spins` must be valid for `out_len` values.
#[no_mangle]
pub unsafe extern "C" fn aan_rbm_sample(
    rbm: *mut AanRbm,
    rows: usize,
    sweeps: usize,
    out_spins: *mut i8,
    out_len: usize,
) -> AanStatus {
    guard(|| {
        let r = handle_mut(rbm, "rbm")?;
        let (nv, nh) = (r.learner.params.n_visible, r.learner.params.n_hidden);
        let dst = slice_mut(out_spins, out_len, rows * nv, "out_spins")?;
        let start = sample_spins(&vec![0.5; rows * nv], &mut r.rng);
        let mut chain = GibbsChain::new(spin_batch(&start, rows, nv)?, nh);
        for _ in 0..sweeps {
            chain.step(&r.learner.params, &mut r.rng)?;
        }
        dst.copy_from_slice(chain.visible.data());
        Ok(())
    })
}

/// Builds a trainer from `key = value` configuration text (unset keys take
/// their defaults), loading its dataset.
///
/// # Safety
/// `config_text` must be a NUL-terminated string; `out_trainer` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aan_trainer_new(config_text: *const c_char, out_trainer: *mut *mut AanTrainer) -> AanStatus {
    guard(|| {
        let slot = out(out_trainer, "out_trainer")?;
        let cfg = TrainConfig::from_text(c_str(config_text, "config_text")?)?;
        *slot = Box::into_raw(Box::new(AanTrainer {
            trainer: Trainer::new(cfg)?,
        }));
        Ok(())
    })
}

/// Releases a trainer. Null is ignored.
///
/// # Safety
/// `trainer` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aan_trainer_free(trainer: *mut AanTrainer) {
    if !trainer.is_null() {
        drop(Box::from_raw(trainer));
    }
}

/// One joint training step. A `StepAborted` status means a loss went
/// non-finite and the trainer was left as it was before the call.
///
/// # Safety
/// `trainer` must be a live handle; `metrics` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aan_trainer_step(trainer: *mut AanTrainer, metrics: *mut AanStepMetrics) -> AanStatus {
    guard(|| {
        let t = handle_mut(trainer, "trainer")?;
        let m = t.trainer.step()?;
        if let Some(dst) = metrics.as_mut() {
            *dst = m.into();
        }
        Ok(())
    })
}

/// Number of completed steps.
///
/// # Safety
/// `trainer` must be a live handle; `step` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aan_trainer_step_count(trainer: *const AanTrainer, step: *mut u64) -> AanStatus {
    guard(|| {
        *out(step, "step")? = handle(trainer, "trainer")?.trainer.state.step;
        Ok(())
    })
}

/// Values per generated sample (pixels, or 2 for the toy dataset).
///
/// # Safety
/// `trainer` must be a live handle; `len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aan_trainer_sample_len(trainer: *const AanTrainer, len: *mut usize) -> AanStatus {
    guard(|| {
        *out(len, "len")? = handle(trainer, "trainer")?.trainer.train.samples.sample_len();
        Ok(())
    })
}

/// Writes `n` generator samples (`n * sample_len` values in [-1, 1]).
///
/// # Safety
/// `samples` must be valid for `samples_len` values.
#[no_mangle]
pub unsafe extern "C" fn aan_trainer_generate(
    trainer: *const AanTrainer,
    n: usize,
    seed: u64,
    samples: *mut f64,
    samples_len: usize,
) -> AanStatus {
    guard(|| {
        let t = handle(trainer, "trainer")?;
        let need = n * t.trainer.train.samples.sample_len();
        let dst = slice_mut(samples, samples_len, need, "samples")?;
        let x = t.trainer.generate(n, seed)?;
        dst.copy_from_slice(x.data());
        Ok(())
    })
}

/// # Safety
/// `trainer` must be a live handle; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn aan_trainer_save_checkpoint(trainer: *const AanTrainer, path: *const c_char) -> AanStatus {
    guard(|| {
        let t = handle(trainer, "trainer")?;
        t.trainer.checkpoint().save(c_str(path, "path")?)?;
        Ok(())
    })
}

/// Rebuilds a trainer from a checkpoint file.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out_trainer` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn aan_trainer_load_checkpoint(path: *const c_char, out_trainer: *mut *mut AanTrainer) -> AanStatus {
    guard(|| {
        let slot = out(out_trainer, "out_trainer")?;
        let ckpt = Checkpoint::load(c_str(path, "path")?)?;
        *slot = Box::into_raw(Box::new(AanTrainer {
            trainer: Trainer::from_checkpoint(&ckpt)?,
        }));
        Ok(())
    })
}
