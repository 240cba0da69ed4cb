//! Joint training of discriminator, generator and RBM, plus the plain GAN baseline.
//!
//! One step of `aan` mode, in order:
//!
//! 1. `f = F(real)`, binarized to spins;
//! 2. one CD-k momentum update of the RBM on those spins, keeping the chain's
//!    negative samples;
//! 3. `fake = G(negatives)`;
//! 4. one Adam update of `D` on real versus fake;
//! 5. one Adam update of `G` through the updated, frozen `D`.
//!
//! `gan` mode replaces steps 1–3 with `fake = G(noise)`. A failed step restores
//! the state it started from.

pub mod diagnostics;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversarial::{
    binarize_features, gan_losses, spins_to_tensor, Discriminator, GanLosses, Generator, NoiseKind, NoiseSource,
};
use crate::config::{GeneratorInput, LatentSource, TrainConfig, TrainMode};
use crate::data::{load_mnist_dir, make_toy2d, Checkpoint, Dataset, DatasetKind, Record, RngPosition};
use crate::error::{Error, Result};
use crate::nn::{adam_update, AdamState, Sequential};
use crate::rbm::{GibbsChain, RbmLearner, RbmParams, SpinBatch};
use crate::tensor::Tensor;

pub use diagnostics::{
    convergence_ratio, feature_autocorrelation, gibbs_sweep, mode_coverage, sample_diversity, GibbsSweep,
    ModeCoverage, RATIO_EPS,
};

/// Diversity below this counts toward the collapse streak.
pub const COLLAPSE_DIVERSITY: f64 = 1e-4;
/// Consecutive low-diversity steps that flag a run as collapsed.
pub const COLLAPSE_STEPS: u64 = 50;

pub const STREAM_INIT: u64 = 0;
pub const STREAM_DATA: u64 = 1;
pub const STREAM_LATENT: u64 = 2;
pub const STREAM_BINARIZE: u64 = 3;
pub const STREAM_CHAIN: u64 = 4;
pub const STREAM_EVAL: u64 = 5;
pub const STREAM_EVAL_NOISE: u64 = 6;

pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepMetrics {
    pub step: u64,
    /// `E[log D(x)]` on the evaluation batch.
    pub log_d_real: f64,
    /// `E[log(1 − D(G(f)))]` on the evaluation batch.
    pub log_1m_d_fake: f64,
    /// `E[log D(G(f))]` on the evaluation batch.
    pub log_d_fake: f64,
    /// `log_d_real / log_d_fake`.
    pub ratio: f64,
    /// Discriminator loss on the training batch, before its update.
    pub d_loss: f64,
    /// Generator loss on the training batch, against the updated discriminator.
    pub g_loss: f64,
    /// Fraction of visible spins the CD chain flipped; 0 when the RBM is idle.
    pub rbm_recon_error: f64,
    pub sample_diversity: f64,
}

impl StepMetrics {
    pub fn is_finite(&self) -> bool {
        [
            self.log_d_real,
            self.log_1m_d_fake,
            self.log_d_fake,
            self.ratio,
            self.d_loss,
            self.g_loss,
            self.rbm_recon_error,
            self.sample_diversity,
        ]
        .iter()
        .all(|x| x.is_finite())
    }
}

/// `E[log D(x)] / E[log D(G(f))]`; both are non-positive, and a zero
/// denominator is replaced by the smallest negative normal.
pub fn value_ratio(log_d_real: f64, log_d_fake: f64) -> f64 {
    log_d_real / log_d_fake.min(-f64::MIN_POSITIVE)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RngStreams {
    pub data: ChaCha8Rng,
    pub latent: ChaCha8Rng,
    pub binarize: ChaCha8Rng,
    pub chain: ChaCha8Rng,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        RngStreams {
            data: rng_stream(seed, STREAM_DATA),
            latent: rng_stream(seed, STREAM_LATENT),
            binarize: rng_stream(seed, STREAM_BINARIZE),
            chain: rng_stream(seed, STREAM_CHAIN),
        }
    }

    fn named(&self) -> [(&'static str, &ChaCha8Rng); 4] {
        [
            ("data", &self.data),
            ("latent", &self.latent),
            ("binarize", &self.binarize),
            ("chain", &self.chain),
        ]
    }

    pub fn positions(&self) -> Vec<RngPosition> {
        self.named()
            .iter()
            .map(|(name, r)| RngPosition {
                name: name.to_string(),
                seed: r.get_seed(),
                stream: r.get_stream(),
                word_pos: r.get_word_pos(),
            })
            .collect()
    }

    pub fn from_positions(positions: &[RngPosition]) -> Result<Self> {
        let get = |name: &str| -> Result<ChaCha8Rng> {
            let p = positions
                .iter()
                .find(|p| p.name == name)
                .ok_or_else(|| Error::Config(format!("checkpoint lacks rng stream '{name}'")))?;
            let mut r = ChaCha8Rng::from_seed(p.seed);
            r.set_stream(p.stream);
            r.set_word_pos(p.word_pos);
            Ok(r)
        };
        Ok(RngStreams {
            data: get("data")?,
            latent: get("latent")?,
            binarize: get("binarize")?,
            chain: get("chain")?,
        })
    }
}

/// Everything a training step mutates.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainState {
    pub d: Discriminator,
    pub g: Generator,
    pub rbm: RbmLearner,
    pub adam_d: AdamState,
    pub adam_g: AdamState,
    pub rngs: RngStreams,
    pub step: u64,
    pub collapse_streak: u64,
    pub collapse_flagged: bool,
}

impl TrainState {
    /// Fresh networks and RBM drawn from the init stream of `cfg.seed`.
    pub fn new(cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let mut init = rng_stream(cfg.seed, STREAM_INIT);
        let arch = cfg.arch();
        let d = Discriminator::build(&arch, &mut init)?;
        let g = Generator::build(&arch, &mut init)?;
        let params = RbmParams::gaussian(cfg.feature_dim, cfg.rbm_hidden, cfg.rbm_init_std, &mut init)?;
        Ok(TrainState {
            adam_d: AdamState::for_network(&d.net),
            adam_g: AdamState::for_network(&g.net),
            rbm: RbmLearner::new(params, cfg.momentum()),
            d,
            g,
            rngs: RngStreams::new(cfg.seed),
            step: 0,
            collapse_streak: 0,
            collapse_flagged: false,
        })
    }
}

/// Fixed batches the per-step value terms and diversity are measured on.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSet {
    pub real: Tensor,
    /// Generator input for `gan` mode and for `aan` with uniform spins.
    pub noise: Tensor,
}

impl EvalSet {
    pub fn new(cfg: &TrainConfig, real: Tensor) -> Self {
        let mut rng = rng_stream(cfg.seed, STREAM_EVAL_NOISE);
        let noise = noise_source(cfg).sample(real.batch(), &mut rng);
        EvalSet { real, noise }
    }
}

fn noise_source(cfg: &TrainConfig) -> NoiseSource {
    let kind = match cfg.mode {
        TrainMode::Gan => cfg.noise,
        TrainMode::Aan => NoiseKind::Spins,
    };
    NoiseSource {
        dim: cfg.feature_dim,
        kind,
    }
}

/// Runs `k` Gibbs sweeps from `start` and returns the generator input the
/// chain yields.
pub fn chain_generator_input(
    params: &RbmParams,
    start: SpinBatch,
    k: usize,
    input: GeneratorInput,
    rng: &mut impl Rng,
) -> Result<Tensor> {
    let mut chain = GibbsChain::new(start, params.n_hidden);
    for _ in 0..k {
        chain.step(params, rng)?;
    }
    chain_output(params, &chain, input)
}

fn chain_output(params: &RbmParams, chain: &GibbsChain, input: GeneratorInput) -> Result<Tensor> {
    match input {
        GeneratorInput::Spins => Ok(spins_to_tensor(&chain.visible)),
        GeneratorInput::Probabilities => Tensor::new(
            vec![chain.visible.rows(), chain.visible.dim()],
            params.visible_expectation(&chain.hidden)?,
        ),
    }
}

fn check_losses(l: &GanLosses) -> Result<()> {
    let terms = [
        ("E[log D(x)]", l.value.log_d_real),
        ("E[log(1 - D(G(f)))]", l.value.log_1m_d_fake),
        ("E[log D(G(f))]", l.value.log_d_fake),
        ("discriminator loss", l.d_loss),
        ("generator loss", l.g_loss),
    ];
    for (term, v) in terms {
        if !v.is_finite() {
            return Err(Error::NonFiniteLoss { term });
        }
    }
    Ok(())
}

fn check_net(net: &Sequential, term: &'static str) -> Result<()> {
    if net.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteLoss { term })
    }
}

/// Generator samples on the evaluation set, with the eval chain reseeded on
/// every call so monitoring noise does not depend on the step.
fn eval_fakes(state: &TrainState, eval: &EvalSet, cfg: &TrainConfig) -> Result<Tensor> {
    let input = match (cfg.mode, cfg.latent) {
        (TrainMode::Aan, LatentSource::Rbm) => {
            let mut rng = rng_stream(cfg.seed, STREAM_EVAL);
            let f = state.d.features(&eval.real)?;
            let spins = binarize_features(&f, cfg.binarize, &mut rng)?;
            chain_generator_input(&state.rbm.params, spins, cfg.cd_steps, cfg.generator_input, &mut rng)?
        }
        _ => eval.noise.clone(),
    };
    state.g.forward(&input)
}

/// Both updates after the fake batch exists: `D` on real versus fake, then `G`
/// through the updated `D`. Returns the pre-update losses and the generator
/// loss against the updated `D`.
fn adversarial_updates(
    state: &mut TrainState,
    real_trace: &crate::nn::Trace,
    g_input: &Tensor,
    cfg: &TrainConfig,
) -> Result<(f64, f64)> {
    let g_trace = state.g.forward_trace(g_input)?;
    let fake = g_trace.output().clone();
    let fake_trace = state.d.forward_trace(&fake)?;
    let losses = gan_losses(real_trace.output(), fake_trace.output(), cfg.g_mode)?;
    check_losses(&losses)?;

    let adam = cfg.adam();
    state.d.net.zero_grad();
    state.d.net.backward(real_trace, &losses.d_grad_real)?;
    state.d.net.backward(&fake_trace, &losses.d_grad_fake)?;
    adam_update(&mut state.d.net, &adam, &mut state.adam_d)?;
    check_net(&state.d.net, "discriminator parameters")?;

    let fake_trace = state.d.forward_trace(&fake)?;
    let g_losses = gan_losses(fake_trace.output(), fake_trace.output(), cfg.g_mode)?;
    check_losses(&g_losses)?;
    let grad_fake = state.d.net.backward(&fake_trace, &g_losses.g_grad_fake)?;
    state.d.net.zero_grad();
    state.g.net.zero_grad();
    state.g.net.backward(&g_trace, &grad_fake)?;
    adam_update(&mut state.g.net, &adam, &mut state.adam_g)?;
    state.g.net.zero_grad();
    check_net(&state.g.net, "generator parameters")?;
    Ok((losses.d_loss, g_losses.g_loss))
}

fn finish_step(
    state: &mut TrainState,
    eval: &EvalSet,
    cfg: &TrainConfig,
    d_loss: f64,
    g_loss: f64,
    rbm_recon_error: f64,
) -> Result<StepMetrics> {
    let fakes = eval_fakes(state, eval, cfg)?;
    let real_logits = state.d.forward(&eval.real)?.logits;
    let fake_logits = state.d.forward(&fakes)?.logits;
    let l = gan_losses(&real_logits, &fake_logits, cfg.g_mode)?;
    check_losses(&l)?;
    let diversity = sample_diversity(&fakes)?;
    state.step += 1;
    if diversity < COLLAPSE_DIVERSITY {
        state.collapse_streak += 1;
        if state.collapse_streak >= COLLAPSE_STEPS {
            state.collapse_flagged = true;
        }
    } else {
        state.collapse_streak = 0;
    }
    let m = StepMetrics {
        step: state.step,
        log_d_real: l.value.log_d_real,
        log_1m_d_fake: l.value.log_1m_d_fake,
        log_d_fake: l.value.log_d_fake,
        ratio: value_ratio(l.value.log_d_real, l.value.log_d_fake),
        d_loss,
        g_loss,
        rbm_recon_error,
        sample_diversity: diversity,
    };
    if !m.is_finite() {
        return Err(Error::NonFiniteLoss { term: "step metrics" });
    }
    Ok(m)
}

fn check_batch(state: &TrainState, batch: &Tensor) -> Result<()> {
    if batch.batch() < 2 {
        return Err(Error::InvalidArgument(format!("training batch of {} samples", batch.batch())));
    }
    if batch.data().iter().any(|x| !(x.abs() <= 1.0)) {
        return Err(Error::InvalidArgument("training batch has values outside [-1, 1]".into()));
    }
    if batch.shape()[1..] != state.d.sample_shape[..] {
        return Err(Error::shape(
            "train_step",
            format!("batch {:?}, expected [n, {:?}]", batch.shape(), state.d.sample_shape),
        ));
    }
    Ok(())
}

fn with_rollback(state: &mut TrainState, f: impl FnOnce(&mut TrainState) -> Result<StepMetrics>) -> Result<StepMetrics> {
    let snapshot = state.clone();
    let out = f(state);
    if out.is_err() {
        *state = snapshot;
    }
    out
}

/// One joint step of discriminator, RBM and generator.
pub fn aan_train_step(state: &mut TrainState, batch: &Tensor, eval: &EvalSet, cfg: &TrainConfig) -> Result<StepMetrics> {
    check_batch(state, batch)?;
    with_rollback(state, |s| {
        let real_trace = s.d.forward_trace(batch)?;
        let (g_input, recon) = match cfg.latent {
            LatentSource::Rbm => {
                let f = &real_trace.activations[s.d.split_index];
                let spins = binarize_features(f, cfg.binarize, &mut s.rngs.binarize)?;
                let before = s.rbm.params.clone();
                let cd = s.rbm.cd_update(&spins, cfg.cd_steps, &mut s.rngs.chain)?;
                s.rbm.params.validate().map_err(|_| Error::NonFiniteLoss { term: "RBM parameters" })?;
                (chain_output(&before, &cd.chain, cfg.generator_input)?, cd.reconstruction_error)
            }
            LatentSource::UniformSpins => {
                let noise = NoiseSource {
                    dim: cfg.feature_dim,
                    kind: NoiseKind::Spins,
                };
                (noise.sample(batch.batch(), &mut s.rngs.latent), 0.0)
            }
        };
        let (d_loss, g_loss) = adversarial_updates(s, &real_trace, &g_input, cfg)?;
        finish_step(s, eval, cfg, d_loss, g_loss, recon)
    })
}

/// One step of the baseline GAN with `noise` as generator input; the RBM is untouched.
pub fn gan_train_step(
    state: &mut TrainState,
    noise: &NoiseSource,
    batch: &Tensor,
    eval: &EvalSet,
    cfg: &TrainConfig,
) -> Result<StepMetrics> {
    check_batch(state, batch)?;
    with_rollback(state, |s| {
        let real_trace = s.d.forward_trace(batch)?;
        let g_input = noise.sample(batch.batch(), &mut s.rngs.latent);
        let (d_loss, g_loss) = adversarial_updates(s, &real_trace, &g_input, cfg)?;
        finish_step(s, eval, cfg, d_loss, g_loss, 0.0)
    })
}

/// Loads the dataset named by `cfg` and splits off the held-out tail.
pub fn load_dataset(cfg: &TrainConfig) -> Result<(Dataset, Option<Dataset>)> {
    let full = match cfg.dataset {
        DatasetKind::Toy2d => make_toy2d(&cfg.toy2d())?,
        DatasetKind::Mnist => load_mnist_dir(&cfg.mnist_dir)?,
    };
    if cfg.heldout_fraction == 0.0 {
        return Ok((full, None));
    }
    let (train, heldout) = full.split_heldout(cfg.heldout_fraction)?;
    Ok((train, Some(heldout)))
}

/// A training run: configuration, data, and mutable state.
#[derive(Clone, Debug)]
pub struct Trainer {
    pub config: TrainConfig,
    pub state: TrainState,
    pub train: Dataset,
    pub heldout: Option<Dataset>,
    pub eval: EvalSet,
}

impl Trainer {
    pub fn new(config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let (train, heldout) = load_dataset(&config)?;
        Trainer::with_data(config, train, heldout)
    }

    /// Evaluation reals are the first `eval_batch` held-out samples, or
    /// training samples when nothing is held out.
    pub fn with_data(config: TrainConfig, train: Dataset, heldout: Option<Dataset>) -> Result<Self> {
        config.validate()?;
        if train.len() < 2 {
            return Err(Error::InvalidArgument(format!("training set of {} samples", train.len())));
        }
        let state = TrainState::new(&config)?;
        let source = heldout.as_ref().unwrap_or(&train);
        let n = config.eval_batch.min(source.len());
        if n < 2 {
            return Err(Error::InvalidArgument(format!("evaluation set of {n} samples")));
        }
        let eval = EvalSet::new(&config, source.samples.slice_batch(0, n));
        Ok(Trainer {
            config,
            state,
            train,
            heldout,
            eval,
        })
    }

    /// Draws `batch_size` training indices with replacement from the data stream.
    pub fn next_batch(&mut self) -> Tensor {
        let n = self.train.len();
        let idx: Vec<usize> = (0..self.config.batch_size)
            .map(|_| self.state.rngs.data.random_range(0..n))
            .collect();
        self.train.samples.select(&idx)
    }

    pub fn step(&mut self) -> Result<StepMetrics> {
        let before = self.state.rngs.data.clone();
        let batch = self.next_batch();
        let out = match self.config.mode {
            TrainMode::Aan => aan_train_step(&mut self.state, &batch, &self.eval, &self.config),
            TrainMode::Gan => {
                let noise = noise_source(&self.config);
                gan_train_step(&mut self.state, &noise, &batch, &self.eval, &self.config)
            }
        };
        if out.is_err() {
            self.state.rngs.data = before;
        }
        out
    }

    /// Generator samples; `aan` chains start from binarized features of
    /// training samples and run `cd_steps` sweeps, as during training.
    pub fn generate(&self, n: usize, seed: u64) -> Result<Tensor> {
        if n == 0 {
            return Err(Error::InvalidArgument("generate needs n >= 1".into()));
        }
        let cfg = &self.config;
        let mut rng = rng_stream(seed, STREAM_LATENT);
        let input = match (cfg.mode, cfg.latent) {
            (TrainMode::Aan, LatentSource::Rbm) => {
                let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..self.train.len())).collect();
                let f = self.state.d.features(&self.train.samples.select(&idx))?;
                let spins = binarize_features(&f, cfg.binarize, &mut rng)?;
                chain_generator_input(&self.state.rbm.params, spins, cfg.cd_steps, cfg.generator_input, &mut rng)?
            }
            _ => noise_source(cfg).sample(n, &mut rng),
        };
        self.state.g.forward(&input)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let s = &self.state;
        let mut records = Vec::new();
        push_net(&mut records, "d", &s.d.net);
        push_net(&mut records, "g", &s.g.net);
        push_adam(&mut records, "adam_d", &s.adam_d);
        push_adam(&mut records, "adam_g", &s.adam_g);
        let p = &s.rbm.params;
        records.push(Record::new("rbm.weights", vec![p.n_visible, p.n_hidden], p.weights.clone()));
        records.push(Record::new("rbm.visible_bias", vec![p.n_visible], p.visible_bias.clone()));
        records.push(Record::new("rbm.hidden_bias", vec![p.n_hidden], p.hidden_bias.clone()));
        for (i, v) in s.rbm.state.velocity.iter().enumerate() {
            records.push(Record::new(format!("rbm.velocity.{i}"), vec![v.len()], v.clone()));
        }
        records.push(Record::scalar("rbm.step", s.rbm.state.step as f64));
        records.push(Record::scalar("trainer.collapse_streak", s.collapse_streak as f64));
        records.push(Record::scalar("trainer.collapse_flagged", f64::from(u8::from(s.collapse_flagged))));
        Checkpoint {
            step: s.step,
            records,
            config: self.config.to_text(),
            rngs: s.rngs.positions(),
        }
    }

    /// Rebuilds a trainer from a checkpoint, reloading data named by its config.
    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let config = TrainConfig::from_text(&ckpt.config)?;
        let mut t = Trainer::new(config)?;
        t.restore(ckpt)?;
        Ok(t)
    }

    /// Overwrites the state with a checkpoint taken under the same configuration;
    /// only `steps` and `checkpoint_every` may differ.
    pub fn restore(&mut self, ckpt: &Checkpoint) -> Result<()> {
        let mut config = TrainConfig::from_text(&ckpt.config)?;
        config.steps = self.config.steps;
        config.checkpoint_every = self.config.checkpoint_every;
        if config != self.config {
            return Err(Error::Config("checkpoint configuration differs from this trainer's".into()));
        }
        let mut s = self.state.clone();
        load_net(ckpt, "d", &mut s.d.net)?;
        load_net(ckpt, "g", &mut s.g.net)?;
        load_adam(ckpt, "adam_d", &mut s.adam_d)?;
        load_adam(ckpt, "adam_g", &mut s.adam_g)?;
        let p = &mut s.rbm.params;
        copy_record(ckpt, "rbm.weights", &mut p.weights)?;
        copy_record(ckpt, "rbm.visible_bias", &mut p.visible_bias)?;
        copy_record(ckpt, "rbm.hidden_bias", &mut p.hidden_bias)?;
        for (i, v) in s.rbm.state.velocity.iter_mut().enumerate() {
            copy_record(ckpt, &format!("rbm.velocity.{i}"), v)?;
        }
        s.rbm.state.step = scalar(ckpt, "rbm.step")? as u64;
        s.collapse_streak = scalar(ckpt, "trainer.collapse_streak")? as u64;
        s.collapse_flagged = scalar(ckpt, "trainer.collapse_flagged")? != 0.0;
        s.rngs = RngStreams::from_positions(&ckpt.rngs)?;
        s.step = ckpt.step;
        self.state = s;
        Ok(())
    }
}

fn push_net(records: &mut Vec<Record>, prefix: &str, net: &Sequential) {
    for (i, (p, _)) in net.params().iter().enumerate() {
        records.push(Record::new(format!("{prefix}.{i}"), p.shape().to_vec(), p.data().to_vec()));
    }
}

fn push_adam(records: &mut Vec<Record>, prefix: &str, st: &AdamState) {
    for (i, (m, v)) in st.first_moment.iter().zip(&st.second_moment).enumerate() {
        records.push(Record::new(format!("{prefix}.m.{i}"), vec![m.len()], m.clone()));
        records.push(Record::new(format!("{prefix}.v.{i}"), vec![v.len()], v.clone()));
    }
    records.push(Record::scalar(format!("{prefix}.step"), st.step as f64));
}

fn record<'a>(ckpt: &'a Checkpoint, name: &str) -> Result<&'a Record> {
    ckpt.record(name)
        .ok_or_else(|| Error::Config(format!("checkpoint lacks record '{name}'")))
}

fn copy_record(ckpt: &Checkpoint, name: &str, dst: &mut [f64]) -> Result<()> {
    let r = record(ckpt, name)?;
    if r.data.len() != dst.len() {
        return Err(Error::shape(
            "checkpoint",
            format!("record '{name}' holds {} values, model expects {}", r.data.len(), dst.len()),
        ));
    }
    dst.copy_from_slice(&r.data);
    Ok(())
}

fn scalar(ckpt: &Checkpoint, name: &str) -> Result<f64> {
    let r = record(ckpt, name)?;
    r.data
        .first()
        .copied()
        .ok_or_else(|| Error::shape("checkpoint", format!("record '{name}' is empty")))
}

fn load_net(ckpt: &Checkpoint, prefix: &str, net: &mut Sequential) -> Result<()> {
    for (i, (p, _)) in net.params_mut().into_iter().enumerate() {
        let name = format!("{prefix}.{i}");
        if record(ckpt, &name)?.shape != p.shape() {
            return Err(Error::shape("checkpoint", format!("record '{name}' shape differs from model")));
        }
        copy_record(ckpt, &name, p.data_mut())?;
    }
    Ok(())
}

fn load_adam(ckpt: &Checkpoint, prefix: &str, st: &mut AdamState) -> Result<()> {
    for (i, (m, v)) in st.first_moment.iter_mut().zip(st.second_moment.iter_mut()).enumerate() {
        copy_record(ckpt, &format!("{prefix}.m.{i}"), m)?;
        copy_record(ckpt, &format!("{prefix}.v.{i}"), v)?;
    }
    st.step = scalar(ckpt, &format!("{prefix}.step"))? as u64;
    Ok(())
}
