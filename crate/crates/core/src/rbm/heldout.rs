//! Exact held-out likelihood tracking for CD training on small RBMs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::MomentumConfig;
use crate::rbm::exact::exact_log_likelihood;
use crate::rbm::model::{RbmParams, SpinBatch, DEFAULT_INIT_STD};
use crate::rbm::sampling::RbmLearner;

/// Noisy copies of random prototype patterns: each sample picks a prototype
/// uniformly and flips every spin independently with probability `flip`.
pub fn prototype_spins(prototypes: &SpinBatch, flip: f64, n: usize, rng: &mut impl Rng) -> Result<SpinBatch> {
    if !(0.0..=1.0).contains(&flip) || prototypes.rows() == 0 {
        return Err(Error::InvalidArgument(format!(
            "prototype_spins needs flip in [0, 1] and prototypes (flip {flip}, {} prototypes)",
            prototypes.rows()
        )));
    }
    let dim = prototypes.dim();
    let mut data = Vec::with_capacity(n * dim);
    for _ in 0..n {
        let p = prototypes.row(rng.random_range(0..prototypes.rows()));
        data.extend(p.iter().map(|&s| if rng.random::<f64>() < flip { -s } else { s }));
    }
    SpinBatch::new(n, dim, data)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeldoutConfig {
    pub n_visible: usize,
    pub n_hidden: usize,
    pub steps: usize,
    pub cd_steps: usize,
    pub batch_size: usize,
    pub optimizer: MomentumConfig,
    pub init_std: f64,
    pub prototypes: usize,
    pub flip: f64,
    pub train_size: usize,
    pub heldout_size: usize,
    /// Record the held-out likelihood every this many steps (and at the end).
    pub eval_every: usize,
    pub seed: u64,
}

impl Default for HeldoutConfig {
    fn default() -> Self {
        HeldoutConfig {
            n_visible: 6,
            n_hidden: 4,
            steps: 2000,
            cd_steps: 2,
            batch_size: 256,
            optimizer: MomentumConfig::default(),
            init_std: DEFAULT_INIT_STD,
            prototypes: 2,
            flip: 0.1,
            train_size: 2000,
            heldout_size: 1000,
            eval_every: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeldoutRun {
    /// Mean held-out log-likelihood at initialization.
    pub initial: f64,
    pub last: f64,
    /// `(step, held-out log-likelihood)` including step 0 and the final step.
    pub trace: Vec<(usize, f64)>,
    pub params: RbmParams,
}

/// Trains an RBM with CD-k on mini-batches drawn with replacement from a
/// prototype dataset, tracking the exact held-out log-likelihood.
pub fn train_heldout(cfg: &HeldoutConfig) -> Result<HeldoutRun> {
    if cfg.batch_size == 0 || cfg.train_size == 0 || cfg.heldout_size == 0 || cfg.eval_every == 0 {
        return Err(Error::InvalidArgument("held-out run sizes must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let protos: Vec<i8> = (0..cfg.prototypes * cfg.n_visible)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let protos = SpinBatch::new(cfg.prototypes, cfg.n_visible, protos)?;
    let train = prototype_spins(&protos, cfg.flip, cfg.train_size, &mut rng)?;
    let heldout = prototype_spins(&protos, cfg.flip, cfg.heldout_size, &mut rng)?;
    let params = RbmParams::gaussian(cfg.n_visible, cfg.n_hidden, cfg.init_std, &mut rng)?;
    let mut learner = RbmLearner::new(params, cfg.optimizer);
    let initial = exact_log_likelihood(&learner.params, &heldout)?;
    let mut trace = vec![(0, initial)];
    for step in 1..=cfg.steps {
        let idx: Vec<usize> = (0..cfg.batch_size).map(|_| rng.random_range(0..cfg.train_size)).collect();
        learner.cd_update(&train.select(&idx), cfg.cd_steps, &mut rng)?;
        if step % cfg.eval_every == 0 || step == cfg.steps {
            trace.push((step, exact_log_likelihood(&learner.params, &heldout)?));
        }
    }
    Ok(HeldoutRun {
        initial,
        last: trace.last().map(|t| t.1).unwrap_or(initial),
        trace,
        params: learner.params,
    })
}
