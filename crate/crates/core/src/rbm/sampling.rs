//! Block Gibbs sampling and contrastive divergence.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::optim::{sgd_momentum_step, MomentumConfig, MomentumState};
use crate::rbm::model::{sample_spins, RbmParams, SpinBatch};

/// State of a batch of alternating Gibbs chains.
///
/// `hidden` holds the most recent hidden sample; before the first step it is a
/// placeholder of all `+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsChain {
    pub visible: SpinBatch,
    pub hidden: SpinBatch,
    pub steps_taken: usize,
}

impl GibbsChain {
    pub fn new(visible: SpinBatch, n_hidden: usize) -> Self {
        let hidden = SpinBatch::filled(visible.rows(), n_hidden, 1);
        GibbsChain {
            visible,
            hidden,
            steps_taken: 0,
        }
    }

    /// One full sweep: `h ~ P(h|v)`, then `v ~ P(v|h)`.
    pub fn step(&mut self, params: &RbmParams, rng: &mut impl Rng) -> Result<()> {
        let ph = params.hidden_conditional(&self.visible)?;
        self.hidden = SpinBatch::new(self.visible.rows(), params.n_hidden, sample_spins(&ph, rng))?;
        let pv = params.visible_conditional(&self.hidden)?;
        self.visible = SpinBatch::new(self.visible.rows(), params.n_visible, sample_spins(&pv, rng))?;
        self.steps_taken += 1;
        Ok(())
    }
}

/// Sufficient statistics `⟨v hᵀ⟩`, `⟨v⟩`, `⟨h⟩`, shaped like [`RbmParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct RbmMoments {
    pub weights: Vec<f64>,
    pub visible: Vec<f64>,
    pub hidden: Vec<f64>,
}

impl RbmMoments {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        RbmMoments {
            weights: vec![0.0; n_visible * n_hidden],
            visible: vec![0.0; n_visible],
            hidden: vec![0.0; n_hidden],
        }
    }

    /// Batch mean of `v hᵀ`, `v`, `h` where `h` are hidden expectations (or spins).
    pub fn from_batch(visible: &SpinBatch, hidden: &[f64]) -> Self {
        let (nv, rows) = (visible.dim(), visible.rows());
        let nh = hidden.len() / rows.max(1);
        let mut m = RbmMoments::zeros(nv, nh);
        for r in 0..rows {
            let v = visible.row(r);
            let h = &hidden[r * nh..(r + 1) * nh];
            for (i, &vi) in v.iter().enumerate() {
                let vi = vi as f64;
                m.visible[i] += vi;
                for (w, &hj) in m.weights[i * nh..(i + 1) * nh].iter_mut().zip(h) {
                    *w += vi * hj;
                }
            }
            for (a, &hj) in m.hidden.iter_mut().zip(h) {
                *a += hj;
            }
        }
        let inv = 1.0 / rows as f64;
        m.scale(inv);
        m
    }

    pub fn scale(&mut self, s: f64) {
        self.weights
            .iter_mut()
            .chain(self.visible.iter_mut())
            .chain(self.hidden.iter_mut())
            .for_each(|x| *x *= s);
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.weights.clone();
        v.extend_from_slice(&self.visible);
        v.extend_from_slice(&self.hidden);
        v
    }
}

/// Log-likelihood gradient split into its data-driven and model-driven phases.
/// The ascent direction is `positive − negative`.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmGradients {
    pub positive: RbmMoments,
    pub negative: RbmMoments,
}

impl RbmGradients {
    pub fn combined(&self) -> RbmMoments {
        let sub = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect();
        RbmMoments {
            weights: sub(&self.positive.weights, &self.negative.weights),
            visible: sub(&self.positive.visible, &self.negative.visible),
            hidden: sub(&self.positive.hidden, &self.negative.hidden),
        }
    }
}

/// Positive phase with hidden expectations on clamped data.
pub fn positive_phase(batch: &SpinBatch, params: &RbmParams) -> Result<RbmMoments> {
    let h = params.hidden_expectation(batch)?;
    Ok(RbmMoments::from_batch(batch, &h))
}

/// CD-k: runs a `k`-sweep chain from the data and returns the gradient estimate
/// together with the final chain, whose visible states are the negative samples.
pub fn cd_k(
    batch: &SpinBatch,
    params: &RbmParams,
    k: usize,
    rng: &mut impl Rng,
) -> Result<(RbmGradients, GibbsChain)> {
    if k < 1 {
        return Err(Error::InvalidArgument("CD needs k >= 1 Gibbs steps".into()));
    }
    if batch.rows() == 0 {
        return Err(Error::InvalidArgument("CD on an empty batch".into()));
    }
    let positive = positive_phase(batch, params)?;
    let mut chain = GibbsChain::new(batch.clone(), params.n_hidden);
    for _ in 0..k {
        chain.step(params, rng)?;
    }
    let h_neg = params.hidden_expectation(&chain.visible)?;
    let negative = RbmMoments::from_batch(&chain.visible, &h_neg);
    Ok((RbmGradients { positive, negative }, chain))
}

/// An RBM with its SGD-momentum optimizer state.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmLearner {
    pub params: RbmParams,
    pub optimizer: MomentumConfig,
    pub state: MomentumState,
}

/// Output of one [`RbmLearner::cd_update`].
#[derive(Clone, Debug)]
pub struct CdStep {
    pub gradients: RbmGradients,
    /// Final chain state; `chain.visible` are the negative samples.
    pub chain: GibbsChain,
    /// Fraction of visible spins that differ between data and negatives.
    pub reconstruction_error: f64,
}

impl RbmLearner {
    pub fn new(params: RbmParams, optimizer: MomentumConfig) -> Self {
        let state = MomentumState::new(&params.buffer_sizes());
        RbmLearner {
            params,
            optimizer,
            state,
        }
    }

    /// Ascends the CD-k log-likelihood estimate by one momentum step.
    pub fn cd_update(&mut self, batch: &SpinBatch, k: usize, rng: &mut impl Rng) -> Result<CdStep> {
        let (gradients, chain) = cd_k(batch, &self.params, k, rng)?;
        let ascent = gradients.combined();
        let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<f64>>();
        let (gw, gb, gc) = (neg(&ascent.weights), neg(&ascent.visible), neg(&ascent.hidden));
        let [w, b, c] = self.params.buffers_mut();
        sgd_momentum_step(&mut [(w, &gw), (b, &gb), (c, &gc)], &self.optimizer, &mut self.state)?;
        let flipped = batch
            .data()
            .iter()
            .zip(chain.visible.data())
            .filter(|(a, b)| a != b)
            .count();
        Ok(CdStep {
            gradients,
            reconstruction_error: flipped as f64 / batch.data().len() as f64,
            chain,
        })
    }
}
