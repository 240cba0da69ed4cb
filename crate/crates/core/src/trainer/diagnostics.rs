//! Monitoring quantities: value ratio, Gibbs sweeps, chain mixing, mode coverage
//! and sample diversity.

use rand::Rng;

use crate::adversarial::{binarize_features, spins_to_tensor, BinarizeMode, Discriminator, Generator};
use crate::error::{Error, Result};
use crate::rbm::{GibbsChain, RbmParams, SpinBatch};
use crate::tensor::Tensor;
use crate::trainer::StepMetrics;

/// A window whose mean `E[log D(G(f))]` is within this of zero has no ratio.
pub const RATIO_EPS: f64 = 1e-9;

/// Ratio of windowed means, `mean(E[log D(x)]) / mean(E[log D(G(f))])`, over
/// consecutive non-overlapping windows (the last may be shorter).
/// `None` marks windows where the discriminator calls every fake real.
pub fn convergence_ratio(metrics: &[StepMetrics], window: usize) -> Result<Vec<Option<f64>>> {
    if window == 0 {
        return Err(Error::InvalidArgument("convergence_ratio window must be >= 1".into()));
    }
    Ok(metrics
        .chunks(window)
        .map(|w| {
            let n = w.len() as f64;
            let real = w.iter().map(|m| m.log_d_real).sum::<f64>() / n;
            let fake = w.iter().map(|m| m.log_d_fake).sum::<f64>() / n;
            if fake.abs() < RATIO_EPS {
                None
            } else {
                Some(real / fake)
            }
        })
        .collect())
}

/// Output of [`gibbs_sweep`].
#[derive(Clone, Debug)]
pub struct GibbsSweep {
    /// `rows × (max_steps + 1)` samples in row-major order: each row is the
    /// source image followed by the decodings after `1..=max_steps` sweeps.
    pub grid: Tensor,
    /// Visible states; `states[0]` is the clamped start, `states[s]` follows sweep `s`.
    pub states: Vec<SpinBatch>,
}

/// Clamps the chain's visible layer to binarized `F(real)`, then decodes the
/// visible state through `G` after each Gibbs sweep.
pub fn gibbs_sweep(
    real: &Tensor,
    rbm: &RbmParams,
    d: &Discriminator,
    g: &Generator,
    max_steps: usize,
    binarize: BinarizeMode,
    rng: &mut impl Rng,
) -> Result<GibbsSweep> {
    if max_steps == 0 {
        return Err(Error::InvalidArgument("gibbs_sweep needs max_steps >= 1".into()));
    }
    if !d.net.is_finite() || !g.net.is_finite() {
        return Err(Error::NonFinite {
            op: "gibbs_sweep",
            detail: "network parameters".into(),
        });
    }
    rbm.validate()?;
    real.ensure_finite("gibbs_sweep")?;
    let f = d.features(real)?;
    let start = binarize_features(&f, binarize, rng)?;
    let mut chain = GibbsChain::new(start.clone(), rbm.n_hidden);
    let rows = real.batch();
    let mut columns = vec![real.clone()];
    let mut states = vec![start];
    for _ in 0..max_steps {
        chain.step(rbm, rng)?;
        columns.push(g.forward(&spins_to_tensor(&chain.visible))?);
        states.push(chain.visible.clone());
    }
    let sample_len = real.sample_len();
    if columns[1].sample_len() != sample_len {
        return Err(Error::shape(
            "gibbs_sweep",
            format!("generator emits {:?}, images are {:?}", columns[1].shape(), real.shape()),
        ));
    }
    let mut data = Vec::with_capacity(rows * (max_steps + 1) * sample_len);
    for r in 0..rows {
        for c in &columns {
            data.extend_from_slice(c.sample(r));
        }
    }
    let mut shape = real.shape().to_vec();
    shape[0] = rows * (max_steps + 1);
    Ok(GibbsSweep {
        grid: Tensor::new(shape, data)?,
        states,
    })
}

/// Normalized autocorrelation of spin states for lags `0..=max_lag`.
///
/// Each unit's mean and variance are pooled over chains and steps; the lag-`ℓ`
/// value is the mean product of deviations `ℓ` steps apart divided by that
/// variance, averaged over units with non-zero variance. `None` when every
/// unit is constant.
pub fn feature_autocorrelation(states: &[SpinBatch], max_lag: usize) -> Result<Vec<Option<f64>>> {
    if states.len() < 2 {
        return Err(Error::InvalidArgument("feature_autocorrelation needs >= 2 recorded steps".into()));
    }
    if max_lag >= states.len() {
        return Err(Error::InvalidArgument(format!(
            "lag {max_lag} needs more than {} recorded steps",
            states.len()
        )));
    }
    let (rows, dim) = (states[0].rows(), states[0].dim());
    if states.iter().any(|s| s.rows() != rows || s.dim() != dim) {
        return Err(Error::shape("feature_autocorrelation", "recorded states differ in shape"));
    }
    let t_len = states.len();
    let count = (rows * t_len) as f64;
    let mut means = vec![0.0; dim];
    for s in states {
        for (u, &x) in s.data().iter().enumerate() {
            means[u % dim] += x as f64;
        }
    }
    means.iter_mut().for_each(|m| *m /= count);
    let mut vars = vec![0.0; dim];
    for s in states {
        for (u, &x) in s.data().iter().enumerate() {
            let d = x as f64 - means[u % dim];
            vars[u % dim] += d * d;
        }
    }
    vars.iter_mut().for_each(|v| *v /= count);
    let live: Vec<usize> = (0..dim).filter(|&u| vars[u] > 1e-12).collect();
    Ok((0..=max_lag)
        .map(|lag| {
            if live.is_empty() {
                return None;
            }
            let pairs = (rows * (t_len - lag)) as f64;
            let mut total = 0.0;
            for &u in &live {
                let mut acc = 0.0;
                for t in 0..t_len - lag {
                    let (a, b) = (&states[t], &states[t + lag]);
                    for r in 0..rows {
                        acc += (a.row(r)[u] as f64 - means[u]) * (b.row(r)[u] as f64 - means[u]);
                    }
                }
                total += acc / pairs / vars[u];
            }
            Some((total / live.len() as f64).clamp(-1.0, 1.0))
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeCoverage {
    /// Centers holding at least 1% of all samples.
    pub covered: usize,
    /// Samples assigned to each center.
    pub histogram: Vec<usize>,
    /// Samples farther than `radius` from every center.
    pub unassigned: usize,
}

/// Assigns each 2D point to its nearest center when within `radius`.
pub fn mode_coverage(samples: &Tensor, centers: &[[f64; 2]], radius: f64) -> Result<ModeCoverage> {
    if samples.shape().len() != 2 || samples.shape()[1] != 2 {
        return Err(Error::shape("mode_coverage", format!("expected [n, 2], got {:?}", samples.shape())));
    }
    let mut histogram = vec![0; centers.len()];
    let mut unassigned = 0;
    let n = samples.batch();
    for i in 0..n {
        let p = samples.sample(i);
        let nearest = centers
            .iter()
            .enumerate()
            .map(|(k, c)| (k, (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match nearest {
            Some((k, d2)) if d2.sqrt() <= radius => histogram[k] += 1,
            _ => unassigned += 1,
        }
    }
    let covered = histogram.iter().filter(|&&c| n > 0 && c * 100 >= n).count();
    Ok(ModeCoverage {
        covered,
        histogram,
        unassigned,
    })
}

/// Mean over pixels of the population variance across the batch.
pub fn sample_diversity(batch: &Tensor) -> Result<f64> {
    let n = batch.batch();
    if batch.shape().len() < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!("sample_diversity needs >= 2 samples, got shape {:?}", batch.shape())));
    }
    let len = batch.sample_len();
    let mut total = 0.0;
    for j in 0..len {
        let mean = (0..n).map(|i| batch.sample(i)[j]).sum::<f64>() / n as f64;
        let var = (0..n).map(|i| (batch.sample(i)[j] - mean).powi(2)).sum::<f64>() / n as f64;
        total += var;
    }
    Ok(total / len as f64)
}
