//! Exact quantities by brute-force enumeration of spin configurations.
//!
//! These are test oracles and small-instance evaluators: every sum here runs
//! over explicit states and never uses the closed-form conditionals.

use crate::error::{Error, Result};
use crate::rbm::model::{RbmParams, SpinBatch};
use crate::rbm::sampling::{RbmGradients, RbmMoments};

/// Largest `n_visible + n_hidden` accepted for full joint enumeration.
pub const MAX_JOINT_UNITS: usize = 24;
/// Largest `n_hidden` accepted for marginalizing the hidden layer.
pub const MAX_HIDDEN_UNITS: usize = 20;

/// Spin configuration encoded by the low `n` bits of `bits` (bit set → +1).
pub fn spins_from_bits(bits: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn bits_from_spins(spins: &[i8]) -> u64 {
    spins
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &s)| if s == 1 { acc | 1 << i } else { acc })
}

pub(crate) fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn check_joint(p: &RbmParams) -> Result<()> {
    p.validate()?;
    let total = p.n_visible + p.n_hidden;
    if total > MAX_JOINT_UNITS {
        return Err(Error::Bound {
            what: "n_visible + n_hidden",
            limit: MAX_JOINT_UNITS,
            got: total,
        });
    }
    Ok(())
}

fn check_hidden(p: &RbmParams) -> Result<()> {
    p.validate()?;
    if p.n_hidden > MAX_HIDDEN_UNITS {
        return Err(Error::Bound {
            what: "n_hidden",
            limit: MAX_HIDDEN_UNITS,
            got: p.n_hidden,
        });
    }
    Ok(())
}

fn hidden_states(p: &RbmParams) -> Vec<Vec<i8>> {
    (0..1u64 << p.n_hidden).map(|b| spins_from_bits(b, p.n_hidden)).collect()
}

/// `log Z` by log-sum-exp over all `2^(n_v + n_h)` joint states.
pub fn exact_log_partition(p: &RbmParams) -> Result<f64> {
    check_joint(p)?;
    let hs = hidden_states(p);
    let mut terms = Vec::with_capacity(1 << (p.n_visible + p.n_hidden));
    for vb in 0..1u64 << p.n_visible {
        let v = spins_from_bits(vb, p.n_visible);
        for h in &hs {
            terms.push(-p.energy_unchecked(&v, h));
        }
    }
    Ok(log_sum_exp(terms))
}

/// `log Σ_h e^{−E(v,h)}` by enumerating hidden states.
pub fn log_unnormalized_marginal(p: &RbmParams, v: &[i8]) -> Result<f64> {
    check_hidden(p)?;
    if v.len() != p.n_visible {
        return Err(Error::shape("rbm", format!("visible state of length {}", v.len())));
    }
    Ok(log_sum_exp(hidden_states(p).iter().map(|h| -p.energy_unchecked(v, h))))
}

/// Mean `log P(v)` over a batch of visible states.
pub fn exact_log_likelihood(p: &RbmParams, data: &SpinBatch) -> Result<f64> {
    check_hidden(p)?;
    let log_z = exact_log_partition(p)?;
    mean_log_likelihood_with(p, data, log_z)
}

fn mean_log_likelihood_with(p: &RbmParams, data: &SpinBatch, log_z: f64) -> Result<f64> {
    if data.dim() != p.n_visible || data.rows() == 0 {
        return Err(Error::shape(
            "exact_log_likelihood",
            format!("data is {}x{}, RBM has {} visible units", data.rows(), data.dim(), p.n_visible),
        ));
    }
    let mut total = 0.0;
    for r in 0..data.rows() {
        total += log_unnormalized_marginal(p, data.row(r))? - log_z;
    }
    Ok(total / data.rows() as f64)
}

/// Normalized joint distribution indexed by `(v_bits << n_hidden) | h_bits`.
pub fn exact_joint_distribution(p: &RbmParams) -> Result<Vec<f64>> {
    let log_z = exact_log_partition(p)?;
    let hs = hidden_states(p);
    let mut probs = Vec::with_capacity(1 << (p.n_visible + p.n_hidden));
    for vb in 0..1u64 << p.n_visible {
        let v = spins_from_bits(vb, p.n_visible);
        for h in &hs {
            probs.push((-p.energy_unchecked(&v, h) - log_z).exp());
        }
    }
    Ok(probs)
}

/// Marginal `P(v)` for every visible configuration, indexed by `v_bits`.
pub fn exact_visible_marginals(p: &RbmParams) -> Result<Vec<f64>> {
    let log_z = exact_log_partition(p)?;
    (0..1u64 << p.n_visible)
        .map(|vb| Ok((log_unnormalized_marginal(p, &spins_from_bits(vb, p.n_visible))? - log_z).exp()))
        .collect()
}

/// `P(h_j = +1 | v)` from ratios of enumerated Boltzmann weights.
pub fn exact_hidden_conditional(p: &RbmParams, v: &[i8]) -> Result<Vec<f64>> {
    check_hidden(p)?;
    let hs = hidden_states(p);
    let log_w: Vec<f64> = hs.iter().map(|h| -p.energy_unchecked(v, h)).collect();
    let log_norm = log_sum_exp(log_w.iter().copied());
    let mut up = vec![0.0; p.n_hidden];
    for (h, lw) in hs.iter().zip(&log_w) {
        let w = (lw - log_norm).exp();
        for (u, &hj) in up.iter_mut().zip(h) {
            if hj == 1 {
                *u += w;
            }
        }
    }
    Ok(up)
}

/// `P(v_i = +1 | h)` from ratios of enumerated Boltzmann weights.
pub fn exact_visible_conditional(p: &RbmParams, h: &[i8]) -> Result<Vec<f64>> {
    check_joint(p)?;
    let vs: Vec<Vec<i8>> = (0..1u64 << p.n_visible).map(|b| spins_from_bits(b, p.n_visible)).collect();
    let log_w: Vec<f64> = vs.iter().map(|v| -p.energy_unchecked(v, h)).collect();
    let log_norm = log_sum_exp(log_w.iter().copied());
    let mut up = vec![0.0; p.n_visible];
    for (v, lw) in vs.iter().zip(&log_w) {
        let w = (lw - log_norm).exp();
        for (u, &vi) in up.iter_mut().zip(v) {
            if vi == 1 {
                *u += w;
            }
        }
    }
    Ok(up)
}

/// Positive phase `E_data E_{h|v}[v hᵀ, v, h]` by enumerating hidden states.
pub fn exact_positive_phase(p: &RbmParams, data: &SpinBatch) -> Result<RbmMoments> {
    check_hidden(p)?;
    let (nv, nh) = (p.n_visible, p.n_hidden);
    let hs = hidden_states(p);
    let mut m = RbmMoments::zeros(nv, nh);
    for r in 0..data.rows() {
        let v = data.row(r);
        let log_w: Vec<f64> = hs.iter().map(|h| -p.energy_unchecked(v, h)).collect();
        let log_norm = log_sum_exp(log_w.iter().copied());
        for (h, lw) in hs.iter().zip(&log_w) {
            accumulate(&mut m, v, h, (lw - log_norm).exp());
        }
    }
    m.scale(1.0 / data.rows() as f64);
    Ok(m)
}

/// Negative phase `E_model[v hᵀ, v, h]` by enumerating the joint.
pub fn exact_negative_phase(p: &RbmParams) -> Result<RbmMoments> {
    let probs = exact_joint_distribution(p)?;
    let (nv, nh) = (p.n_visible, p.n_hidden);
    let mut m = RbmMoments::zeros(nv, nh);
    for (idx, &pr) in probs.iter().enumerate() {
        let v = spins_from_bits((idx >> nh) as u64, nv);
        let h = spins_from_bits((idx & ((1 << nh) - 1)) as u64, nh);
        accumulate(&mut m, &v, &h, pr);
    }
    Ok(m)
}

fn accumulate(m: &mut RbmMoments, v: &[i8], h: &[i8], weight: f64) {
    let nh = h.len();
    for (i, &vi) in v.iter().enumerate() {
        let vi = vi as f64;
        m.visible[i] += weight * vi;
        for (j, &hj) in h.iter().enumerate() {
            m.weights[i * nh + j] += weight * vi * hj as f64;
        }
    }
    for (a, &hj) in m.hidden.iter_mut().zip(h) {
        *a += weight * hj as f64;
    }
}

/// Exact gradient of the mean log-likelihood with respect to `(W, b, c)`.
pub fn exact_gradient_oracle(p: &RbmParams, data: &SpinBatch) -> Result<RbmGradients> {
    Ok(RbmGradients {
        positive: exact_positive_phase(p, data)?,
        negative: exact_negative_phase(p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bits_round_trip() {
        for b in 0..16 {
            assert_eq!(bits_from_spins(&spins_from_bits(b, 4)), b);
        }
    }

    #[test]
    fn one_by_one_zero_params() {
        let p = RbmParams::zeros(1, 1).unwrap();
        let lz = exact_log_partition(&p).unwrap();
        assert!((lz - (4f64.ln() - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn bounds_are_enforced() {
        let p = RbmParams::zeros(20, 5).unwrap();
        assert!(matches!(exact_log_partition(&p), Err(Error::Bound { .. })));
        let p = RbmParams::zeros(1, 21).unwrap();
        assert!(matches!(
            log_unnormalized_marginal(&p, &[1]),
            Err(Error::Bound { what: "n_hidden", .. })
        ));
    }

    #[test]
    fn zero_params_uniform_marginal() {
        let p = RbmParams::zeros(3, 2).unwrap();
        let data = SpinBatch::new(2, 3, vec![1, -1, 1, -1, -1, -1]).unwrap();
        let ll = exact_log_likelihood(&p, &data).unwrap();
        assert!((ll + 3.0 * 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn energy_shift_moves_log_partition() {
        // A constant added to every energy shifts log Z by minus that constant:
        // changing n_visible by one adds ½ to every energy of an otherwise
        // decoupled unit and doubles the state count, log Z' = log Z + log 2 − ½.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = RbmParams::gaussian(3, 2, 1.0, &mut rng).unwrap();
        let mut q = RbmParams::zeros(4, 2).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                q.weights[i * 2 + j] = p.weight(i, j);
            }
        }
        let lp = exact_log_partition(&p).unwrap();
        let lq = exact_log_partition(&q).unwrap();
        assert!((lq - (lp + 2f64.ln() - 0.5)).abs() < 1e-12);
    }
}
