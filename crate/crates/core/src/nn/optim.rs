//! Adam and SGD-with-momentum over lists of `(parameter, gradient)` buffers.
//!
//! Both optimizers validate every gradient before touching any parameter, so a
//! rejected step leaves parameters and state untouched.

use crate::error::{Error, Result};
use crate::nn::network::Sequential;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn new(sizes: &[usize]) -> Self {
        AdamState {
            first_moment: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    /// Zeroed moments matching every parameter tensor of `net`.
    pub fn for_network(net: &Sequential) -> Self {
        let sizes: Vec<usize> = net.params().iter().map(|(p, _)| p.len()).collect();
        AdamState::new(&sizes)
    }
}

fn check_grads<'a>(
    op: &'static str,
    sizes: impl Iterator<Item = usize>,
    pairs: &[(&mut [f64], &'a [f64])],
) -> Result<()> {
    let sizes: Vec<usize> = sizes.collect();
    if sizes.len() != pairs.len() {
        return Err(Error::shape(
            op,
            format!("optimizer tracks {} buffers, got {}", sizes.len(), pairs.len()),
        ));
    }
    for (i, ((p, g), &n)) in pairs.iter().zip(&sizes).enumerate() {
        if p.len() != n || g.len() != n {
            return Err(Error::shape(
                op,
                format!("buffer {i}: state {n}, param {}, grad {}", p.len(), g.len()),
            ));
        }
        if let Some(j) = g.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                op,
                detail: format!("gradient buffer {i} element {j} is {}", g[j]),
            });
        }
    }
    Ok(())
}

/// One bias-corrected Adam update applied in place.
pub fn adam_step(pairs: &mut [(&mut [f64], &[f64])], cfg: &AdamConfig, state: &mut AdamState) -> Result<()> {
    check_grads("adam_step", state.first_moment.iter().map(Vec::len), pairs)?;
    state.step += 1;
    let t = state.step as f64;
    let bc1 = 1.0 - cfg.beta1.powf(t);
    let bc2 = 1.0 - cfg.beta2.powf(t);
    for ((p, g), (m, v)) in pairs
        .iter_mut()
        .zip(state.first_moment.iter_mut().zip(state.second_moment.iter_mut()))
    {
        for i in 0..p.len() {
            let gi = g[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    }
    Ok(())
}

/// Adam step on every parameter of `net` using its accumulated gradients.
pub fn adam_update(net: &mut Sequential, cfg: &AdamConfig, state: &mut AdamState) -> Result<()> {
    let mut pairs: Vec<(&mut [f64], &[f64])> = Vec::new();
    for (p, g) in net.params_mut() {
        let g: &Tensor = g;
        pairs.push((p.data_mut(), g.data()));
    }
    adam_step(&mut pairs, cfg, state)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentumConfig {
    pub lr: f64,
    pub momentum: f64,
}

impl Default for MomentumConfig {
    fn default() -> Self {
        MomentumConfig {
            lr: 0.001,
            momentum: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentumState {
    pub velocity: Vec<Vec<f64>>,
    pub step: u64,
}

impl MomentumState {
    pub fn new(sizes: &[usize]) -> Self {
        MomentumState {
            velocity: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }
}

/// `v ← μ v − lr g`, `p ← p + v`.
pub fn sgd_momentum_step(
    pairs: &mut [(&mut [f64], &[f64])],
    cfg: &MomentumConfig,
    state: &mut MomentumState,
) -> Result<()> {
    check_grads("sgd_momentum_step", state.velocity.iter().map(Vec::len), pairs)?;
    state.step += 1;
    for ((p, g), v) in pairs.iter_mut().zip(state.velocity.iter_mut()) {
        for i in 0..p.len() {
            v[i] = cfg.momentum * v[i] - cfg.lr * g[i];
            p[i] += v[i];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_adam(g: f64, steps: usize, cfg: &AdamConfig) -> (f64, AdamState) {
        let mut p = [0.0];
        let mut st = AdamState::new(&[1]);
        for _ in 0..steps {
            adam_step(&mut [(&mut p[..], &[g][..])], cfg, &mut st).unwrap();
        }
        (p[0], st)
    }

    #[test]
    fn adam_zero_gradient_is_a_no_op() {
        let (p, st) = run_adam(0.0, 3, &AdamConfig::default());
        assert_eq!(p, 0.0);
        assert_eq!(st.first_moment[0][0], 0.0);
        assert_eq!(st.second_moment[0][0], 0.0);
        assert_eq!(st.step, 3);
    }

    #[test]
    fn adam_first_step_closed_form() {
        // m̂ = g, v̂ = g², so Δ = −lr · g / (|g| + ε).
        let cfg = AdamConfig { lr: 0.001, ..AdamConfig::default() };
        let (p, _) = run_adam(1.0, 1, &cfg);
        assert!((p - (-0.001 / (1.0 + 1e-8))).abs() < 1e-18);
    }

    #[test]
    fn adam_is_deterministic() {
        let cfg = AdamConfig::default();
        let a = run_adam(0.37, 50, &cfg);
        let b = run_adam(0.37, 50, &cfg);
        assert_eq!(a.0.to_bits(), b.0.to_bits());
    }

    #[test]
    fn adam_rejects_non_finite_without_mutation() {
        let mut p = [1.0, 2.0];
        let mut st = AdamState::new(&[2]);
        let err = adam_step(&mut [(&mut p[..], &[0.5, f64::INFINITY][..])], &AdamConfig::default(), &mut st);
        assert!(matches!(err, Err(Error::NonFinite { .. })));
        assert_eq!(p, [1.0, 2.0]);
        assert_eq!(st.step, 0);
    }

    #[test]
    fn momentum_recurrence() {
        let cfg = MomentumConfig { lr: 0.001, momentum: 0.8 };
        let mut p = [0.0];
        let mut st = MomentumState::new(&[1]);
        sgd_momentum_step(&mut [(&mut p[..], &[1.0][..])], &cfg, &mut st).unwrap();
        let before = p[0];
        assert!((before + 0.001).abs() < 1e-18);
        sgd_momentum_step(&mut [(&mut p[..], &[1.0][..])], &cfg, &mut st).unwrap();
        assert!((p[0] - before + 0.0018).abs() < 1e-15);
    }

    #[test]
    fn momentum_zero_is_plain_sgd() {
        let cfg = MomentumConfig { lr: 0.1, momentum: 0.0 };
        let mut p = [1.0, -2.0];
        let mut st = MomentumState::new(&[2]);
        for _ in 0..3 {
            sgd_momentum_step(&mut [(&mut p[..], &[0.5, 0.25][..])], &cfg, &mut st).unwrap();
        }
        assert_eq!(p, [1.0 - 0.05 - 0.05 - 0.05, -2.0 - 0.025 - 0.025 - 0.025]);
    }

    #[test]
    fn momentum_zero_gradient_unchanged() {
        let mut p = [3.0];
        let mut st = MomentumState::new(&[1]);
        sgd_momentum_step(&mut [(&mut p[..], &[0.0][..])], &MomentumConfig::default(), &mut st).unwrap();
        assert_eq!(p, [3.0]);
    }
}
