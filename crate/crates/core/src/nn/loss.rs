//! Binary cross-entropy on logits, computed without ever taking `log(0)`.

use crate::error::Result;
use crate::nn::layers::sigmoid;
use crate::tensor::Tensor;

/// `log(1 + e^x)`
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `log σ(x)`
pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

/// `log(1 − σ(x))`
pub fn log_one_minus_sigmoid(x: f64) -> f64 {
    -softplus(x)
}

/// Loss and `dLoss/dlogit` for one logit and a target in `{0, 1}`.
pub fn bce_from_logit(logit: f64, target: f64) -> (f64, f64) {
    let loss = softplus(logit) - target * logit;
    (loss, sigmoid(logit) - target)
}

/// Mean BCE over a batch of logits; the gradient is already divided by the batch size.
pub fn bce_from_logits(logits: &Tensor, target: f64) -> Result<(f64, Tensor)> {
    logits.ensure_finite("bce_from_logits")?;
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let grad = logits.map(|l| {
        let (_, g) = bce_from_logit(l, target);
        g / n
    });
    for &l in logits.data() {
        loss += bce_from_logit(l, target).0;
    }
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn symmetric_cases() {
        let (l, g) = bce_from_logit(0.0, 1.0);
        assert!((l - LN_2).abs() < 1e-15 && g == -0.5);
        let (l, g) = bce_from_logit(0.0, 0.0);
        assert!((l - LN_2).abs() < 1e-15 && g == 0.5);
    }

    #[test]
    fn saturated_logit_does_not_overflow() {
        // log(1 + e^50) = 50 + log(1 + e^-50); the tail term is 1.9287498479639178e-22.
        let (l, g) = bce_from_logit(50.0, 0.0);
        assert_eq!(l, 50.0);
        assert!((l - (50.0 + 1.928_749_847_963_917_8e-22)).abs() < 1e-12);
        assert!((g - 1.0).abs() < 1e-15);
        let (l, _) = bce_from_logit(-1000.0, 1.0);
        assert_eq!(l, 1000.0);
    }

    #[test]
    fn log_terms_stay_finite() {
        for x in [-1e3, -50.0, 0.0, 50.0, 1e3] {
            assert!(log_sigmoid(x).is_finite());
            assert!(log_one_minus_sigmoid(x).is_finite());
        }
        assert!((log_sigmoid(0.0) + LN_2).abs() < 1e-15);
    }
}
