//! Ring mixture of isotropic Gaussians in the plane.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{Dataset, DatasetKind, Split};
use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Clone, Debug, PartialEq)]
pub struct Toy2dConfig {
    pub n: usize,
    pub centers: usize,
    /// Ring radius in output coordinates; must be below 1.
    pub radius: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for Toy2dConfig {
    fn default() -> Self {
        Toy2dConfig {
            n: 20_000,
            centers: 8,
            radius: 0.8,
            noise_std: 0.04,
            seed: 0,
        }
    }
}

pub fn ring_centers(count: usize, radius: f64) -> Vec<[f64; 2]> {
    (0..count)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / count as f64;
            [radius * a.cos(), radius * a.sin()]
        })
        .collect()
}

/// Samples a labelled ring mixture; each point picks a center uniformly.
/// Coordinates are clamped into `[−1, 1]`.
pub fn make_toy2d(cfg: &Toy2dConfig) -> Result<Dataset> {
    if cfg.centers == 0 || cfg.n < cfg.centers {
        return Err(Error::InvalidArgument(format!(
            "toy2d needs n >= centers >= 1 (n {}, centers {})",
            cfg.n, cfg.centers
        )));
    }
    if !(cfg.radius > 0.0 && cfg.radius < 1.0) || !(cfg.noise_std >= 0.0 && cfg.noise_std.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "toy2d radius must lie in (0,1) and noise std be finite and >= 0 (radius {}, std {})",
            cfg.radius, cfg.noise_std
        )));
    }
    let centers = ring_centers(cfg.centers, cfg.radius);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, cfg.noise_std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut data = Vec::with_capacity(cfg.n * 2);
    let mut labels = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        let k = rng.random_range(0..cfg.centers);
        let [cx, cy] = centers[k];
        let (dx, dy) = if cfg.noise_std > 0.0 {
            (normal.sample(&mut rng), normal.sample(&mut rng))
        } else {
            (0.0, 0.0)
        };
        data.push((cx + dx).clamp(-1.0, 1.0));
        data.push((cy + dy).clamp(-1.0, 1.0));
        labels.push(k as u8);
    }
    Ok(Dataset {
        samples: Tensor::new(vec![cfg.n, 2], data)?,
        labels: Some(labels),
        kind: DatasetKind::Toy2d,
        split: Split::Train,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_lands_on_centers() {
        let cfg = Toy2dConfig { n: 200, noise_std: 0.0, ..Toy2dConfig::default() };
        let ds = make_toy2d(&cfg).unwrap();
        let centers = ring_centers(8, cfg.radius);
        for (p, &k) in ds.samples.data().chunks(2).zip(ds.labels.as_ref().unwrap()) {
            assert_eq!(p, &centers[k as usize]);
        }
    }

    #[test]
    fn same_seed_same_data() {
        let cfg = Toy2dConfig { n: 500, ..Toy2dConfig::default() };
        assert_eq!(make_toy2d(&cfg).unwrap(), make_toy2d(&cfg).unwrap());
        let other = Toy2dConfig { seed: 1, ..cfg.clone() };
        assert_ne!(make_toy2d(&cfg).unwrap(), make_toy2d(&other).unwrap());
    }

    #[test]
    fn rejects_too_few_points() {
        assert!(make_toy2d(&Toy2dConfig { n: 7, ..Toy2dConfig::default() }).is_err());
    }
}
