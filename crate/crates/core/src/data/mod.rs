//! Dataset ingestion, synthetic data, and on-disk formats.

pub mod checkpoint;
pub mod idx;
pub mod metrics;
pub mod pgm;
pub mod toy2d;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub use checkpoint::{Checkpoint, Record, RngPosition};
pub use idx::{load_mnist_dir, load_mnist_idx, parse_mnist_idx};
pub use metrics::{read_metrics, MetricsWriter, METRICS_COLUMNS};
pub use pgm::{encode_image_grid, write_image_grid};
pub use toy2d::{make_toy2d, ring_centers, Toy2dConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetKind {
    Mnist,
    Toy2d,
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Toy2d => "toy2d",
        })
    }
}

impl FromStr for DatasetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mnist" => Ok(DatasetKind::Mnist),
            "toy2d" => Ok(DatasetKind::Toy2d),
            _ => Err(Error::Config(format!("unknown dataset '{s}' (mnist, toy2d)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Heldout,
}

/// Samples scaled to `[−1, 1]`, `N×C×H×W` for images or `N×2` for points.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Tensor,
    pub labels: Option<Vec<u8>>,
    pub kind: DatasetKind,
    pub split: Split,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.batch()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Splits off the trailing `fraction` of samples (by index) as held-out data.
    pub fn split_heldout(self, fraction: f64) -> Result<(Dataset, Dataset)> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(Error::InvalidArgument(format!("held-out fraction {fraction} not in [0, 1)")));
        }
        let n = self.len();
        let held = ((n as f64) * fraction).round() as usize;
        if held == 0 || held == n {
            return Err(Error::InvalidArgument(format!("cannot hold out {held} of {n} samples")));
        }
        let cut = n - held;
        let labels = |a: usize, b: usize| self.labels.as_ref().map(|l| l[a..b].to_vec());
        let train = Dataset {
            samples: self.samples.slice_batch(0, cut),
            labels: labels(0, cut),
            kind: self.kind,
            split: Split::Train,
        };
        let heldout = Dataset {
            samples: self.samples.slice_batch(cut, n),
            labels: labels(cut, n),
            kind: self.kind,
            split: Split::Heldout,
        };
        Ok((train, heldout))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heldout_is_trailing_slice() {
        let samples = Tensor::new(vec![10, 1], (0..10).map(f64::from).collect()).unwrap();
        let ds = Dataset { samples, labels: Some((0..10).collect()), kind: DatasetKind::Toy2d, split: Split::Train };
        let (tr, ho) = ds.split_heldout(0.1).unwrap();
        assert_eq!(tr.len(), 9);
        assert_eq!(ho.samples.data(), &[9.0]);
        assert_eq!(ho.labels.unwrap(), vec![9]);
        assert_eq!(ho.split, Split::Heldout);
    }
}
