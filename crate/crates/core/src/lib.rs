//! Adversarial training with generator inputs sampled from an RBM.
//!
//! A GAN whose generator consumes samples from a spin RBM that is trained,
//! jointly with the discriminator and generator, on the discriminator's
//! intermediate tanh feature layer. Small RBMs can be evaluated exactly by
//! enumeration, which the test suites use as oracles.

pub mod adversarial;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod nn;
pub mod rbm;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};
pub use config::TrainConfig;
pub use tensor::Tensor;
pub use trainer::{StepMetrics, Trainer};
