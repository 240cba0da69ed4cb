//! Minimal deterministic neural-network core: layers, networks, losses, optimizers.

pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod network;
pub mod optim;

pub use gradcheck::{finite_difference_check, finite_difference_check_with, gradient_suite, GradCheckReport, SuiteCase};
pub use layers::{Activation, Conv2d, ConvTranspose2d, Dense, Layer};
pub use loss::{bce_from_logit, bce_from_logits, log_one_minus_sigmoid, log_sigmoid};
pub use network::{Sequential, Trace};
pub use optim::{adam_step, adam_update, sgd_momentum_step, AdamConfig, AdamState, MomentumConfig, MomentumState};
