//! Ising-spin (±1) restricted Boltzmann machine.
//!
//! Units take values in `{−1, +1}`, so a unit in local field `f` is `+1` with
//! probability `σ(2f)` and has mean `tanh(f)`. The energy keeps the `½Σv_i²`
//! term, which is the constant `n_v / 2` on spins and cancels from every
//! conditional and gradient.

pub mod exact;
pub mod heldout;
pub mod model;
pub mod sampling;

pub use exact::{
    exact_gradient_oracle, exact_joint_distribution, exact_log_likelihood, exact_log_partition,
    MAX_HIDDEN_UNITS, MAX_JOINT_UNITS,
};
pub use heldout::{prototype_spins, train_heldout, HeldoutConfig, HeldoutRun};
pub use model::{sample_spins, spin_up_probability, RbmParams, SpinBatch};
pub use sampling::{cd_k, positive_phase, CdStep, GibbsChain, RbmGradients, RbmLearner, RbmMoments};
