//! Exact-computation and Monte Carlo laboratory for a (1+1)-directed polymer
//! interacting with infinitely many equally spaced repulsive interfaces.
//!
//! The walk pays `e^{-delta}` per contact with a line in `T*Z`. Everything
//! here is built from the renewal picture of that measure:
//!
//! - [`srw`]: exact hitting laws of the interfaces under the plain walk,
//!   their k-fold convolutions, and bound verification.
//! - [`free_energy`]: the closed-form Laplace transform `Q_T`, the solved
//!   free energy `phi(delta, T)`, `x_beta` / `kappa(beta)`, gap moments.
//! - [`renewal`]: the tilted renewal gap law and its mass function `u(n)`.
//! - [`polymer`]: partition function by last-contact decomposition, exact
//!   skeleton/endpoint sampling, full-path reconstruction.
//! - [`regime`]: the exponent phase diagram, predicted observable scales,
//!   and the experiment runner.
//! - [`oracle`]: brute-force enumerations used as ground truth in tests.

pub mod error;
mod fft;
pub mod free_energy;
pub mod oracle;
pub mod polymer;
pub mod regime;
pub mod renewal;
pub mod rng;
pub mod srw;
mod util;

pub use error::{Error, Result};
pub use free_energy::{
    asymptotic_phi, free_energy, g_factor, kappa, laplace_q, renewal_moments, x_beta, Exponent,
    ModelParams, MomentMethod, ScalingPoint,
};
pub use polymer::{ContactSkeleton, PolymerInstance, TrajectoryStats};
pub use regime::{
    classify, partition_asymptotics, predicted_orders, run_experiment, srw_contrast,
    srw_contrast_multi, ExperimentReport, RegimeLabel,
};
pub use renewal::{MassMethod, ProfileBranch, RenewalModel};
pub use srw::{
    hitting_law, interface_visit_prob, k_fold_hitting, reflection_identity_check,
    return_origin_expansions, verify_hitting_bounds, HittingLaw, InterfaceSpec, KFoldLaw,
};
