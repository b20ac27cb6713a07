//! Transceiver design and sub-stream fairness for K-user MIMO interference
//! channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: Hermitian eigen- and generalized eigendecompositions.
//! - [`model`]: network configuration, channels, beamformers, stream powers.
//! - [`metrics`]: covariances, SINRs, Shannon and stream rates, leakage,
//!   imbalance.
//! - [`algorithms`]: iterative designs (interference alignment, max-SINR and
//!   its modified variant, generalized-eigenvector filtering, min-sum-MSE).
//! - [`power_control`]: the ad-hoc per-stream fairness power control and the
//!   standard per-user power control.
//! - [`harness`]: seeded Monte-Carlo sweeps and CSV output, driven by the
//!   `icsim` binary.

pub mod algorithms;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod power_control;

pub use error::{Error, Result};
