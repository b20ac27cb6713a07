//! Power control on top of fixed beamformers.
//!
//! [`adhoc_dpca`] rebalances the stream powers inside each user so that its
//! streams end with equal SINR. [`user_fairness_spca`] finds per-user powers
//! that meet per-user rate targets with a standard fixed-point iteration.

mod dpca;
mod spca;

pub use dpca::{adhoc_dpca, delta, DpcaCaps, DpcaOutcome, DpcaTrace};
pub use spca::{interference_function, user_fairness_spca, whiten_receivers, SpcaCaps, SpcaOutcome};
