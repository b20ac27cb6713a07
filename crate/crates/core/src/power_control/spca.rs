//! User-level power control for rate targets.
//!
//! With `V_k` normalized so that `V_k† B_k V_k` is a multiple of the identity,
//! the average group SINR of user `k` is the trace quotient
//! `tr(V†R_kV) / tr(V†B_kV)`, and the rate target
//! `log2(1 + d_k · avgSINR_k) ≥ R_k` becomes `p_k ≥ I_k(p)` with
//!
//! ```text
//! I_k(p) = (2^{R_k} − 1) · tr(V† B_k(p) V) / tr(V† H_kk U_k U_k† H_kk† V)
//! ```
//!
//! `I_k` is affine in the other users' powers with a positive noise term, so
//! it is monotone and scalable and the iteration `p ← I(p)` converges to the
//! least feasible point whenever one exists.

use crate::error::{Error, Result};
use crate::metrics::interference_plus_noise;
use crate::model::{Beamformers, ChannelSet, NetworkConfig, StreamPowers};
use crate::numerics::{inv_sqrt_hpd, trace_re};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpcaCaps {
    pub max_iterations: usize,
    /// L1 change in user powers that counts as converged.
    pub epsilon: f64,
    /// Any user power above this is treated as divergence.
    pub ceiling: f64,
}

impl Default for SpcaCaps {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            epsilon: 1e-6,
            ceiling: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpcaOutcome {
    /// Total power of each user.
    pub user_powers: Vec<f64>,
    /// `user_powers` split evenly across streams.
    pub powers: StreamPowers,
    /// Receive filters after whitening; precoders are unchanged.
    pub beamformers: Beamformers,
    pub iterations: usize,
    pub converged: bool,
}

/// Rescales every `V_k` to `V_k (V_k† B_k V_k)^{-1/2}` so that
/// `V_k† B_k V_k = I` at `powers`. Rates and the column spaces are unchanged.
pub fn whiten_receivers(channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<Beamformers> {
    let mut out = bf.clone();
    for k in 0..channels.users() {
        let b = interference_plus_noise(k, channels, bf, powers)?;
        let w = inv_sqrt_hpd(&b.congruence(&bf.v[k]))?;
        out.v[k] = &bf.v[k] * w;
    }
    Ok(out)
}

fn split(config: &NetworkConfig, user_powers: &[f64]) -> StreamPowers {
    StreamPowers {
        p: user_powers
            .iter()
            .zip(&config.streams)
            .map(|(&p, &d)| vec![p / d as f64; d])
            .collect(),
    }
}

/// `I_k(p)` for user powers `user_powers` (split evenly over streams) and
/// SINR scale `gamma = 2^{R_k} − 1`.
pub fn interference_function(
    k: usize,
    channels: &ChannelSet,
    bf: &Beamformers,
    config: &NetworkConfig,
    user_powers: &[f64],
    gamma: f64,
) -> Result<f64> {
    let powers = split(config, user_powers);
    let b = interference_plus_noise(k, channels, bf, &powers)?;
    let v = &bf.v[k];
    let x = v.adjoint() * channels.get(k, k) * &bf.u[k];
    let gain = x.norm_squared();
    if !(gain > 0.0) {
        return Err(Error::ZeroDesiredGain { user: k, stream: 0 });
    }
    Ok(gamma * trace_re(b.congruence(v).as_matrix()) / gain)
}

/// Smallest user powers meeting `rate_targets` (bits per channel use) for
/// the fixed beamformers `bf`.
///
/// The receive filters are whitened at the configured power point first.
/// Per-user budgets are not enforced; compare `user_powers` with
/// `config.power` to check them. Errors with `InfeasibleTargets` if the
/// iteration runs past `caps.ceiling`.
pub fn user_fairness_spca(
    channels: &ChannelSet,
    bf: &Beamformers,
    config: &NetworkConfig,
    rate_targets: &[f64],
    caps: SpcaCaps,
) -> Result<SpcaOutcome> {
    config.validate()?;
    channels.check(config)?;
    let users = config.users();
    if rate_targets.len() != users {
        return Err(Error::InvalidConfig(format!(
            "{} rate targets for {users} users",
            rate_targets.len()
        )));
    }
    if rate_targets.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidConfig("rate targets must be finite and non-negative".into()));
    }
    if !(caps.epsilon > 0.0 && caps.ceiling > 0.0) || caps.max_iterations == 0 {
        return Err(Error::InvalidConfig(format!("bad spca caps {caps:?}")));
    }

    let bf = whiten_receivers(channels, bf, &StreamPowers::even(config))?;
    let gamma: Vec<f64> = rate_targets.iter().map(|r| r.exp2() - 1.0).collect();
    let mut p = vec![0.0; users];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < caps.max_iterations {
        iterations += 1;
        let next = (0..users)
            .map(|k| interference_function(k, channels, &bf, config, &p, gamma[k]))
            .collect::<Result<Vec<_>>>()?;
        if let Some(user) = next.iter().position(|&x| !(x <= caps.ceiling)) {
            return Err(Error::InfeasibleTargets {
                user,
                ceiling: caps.ceiling,
            });
        }
        let change: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if change <= caps.epsilon {
            converged = true;
            break;
        }
    }
    Ok(SpcaOutcome {
        powers: split(config, &p),
        user_powers: p,
        beamformers: bf,
        iterations,
        converged,
    })
}
