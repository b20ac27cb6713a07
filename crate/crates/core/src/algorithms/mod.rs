//! Iterative transceiver designs.
//!
//! Every scheme alternates between a receive-side update in the original
//! network (downlink) and the same update in the reciprocal network
//! (uplink), where the original receivers transmit through `H_{kj}†` and the
//! precoders play the role of receive filters. One downlink plus one uplink
//! step counts as two iterations.
//!
//! Runs start from one random orthonormal precoder draw. When a run ends on
//! an uplink step the receive filters are refreshed once more so the
//! returned pair is consistent; that refresh is not counted.

mod mmse;
mod receive;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

pub use mmse::{min_sum_mse_run, sum_mse};
pub use receive::ReceiveRule;

use crate::error::{Error, Result};
use crate::metrics::{self, SinrStyle};
use crate::model::{random_precoders, Beamformers, ChannelSet, NetworkConfig, StreamPowers};

/// Iteration cap applied to the epsilon rule unless overridden.
pub const DEFAULT_MAX_ITERATIONS: usize = 2000;

/// Default sum-rate increment threshold.
pub const DEFAULT_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// Run exactly this many iterations.
    FixedIterations(usize),
    /// Stop once `|R_sum(n) - R_sum(n-2)| <= epsilon`, giving up after
    /// `max_iterations`.
    EpsilonIncrement { epsilon: f64, max_iterations: usize },
}

impl StoppingRule {
    /// Run to a negligible sum-rate increment with the default cap.
    pub fn until_converged(epsilon: f64) -> Self {
        StoppingRule::EpsilonIncrement {
            epsilon,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StoppingRule::FixedIterations(0) => Err(Error::InvalidExperiment(
                "iteration count must be at least 1".into(),
            )),
            StoppingRule::EpsilonIncrement { epsilon, max_iterations } => {
                if !(epsilon > 0.0) {
                    Err(Error::InvalidExperiment("epsilon must be positive".into()))
                } else if max_iterations < 2 {
                    Err(Error::InvalidExperiment("iteration cap must be at least 2".into()))
                } else {
                    Ok(())
                }
            }
            StoppingRule::FixedIterations(_) => Ok(()),
        }
    }
}

/// Per-iteration record of a run. Entry `i` describes the state after
/// iteration `i + 1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlgorithmTrace {
    pub sum_rate: Vec<f64>,
    pub leakage: Vec<f64>,
    /// Sum of mean-square errors; only filled by min-sum-MSE.
    pub sum_mse: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: Duration,
}

/// Output of a design run. `powers` equals the input allocation except for
/// min-sum-MSE, which chooses its own.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub beamformers: Beamformers,
    pub powers: StreamPowers,
    pub trace: AlgorithmTrace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Dia,
    MaxSinr,
    MaxSinrModified,
    Gevd,
    MinSumMse,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Dia,
        Algorithm::MaxSinr,
        Algorithm::MaxSinrModified,
        Algorithm::Gevd,
        Algorithm::MinSumMse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dia => "dia",
            Algorithm::MaxSinr => "max-sinr",
            Algorithm::MaxSinrModified => "max-sinr-mod",
            Algorithm::Gevd => "gevd",
            Algorithm::MinSumMse => "min-sum-mse",
        }
    }

    /// SINR definition used when reporting stream SINRs for this scheme.
    pub fn sinr_style(self) -> SinrStyle {
        match self {
            Algorithm::MaxSinr | Algorithm::MaxSinrModified => SinrStyle::Separate,
            Algorithm::Gevd => SinrStyle::Group,
            Algorithm::Dia | Algorithm::MinSumMse => SinrStyle::InterUser,
        }
    }

    /// Runs the scheme from even power allocation.
    pub fn run(self, channels: &ChannelSet, config: &NetworkConfig, stop: StoppingRule, seed: u64) -> Result<Design> {
        let powers = StreamPowers::even(config);
        match self {
            Algorithm::Dia => dia_run(channels, config, &powers, stop, seed),
            Algorithm::MaxSinr => max_sinr_run(channels, config, &powers, stop, MaxSinrVariant::Conventional, seed),
            Algorithm::MaxSinrModified => max_sinr_run(channels, config, &powers, stop, MaxSinrVariant::Modified, seed),
            Algorithm::Gevd => gevd_run(channels, config, &powers, stop, seed),
            Algorithm::MinSumMse => min_sum_mse_run(channels, config, &powers, stop, seed),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxSinrVariant {
    /// Other streams of the same user count as interference (`B_{k,l}`).
    Conventional,
    /// Only inter-user interference (`B_k`).
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Link {
    Down,
    Up,
}

/// Shared alternation loop. `update` performs one step in place and
/// `observe` appends the post-step state to the trace.
pub(crate) fn alternate<S>(
    state: &mut S,
    stop: StoppingRule,
    mut update: impl FnMut(Link, &mut S) -> Result<()>,
    mut observe: impl FnMut(&S, &mut AlgorithmTrace) -> Result<()>,
) -> Result<AlgorithmTrace> {
    stop.validate()?;
    let start = Instant::now();
    let mut trace = AlgorithmTrace::default();
    let mut n = 0usize;
    loop {
        n += 1;
        let link = if n % 2 == 1 { Link::Down } else { Link::Up };
        update(link, state)?;
        observe(state, &mut trace)?;
        match stop {
            StoppingRule::FixedIterations(count) => {
                if n >= count {
                    trace.converged = true;
                    break;
                }
            }
            StoppingRule::EpsilonIncrement { epsilon, max_iterations } => {
                // compare states two iterations apart, after receive updates
                if link == Link::Down && n >= 3 {
                    let r = &trace.sum_rate;
                    if (r[n - 1] - r[n - 3]).abs() <= epsilon {
                        trace.converged = true;
                        break;
                    }
                }
                if n >= max_iterations {
                    break;
                }
            }
        }
    }
    if n % 2 == 0 {
        update(Link::Down, state)?;
    }
    trace.iterations = n;
    trace.wall_time = start.elapsed();
    Ok(trace)
}

fn run_receive_rule(
    rule: ReceiveRule,
    channels: &ChannelSet,
    config: &NetworkConfig,
    powers: &StreamPowers,
    stop: StoppingRule,
    seed: u64,
) -> Result<Design> {
    config.validate()?;
    channels.check(config)?;
    let reciprocal = channels.reciprocal();
    let mut bf = random_precoders(config, seed);
    let trace = alternate(
        &mut bf,
        stop,
        |link, bf| {
            match link {
                Link::Down => bf.v = rule.receive_filters(channels, bf, powers)?,
                Link::Up => bf.u = rule.receive_filters(&reciprocal, &bf.reciprocal(), powers)?,
            }
            debug_assert!(bf.has_unit_columns(), "unit columns lost after {link:?} step");
            Ok(())
        },
        |bf, trace| {
            trace.sum_rate.push(metrics::span_sum_rate(channels, bf, powers)?);
            trace.leakage.push(metrics::total_leakage(channels, bf, powers)?);
            Ok(())
        },
    )?;
    Ok(Design {
        beamformers: bf,
        powers: powers.clone(),
        trace,
    })
}

/// Distributed interference alignment: receive filters span the
/// least-interfered eigenspace of `Q_k`, eigenvectors assigned to streams in
/// ascending eigenvalue order.
pub fn dia_run(
    channels: &ChannelSet,
    config: &NetworkConfig,
    powers: &StreamPowers,
    stop: StoppingRule,
    seed: u64,
) -> Result<Design> {
    run_receive_rule(ReceiveRule::LeastInterference, channels, config, powers, stop, seed)
}

/// Max-SINR: `v_{k,l} ∝ B⁻¹ H_kk u_{k,l}` with `B = B_{k,l}` (conventional)
/// or `B_k` (modified).
pub fn max_sinr_run(
    channels: &ChannelSet,
    config: &NetworkConfig,
    powers: &StreamPowers,
    stop: StoppingRule,
    variant: MaxSinrVariant,
    seed: u64,
) -> Result<Design> {
    let rule = match variant {
        MaxSinrVariant::Conventional => ReceiveRule::MaxSinr,
        MaxSinrVariant::Modified => ReceiveRule::MaxSinrModified,
    };
    run_receive_rule(rule, channels, config, powers, stop, seed)
}

/// Group filtering by the top `d_k` generalized eigenvectors of
/// `(R_k, B_k)`, columns scaled to unit norm.
pub fn gevd_run(
    channels: &ChannelSet,
    config: &NetworkConfig,
    powers: &StreamPowers,
    stop: StoppingRule,
    seed: u64,
) -> Result<Design> {
    run_receive_rule(ReceiveRule::GeneralizedEigen, channels, config, powers, stop, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::sample_channels;

    fn system(snr_power: f64) -> NetworkConfig {
        NetworkConfig::symmetric(3, 4, 4, 2, snr_power).unwrap()
    }

    #[test]
    fn stopping_rule_validation() {
        assert!(StoppingRule::FixedIterations(0).validate().is_err());
        assert!(StoppingRule::FixedIterations(1).validate().is_ok());
        assert!(StoppingRule::EpsilonIncrement { epsilon: 0.0, max_iterations: 10 }.validate().is_err());
        assert!(StoppingRule::EpsilonIncrement { epsilon: 1e-6, max_iterations: 1 }.validate().is_err());
        assert!(StoppingRule::until_converged(1e-6).validate().is_ok());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("sdp".parse::<Algorithm>().is_err());
    }

    #[test]
    fn fixed_iterations_counted_and_consistent() {
        let cfg = system(100.0);
        let h = sample_channels(&cfg, 1);
        for count in [1, 2, 4, 7] {
            let d = Algorithm::MaxSinr.run(&h, &cfg, StoppingRule::FixedIterations(count), 3).unwrap();
            assert_eq!(d.trace.iterations, count);
            assert_eq!(d.trace.sum_rate.len(), count);
            assert!(d.trace.converged);
            assert!(d.beamformers.has_unit_columns());
            // returned receivers match the returned precoders
            let v = ReceiveRule::MaxSinr
                .receive_filters(&h, &d.beamformers, &d.powers)
                .unwrap();
            assert!((v[0].clone() - &d.beamformers.v[0]).norm() < 1e-12);
        }
    }

    #[test]
    fn epsilon_rule_terminates_at_matching_phase() {
        let cfg = system(100.0);
        let h = sample_channels(&cfg, 2);
        for alg in [Algorithm::Dia, Algorithm::MaxSinr, Algorithm::Gevd] {
            let d = alg.run(&h, &cfg, StoppingRule::until_converged(1e-6), 5).unwrap();
            let t = &d.trace;
            assert_eq!(t.sum_rate.len(), t.iterations);
            if t.converged {
                let n = t.iterations;
                assert_eq!(n % 2, 1);
                assert!((t.sum_rate[n - 1] - t.sum_rate[n - 3]).abs() <= 1e-6);
            } else {
                assert_eq!(t.iterations, DEFAULT_MAX_ITERATIONS);
            }
        }
    }

    #[test]
    fn single_user_dia_has_no_leakage() {
        let cfg = NetworkConfig::symmetric(1, 3, 3, 2, 10.0).unwrap();
        let h = sample_channels(&cfg, 4);
        let d = Algorithm::Dia.run(&h, &cfg, StoppingRule::FixedIterations(1), 1).unwrap();
        assert_eq!(d.trace.leakage[0], 0.0);
        let v = &d.beamformers.v[0];
        assert!((v.adjoint() * v - crate::numerics::CMat::identity(2, 2)).norm() < 1e-10);
    }

    #[test]
    fn dia_leakage_non_increasing_over_rounds() {
        let cfg = system(100.0);
        for seed in 0..5 {
            let h = sample_channels(&cfg, 10 + seed);
            let d = Algorithm::Dia.run(&h, &cfg, StoppingRule::FixedIterations(60), seed).unwrap();
            for w in d.trace.leakage.windows(3).step_by(2) {
                assert!(w[2] <= w[0] * (1.0 + 1e-9) + 1e-12, "{} -> {}", w[0], w[2]);
            }
            assert!(d.beamformers.has_unit_columns());
        }
    }

    #[test]
    fn every_scheme_keeps_unit_columns_each_iteration() {
        let cfg = system(1000.0);
        let h = sample_channels(&cfg, 8);
        for alg in Algorithm::ALL {
            for count in 1..6 {
                let d = alg.run(&h, &cfg, StoppingRule::FixedIterations(count), 2).unwrap();
                assert!(d.beamformers.has_unit_columns(), "{alg} after {count}");
                assert!(d.powers.within_budget(&cfg));
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let cfg = system(100.0);
        let h = sample_channels(&cfg, 3);
        for alg in Algorithm::ALL {
            let a = alg.run(&h, &cfg, StoppingRule::FixedIterations(10), 1).unwrap();
            let b = alg.run(&h, &cfg, StoppingRule::FixedIterations(10), 1).unwrap();
            assert_eq!(a.beamformers, b.beamformers);
            assert_eq!(a.powers, b.powers);
            assert_eq!(a.trace.sum_rate, b.trace.sum_rate);
        }
    }

    #[test]
    fn rejects_mismatched_channels() {
        let cfg = system(10.0);
        let other = NetworkConfig::symmetric(3, 3, 4, 2, 10.0).unwrap();
        let h = sample_channels(&other, 1);
        assert!(Algorithm::Dia.run(&h, &cfg, StoppingRule::FixedIterations(2), 1).is_err());
    }
}
