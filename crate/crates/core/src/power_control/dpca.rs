//! Ad-hoc sub-stream power control.
//!
//! Each outer pass resets the powers to an even split and picks a per-user
//! target `Γ_k`, the mean of the user's current stream SINRs. The inner
//! loop is a Jacobi fixed point: every stream's interference function
//!
//! ```text
//! δ_{k,l}(p) = v† B_k(p) v / v† H_kk u u† H_kk† v
//! ```
//!
//! is evaluated at the previous powers, then each user hands out its budget
//! greedily, best stream (smallest δ) first, `p = min(Γ_k δ, remaining)`.
//! Streams that cannot reach `Γ_k` drag the next target down, so infeasible
//! targets correct themselves over the outer passes.

use crate::error::{Error, Result};
use crate::metrics::{SinrReport, SinrStyle};
use crate::model::{Beamformers, ChannelSet, NetworkConfig, StreamPowers};

/// Iteration limits for [`adhoc_dpca`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpcaCaps {
    pub outer_max: usize,
    pub inner_max: usize,
}

impl Default for DpcaCaps {
    fn default() -> Self {
        Self {
            outer_max: 50,
            inner_max: 500,
        }
    }
}

/// Per-outer-pass history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DpcaTrace {
    /// `Γ_k` used in each pass.
    pub gamma: Vec<Vec<f64>>,
    /// Stream SINRs at the end of each pass.
    pub sinr: Vec<Vec<Vec<f64>>>,
    /// `Σ_k Σ_{m≠n} |SINR_{k,m} − SINR_{k,n}|` at the end of each pass.
    pub spread: Vec<f64>,
    /// Inner iterations spent in each pass.
    pub inner_iterations: Vec<usize>,
    /// Whether each pass's inner loop met the L1 tolerance.
    pub inner_converged: Vec<bool>,
}

impl DpcaTrace {
    pub fn outer_iterations(&self) -> usize {
        self.spread.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpcaOutcome {
    pub powers: StreamPowers,
    /// Final `p/δ(p)` SINRs, i.e. the inter-user SINR form.
    pub sinr: SinrReport,
    pub trace: DpcaTrace,
    pub converged: bool,
}

/// Interference function of stream `(k, l)` at `powers`: the power that
/// stream needs per unit of SINR when everything else is held fixed.
pub fn delta(k: usize, l: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    if k >= channels.users() || l >= bf.v[k].ncols() {
        return Err(Error::InvalidIndex(format!("stream {l} of user {k}")));
    }
    stream_delta(k, l, channels, bf, powers)
}

// v†B_k v is accumulated from the non-negative terms p |v† H_kj u|² rather
// than from the matrix: once interference is nearly aligned away the matrix
// form cancels catastrophically and the fixed point stalls on roundoff.
fn stream_delta(k: usize, l: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    let v = bf.v[k].column(l);
    let gain = (v.adjoint() * channels.get(k, k) * bf.u[k].column(l))[(0, 0)].norm_sqr();
    if !(gain > 0.0) || !gain.is_finite() {
        return Err(Error::ZeroDesiredGain { user: k, stream: l });
    }
    let mut b = v.norm_squared();
    for j in (0..channels.users()).filter(|&j| j != k) {
        let g = v.adjoint() * channels.get(k, j) * &bf.u[j];
        b += g.iter().zip(&powers.p[j]).map(|(x, p)| p * x.norm_sqr()).sum::<f64>();
    }
    Ok(b / gain)
}

fn all_deltas(channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<Vec<Vec<f64>>> {
    (0..channels.users())
        .map(|k| (0..bf.v[k].ncols()).map(|l| stream_delta(k, l, channels, bf, powers)).collect())
        .collect()
}

/// Greedy allocation for one user: best stream first, each capped by what
/// is left of the budget.
fn allocate(gamma: f64, deltas: &[f64], budget: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by(|&a, &b| deltas[a].total_cmp(&deltas[b]));
    let mut remaining = budget;
    let mut p = vec![0.0; deltas.len()];
    for y in order {
        let want = gamma * deltas[y];
        p[y] = want.min(remaining).max(0.0);
        remaining -= p[y];
    }
    p
}

fn pairwise_spread(sinr: &[Vec<f64>]) -> f64 {
    sinr.iter()
        .map(|s| {
            let mut acc = 0.0;
            for m in 0..s.len() {
                for n in 0..s.len() {
                    if m != n {
                        acc += (s[m] - s[n]).abs();
                    }
                }
            }
            acc
        })
        .sum()
}

/// Sub-stream fairness power control for fixed beamformers.
///
/// `initial` holds the stream SINRs reported by the scheme that produced
/// `bf`; they seed the first target. Returns the last state with
/// `converged = false` if `caps.outer_max` passes do not bring the spread
/// within `epsilon`.
pub fn adhoc_dpca(
    channels: &ChannelSet,
    bf: &Beamformers,
    config: &NetworkConfig,
    initial: &SinrReport,
    epsilon: f64,
    caps: DpcaCaps,
) -> Result<DpcaOutcome> {
    config.validate()?;
    channels.check(config)?;
    if !(epsilon > 0.0) || caps.outer_max == 0 || caps.inner_max == 0 {
        return Err(Error::InvalidConfig(format!(
            "dpca needs epsilon > 0 and positive caps, got {epsilon}, {caps:?}"
        )));
    }
    if initial.sinr.len() != config.users() || initial.sinr.iter().zip(&config.streams).any(|(s, &d)| s.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: config.total_streams(),
            found: initial.sinr.iter().map(Vec::len).sum(),
        });
    }

    let mut sinr = initial.sinr.clone();
    let mut powers = StreamPowers::even(config);
    let mut trace = DpcaTrace::default();
    let mut converged = false;

    for _ in 0..caps.outer_max {
        powers = StreamPowers::even(config);
        let gamma: Vec<f64> = sinr.iter().map(|s| s.iter().sum::<f64>() / s.len() as f64).collect();

        let mut inner = 0;
        let mut inner_ok = false;
        let mut deltas = all_deltas(channels, bf, &powers)?;
        while inner < caps.inner_max {
            inner += 1;
            let next = StreamPowers {
                p: (0..config.users())
                    .map(|k| allocate(gamma[k], &deltas[k], config.power[k]))
                    .collect(),
            };
            debug_assert!(next.within_budget(config));
            let change: f64 = next
                .p
                .iter()
                .flatten()
                .zip(powers.p.iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .sum();
            powers = next;
            deltas = all_deltas(channels, bf, &powers)?;
            if change <= epsilon {
                inner_ok = true;
                break;
            }
        }

        sinr = powers
            .p
            .iter()
            .zip(&deltas)
            .map(|(p, d)| p.iter().zip(d).map(|(p, d)| p / d).collect())
            .collect();
        let spread = pairwise_spread(&sinr);
        trace.gamma.push(gamma);
        trace.sinr.push(sinr.clone());
        trace.spread.push(spread);
        trace.inner_iterations.push(inner);
        trace.inner_converged.push(inner_ok);
        if spread <= epsilon && inner_ok {
            converged = true;
            break;
        }
    }

    Ok(DpcaOutcome {
        powers,
        sinr: SinrReport {
            sinr,
            style: SinrStyle::InterUser,
        },
        trace,
        converged,
    })
}
