//! Alternating minimization of the sum of mean-square errors.
//!
//! Precoders `T_k` carry power (`T_k = U_k diag(√p_k)`) and receivers `W_k`
//! are unnormalized linear MMSE filters. With `s_k` unit-variance symbols the
//! per-user error covariance is
//!
//! ```text
//! E_k = W_k† (Σ_j H_kj T_j T_j† H_kj† + I) W_k − W_k† H_kk T_k − T_k† H_kk† W_k + I
//! ```
//!
//! The receive step is the unconstrained minimizer over `W`; the transmit
//! step solves `(Σ_j H_jk† W_j W_j† H_jk + μ_k I) T_k = H_kk† W_k`, with the
//! multiplier `μ_k ≥ 0` found by bisection so that `‖T_k‖_F² ≤ p_k`. Both
//! steps are exact minimizers, so the sum-MSE never increases.

use num_complex::Complex64;

use super::{alternate, Design, Link, StoppingRule};
use crate::error::{Error, Result};
use crate::metrics;
use crate::model::{random_precoders, Beamformers, ChannelSet, NetworkConfig, StreamPowers};
use crate::numerics::{hermitian_eig_sorted, solve_hpd, trace_re, CMat, HermitianMatrix, PD_FLOOR};

const BISECTION_STEPS: usize = 200;

struct MmseState {
    t: Vec<CMat>,
    w: Vec<CMat>,
    bf: Beamformers,
    powers: StreamPowers,
}

impl MmseState {
    /// Splits the precoders into unit directions and stream powers.
    fn sync_transmit(&mut self) {
        for (k, t) in self.t.iter().enumerate() {
            for l in 0..t.ncols() {
                let n = t.column(l).norm();
                // a dead stream keeps its previous direction
                if n > 0.0 {
                    let col = t.column(l) / Complex64::new(n, 0.0);
                    self.bf.u[k].set_column(l, &col);
                }
                self.powers.p[k][l] = n * n;
            }
        }
    }

    fn sync_receive(&mut self) {
        for (k, w) in self.w.iter().enumerate() {
            let mut v = w.clone();
            crate::numerics::normalize_columns(&mut v);
            self.bf.v[k] = v;
        }
    }
}

fn received_covariance(channels: &ChannelSet, t: &[CMat], k: usize) -> HermitianMatrix {
    let n = channels.get(k, k).nrows();
    let mut acc = CMat::identity(n, n);
    for (j, tj) in t.iter().enumerate() {
        let x = channels.get(k, j) * tj;
        acc += &x * x.adjoint();
    }
    HermitianMatrix::symmetrized(acc)
}

/// Linear MMSE receivers for fixed precoders.
fn mmse_receivers(channels: &ChannelSet, t: &[CMat]) -> Result<Vec<CMat>> {
    (0..channels.users())
        .map(|k| solve_hpd(&received_covariance(channels, t, k), &(channels.get(k, k) * &t[k])))
        .collect()
}

/// Power-constrained MMSE precoders for fixed receivers.
fn mmse_precoders(channels: &ChannelSet, w: &[CMat], budgets: &[f64]) -> Result<Vec<CMat>> {
    let users = channels.users();
    (0..users)
        .map(|k| {
            let m = channels.get(k, k).ncols();
            let mut a = CMat::zeros(m, m);
            for j in 0..users {
                let x = channels.get(j, k).adjoint() * &w[j];
                a += &x * x.adjoint();
            }
            let b = channels.get(k, k).adjoint() * &w[k];
            constrained_solve(k, &HermitianMatrix::symmetrized(a), &b, budgets[k])
        })
        .collect()
}

/// Solves `(A + μI) T = B` with the smallest `μ ≥ 0` giving `‖T‖_F² ≤ budget`.
fn constrained_solve(user: usize, a: &HermitianMatrix, b: &CMat, budget: f64) -> Result<CMat> {
    let eig = hermitian_eig_sorted(a);
    let lambda: Vec<f64> = eig.values.iter().map(|&x| x.max(0.0)).collect();
    let proj = eig.vectors.adjoint() * b;
    let weight: Vec<f64> = proj.row_iter().map(|r| r.norm_squared()).collect();
    let power = |mu: f64| -> f64 {
        lambda
            .iter()
            .zip(&weight)
            .map(|(&l, &w)| if w == 0.0 { 0.0 } else { w / ((l + mu) * (l + mu)) })
            .sum()
    };
    let max = lambda.last().copied().unwrap_or(0.0);
    let solve_at = |mu: f64| -> CMat {
        let mut scaled = proj.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= Complex64::new(1.0 / (lambda[i] + mu), 0.0);
        }
        &eig.vectors * scaled
    };

    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(CMat::zeros(b.nrows(), b.ncols()));
    }
    if lambda[0] > PD_FLOOR * max && power(0.0) <= budget {
        return Ok(solve_at(0.0));
    }
    let (mut lo, mut hi) = (0.0, b_norm / budget.sqrt());
    if !(power(hi) <= budget) {
        return Err(Error::BisectionFailed { user, lo, hi, target: budget });
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if power(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = power(hi);
    if !p.is_finite() || p > budget {
        return Err(Error::BisectionFailed { user, lo, hi, target: budget });
    }
    Ok(solve_at(hi))
}

/// Sum over users of `tr(E_k)` for precoders `t` (power included) and
/// receivers `w`.
pub fn sum_mse(channels: &ChannelSet, t: &[CMat], w: &[CMat]) -> f64 {
    (0..channels.users())
        .map(|k| {
            let cov = received_covariance(channels, t, k);
            let cross = w[k].adjoint() * channels.get(k, k) * &t[k];
            trace_re(cov.congruence(&w[k]).as_matrix()) - 2.0 * trace_re(&cross) + w[k].ncols() as f64
        })
        .sum()
}

/// Min-sum-MSE transceiver design. Starts from random orthonormal
/// precoders carrying `powers`; returns the chosen stream powers.
pub fn min_sum_mse_run(
    channels: &ChannelSet,
    config: &NetworkConfig,
    powers: &StreamPowers,
    stop: StoppingRule,
    seed: u64,
) -> Result<Design> {
    config.validate()?;
    channels.check(config)?;
    let bf = random_precoders(config, seed);
    let t = bf
        .u
        .iter()
        .zip(&powers.p)
        .map(|(u, p)| {
            let mut t = u.clone();
            for (l, &pl) in p.iter().enumerate() {
                t.column_mut(l).scale_mut(pl.sqrt());
            }
            t
        })
        .collect();
    let w = bf.v.clone();
    let mut state = MmseState {
        t,
        w,
        bf,
        powers: powers.clone(),
    };
    let trace = alternate(
        &mut state,
        stop,
        |link, s| {
            match link {
                Link::Down => {
                    s.w = mmse_receivers(channels, &s.t)?;
                    s.sync_receive();
                }
                Link::Up => {
                    s.t = mmse_precoders(channels, &s.w, &config.power)?;
                    s.sync_transmit();
                }
            }
            // a receive column can only vanish if its stream is dead
            debug_assert!(s.bf.u.iter().all(|u| u.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-10)));
            Ok(())
        },
        |s, trace| {
            trace.sum_rate.push(metrics::span_sum_rate(channels, &s.bf, &s.powers)?);
            trace.leakage.push(metrics::total_leakage(channels, &s.bf, &s.powers)?);
            trace.sum_mse.push(sum_mse(channels, &s.t, &s.w));
            Ok(())
        },
    )?;
    Ok(Design {
        beamformers: state.bf,
        powers: state.powers,
        trace,
    })
}
