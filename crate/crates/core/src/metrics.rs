//! Covariances, SINRs, rates, leakage and fairness measurements.
//!
//! Notation follows the usual interference-channel conventions: `R_{k,l}` is
//! the received covariance of stream `l` of user `k`, `R_k` the sum over the
//! user's streams, `Q_k` the inter-user interference covariance and
//! `B = Q + σ²I`. Powers always come from [`StreamPowers`]; beamformer
//! columns are unit-norm directions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Beamformers, ChannelSet, StreamPowers};
use crate::numerics::{column_space, log_det_hpd, solve_hpd, trace_re, CMat, HermitianMatrix};

/// Relative singular-value cutoff used when reducing `V_k` to its column
/// space for rate evaluation.
pub const RANK_TOL: f64 = 1e-9;

/// Which SINR definition a report uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SinrStyle {
    /// `v† R_{k,l} v / v† B_{k,l} v`: other streams of the user interfere.
    Separate,
    /// `v† R_k v / v† B_k v`: the user's whole signal is desired.
    Group,
    /// `v† R_{k,l} v / v† B_k v`: only inter-user interference counts.
    InterUser,
}

impl SinrStyle {
    pub fn name(self) -> &'static str {
        match self {
            SinrStyle::Separate => "separate",
            SinrStyle::Group => "group",
            SinrStyle::InterUser => "inter-user",
        }
    }
}

/// Per-user, per-stream linear SINRs.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub sinr: Vec<Vec<f64>>,
    pub style: SinrStyle,
}

impl SinrReport {
    pub fn evaluate(
        style: SinrStyle,
        channels: &ChannelSet,
        bf: &Beamformers,
        powers: &StreamPowers,
    ) -> Result<Self> {
        let sinr = (0..channels.users())
            .map(|k| {
                (0..bf.v[k].ncols())
                    .map(|l| stream_sinr(style, k, l, channels, bf, powers))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { sinr, style })
    }

    pub fn user_mean(&self, k: usize) -> f64 {
        let s = &self.sinr[k];
        s.iter().sum::<f64>() / s.len() as f64
    }

    /// Max minus min stream SINR of user `k`.
    pub fn user_spread(&self, k: usize) -> f64 {
        let s = &self.sinr[k];
        let max = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = s.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn user_min(&self, k: usize) -> f64 {
        self.sinr[k].iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Shannon and per-stream rates of one network state. User rates use
/// [`span_user_rate`] so collapsed receive filters still report a value.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub user_rate: Vec<f64>,
    pub stream_rate: Vec<Vec<f64>>,
    pub sum_rate: f64,
    pub sum_stream_rate: f64,
}

impl RateReport {
    pub fn evaluate(
        channels: &ChannelSet,
        bf: &Beamformers,
        powers: &StreamPowers,
        sinrs: &SinrReport,
    ) -> Result<Self> {
        let user_rate = (0..channels.users())
            .map(|k| span_user_rate(k, channels, bf, powers))
            .collect::<Result<Vec<_>>>()?;
        let stream_rate: Vec<Vec<f64>> = sinrs
            .sinr
            .iter()
            .map(|row| row.iter().map(|&s| stream_rate(s)).collect())
            .collect();
        Ok(Self {
            sum_rate: user_rate.iter().sum(),
            sum_stream_rate: stream_rate.iter().flatten().sum(),
            user_rate,
            stream_rate,
        })
    }
}

fn check_user(k: usize, channels: &ChannelSet) -> Result<()> {
    if k >= channels.users() {
        return Err(Error::InvalidIndex(format!("user {k} of {}", channels.users())));
    }
    Ok(())
}

fn check_stream(k: usize, l: usize, powers: &StreamPowers) -> Result<()> {
    if l >= powers.p[k].len() {
        return Err(Error::InvalidIndex(format!(
            "stream {l} of user {k} ({} streams)",
            powers.p[k].len()
        )));
    }
    Ok(())
}

/// Adds `w · H u u† H†` into `acc`.
fn add_outer(acc: &mut CMat, h: &CMat, u: nalgebra::DVectorView<'_, Complex64>, w: f64) {
    let hu = h * u;
    acc.ger(Complex64::new(w, 0.0), &hu, &hu.conjugate(), Complex64::new(1.0, 0.0));
}

/// Interference covariance seen at receiver `k`.
///
/// With `include_intra = false` this is `Q_k`, the sum over other users'
/// streams. With `include_intra = true` the user's own streams are added as
/// well, and `exclude_stream = Some(l)` drops stream `l` itself, giving
/// `Q_{k,l}`. Add the noise variance on the diagonal to get `B_k` / `B_{k,l}`.
pub fn interference_covariance(
    k: usize,
    channels: &ChannelSet,
    bf: &Beamformers,
    powers: &StreamPowers,
    include_intra: bool,
    exclude_stream: Option<usize>,
) -> Result<HermitianMatrix> {
    check_user(k, channels)?;
    if let Some(l) = exclude_stream {
        check_stream(k, l, powers)?;
    }
    let n = channels.get(k, k).nrows();
    let mut acc = CMat::zeros(n, n);
    for j in 0..channels.users() {
        if j == k && !include_intra {
            continue;
        }
        let h = channels.get(k, j);
        for (m, &p) in powers.p[j].iter().enumerate() {
            if j == k && exclude_stream == Some(m) {
                continue;
            }
            if p != 0.0 {
                add_outer(&mut acc, h, bf.u[j].column(m), p);
            }
        }
    }
    Ok(HermitianMatrix::symmetrized(acc))
}

/// `B_k = Q_k + σ² I`.
pub fn interference_plus_noise(
    k: usize,
    channels: &ChannelSet,
    bf: &Beamformers,
    powers: &StreamPowers,
) -> Result<HermitianMatrix> {
    Ok(interference_covariance(k, channels, bf, powers, false, None)?.add_scaled_identity(1.0))
}

/// `B_{k,l} = Q_{k,l} + σ² I`.
pub fn stream_interference_plus_noise(
    k: usize,
    l: usize,
    channels: &ChannelSet,
    bf: &Beamformers,
    powers: &StreamPowers,
) -> Result<HermitianMatrix> {
    Ok(interference_covariance(k, channels, bf, powers, true, Some(l))?.add_scaled_identity(1.0))
}

/// `R_{k,l} = p_{k,l} H_kk u_{k,l} u_{k,l}† H_kk†`.
pub fn stream_covariance(
    k: usize,
    l: usize,
    channels: &ChannelSet,
    bf: &Beamformers,
    powers: &StreamPowers,
) -> Result<HermitianMatrix> {
    check_user(k, channels)?;
    check_stream(k, l, powers)?;
    let h = channels.get(k, k);
    let mut acc = CMat::zeros(h.nrows(), h.nrows());
    add_outer(&mut acc, h, bf.u[k].column(l), powers.p[k][l]);
    Ok(HermitianMatrix::symmetrized(acc))
}

/// `R_k`, the sum of the user's stream covariances.
pub fn user_covariance(
    k: usize,
    channels: &ChannelSet,
    bf: &Beamformers,
    powers: &StreamPowers,
) -> Result<HermitianMatrix> {
    check_user(k, channels)?;
    let h = channels.get(k, k);
    let mut acc = CMat::zeros(h.nrows(), h.nrows());
    for (l, &p) in powers.p[k].iter().enumerate() {
        add_outer(&mut acc, h, bf.u[k].column(l), p);
    }
    Ok(HermitianMatrix::symmetrized(acc))
}

/// Signal and interference-plus-noise power of stream `(k, l)` after its
/// receive vector, split by origin.
struct StreamPowersAtReceiver {
    own: f64,
    intra: f64,
    inter: f64,
    noise: f64,
}

fn powers_at_receiver(
    k: usize,
    l: usize,
    channels: &ChannelSet,
    bf: &Beamformers,
    powers: &StreamPowers,
) -> Result<StreamPowersAtReceiver> {
    check_user(k, channels)?;
    check_stream(k, l, powers)?;
    let v = bf.v[k].column(l);
    let noise = v.norm_squared();
    if noise == 0.0 {
        return Err(Error::ZeroReceiveVector { user: k, stream: l });
    }
    let vh = v.adjoint();
    let mut out = StreamPowersAtReceiver {
        own: 0.0,
        intra: 0.0,
        inter: 0.0,
        noise,
    };
    for j in 0..channels.users() {
        // 1 x d_j row of effective gains v† H_kj U_j
        let g = &vh * channels.get(k, j) * &bf.u[j];
        for (m, &p) in powers.p[j].iter().enumerate() {
            let e = p * g[(0, m)].norm_sqr();
            if j != k {
                out.inter += e;
            } else if m == l {
                out.own += e;
            } else {
                out.intra += e;
            }
        }
    }
    Ok(out)
}

/// Stream SINR under the given definition.
pub fn stream_sinr(
    style: SinrStyle,
    k: usize,
    l: usize,
    channels: &ChannelSet,
    bf: &Beamformers,
    powers: &StreamPowers,
) -> Result<f64> {
    let s = powers_at_receiver(k, l, channels, bf, powers)?;
    let floor = s.inter + s.noise;
    Ok(match style {
        SinrStyle::Separate => s.own / (floor + s.intra),
        SinrStyle::Group => (s.own + s.intra) / floor,
        SinrStyle::InterUser => s.own / floor,
    })
}

/// Separate-filtering SINR, `v† R_{k,l} v / v† B_{k,l} v`.
pub fn sinr_sf(k: usize, l: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    stream_sinr(SinrStyle::Separate, k, l, channels, bf, powers)
}

/// Group-filtering SINR, `v† R_k v / v† B_k v`.
pub fn sinr_gf(k: usize, l: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    stream_sinr(SinrStyle::Group, k, l, channels, bf, powers)
}

/// Stream signal over inter-user interference plus noise,
/// `v† R_{k,l} v / v† B_k v`.
pub fn sinr_inter_user(
    k: usize,
    l: usize,
    channels: &ChannelSet,
    bf: &Beamformers,
    powers: &StreamPowers,
) -> Result<f64> {
    stream_sinr(SinrStyle::InterUser, k, l, channels, bf, powers)
}

/// Shannon rate of user `k` in bits:
/// `log2 det(I + (V† B_k V)⁻¹ (V† R_k V))`. Errors if `V_k` is numerically
/// rank deficient.
pub fn user_rate(k: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    let basis = column_space(&bf.v[k], RANK_TOL);
    if basis.ncols() < bf.v[k].ncols() {
        return Err(Error::RankDeficientFilter {
            user: k,
            rank: basis.ncols(),
            streams: bf.v[k].ncols(),
        });
    }
    rate_on_basis(k, &basis, channels, bf, powers)
}

/// Rate of user `k` received through `span(V_k)`. Equals [`user_rate`] for
/// full-rank `V_k` and stays defined when streams collapse onto a common
/// direction (the modified max-SINR iteration tends to do this).
pub fn span_user_rate(k: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    rate_on_basis(k, &column_space(&bf.v[k], RANK_TOL), channels, bf, powers)
}

// The rate depends on V only through its column space, so an orthonormal
// basis gives the same value with V†BV as well conditioned as B itself.
fn rate_on_basis(k: usize, v: &CMat, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    let b = interference_plus_noise(k, channels, bf, powers)?;
    let r = user_covariance(k, channels, bf, powers)?;
    let vbv = b.congruence(v);
    let vrv = r.congruence(v);
    let total = HermitianMatrix::symmetrized(vbv.as_matrix() + vrv.as_matrix());
    let num = log_det_hpd(&total)?;
    let denom = log_det_hpd(&vbv)?;
    Ok(((num - denom) / std::f64::consts::LN_2).max(0.0))
}

/// `Σ_k R_k`.
pub fn sum_rate(channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    (0..channels.users()).map(|k| user_rate(k, channels, bf, powers)).sum()
}

/// `Σ_k` [`span_user_rate`].
pub fn span_sum_rate(channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    (0..channels.users()).map(|k| span_user_rate(k, channels, bf, powers)).sum()
}

/// `log2(1 + sinr)`.
pub fn stream_rate(sinr: f64) -> f64 {
    (1.0 + sinr).log2()
}

/// `Σ_k Σ_l log2(1 + SINR_{k,l})`.
pub fn sum_stream_rate(report: &SinrReport) -> f64 {
    report.sinr.iter().flatten().map(|&s| stream_rate(s)).sum()
}

/// Interference leakage `tr(V_k† Q_k V_k)`.
pub fn leakage(k: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    let q = interference_covariance(k, channels, bf, powers, false, None)?;
    Ok(trace_re(q.congruence(&bf.v[k]).as_matrix()).max(0.0))
}

pub fn total_leakage(channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    (0..channels.users()).map(|k| leakage(k, channels, bf, powers)).sum()
}

/// Desired power after receive filtering, `tr(V_k† R_k V_k)`.
pub fn desired_power(k: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    let r = user_covariance(k, channels, bf, powers)?;
    Ok(trace_re(r.congruence(&bf.v[k]).as_matrix()))
}

/// Total leakage relative to total desired power.
pub fn leakage_ratio(channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    let leak = total_leakage(channels, bf, powers)?;
    let desired: f64 = (0..channels.users())
        .map(|k| desired_power(k, channels, bf, powers))
        .sum::<Result<f64>>()?;
    Ok(leak / desired)
}

/// Per-user average SINR as the trace quotient
/// `tr(V† R_k V) / tr(V† B_k V)`. Equals the mean of the group-filtering
/// stream SINRs when `V† B_k V` is a multiple of the identity.
pub fn avg_sinr_gf(k: usize, channels: &ChannelSet, bf: &Beamformers, powers: &StreamPowers) -> Result<f64> {
    let r = user_covariance(k, channels, bf, powers)?;
    let b = interference_plus_noise(k, channels, bf, powers)?;
    let v = &bf.v[k];
    Ok(trace_re(r.congruence(v).as_matrix()) / trace_re(b.congruence(v).as_matrix()))
}

/// `tr((V† B V)⁻¹ (V† R V))`, the objective the generalized eigenvectors
/// maximize. Invariant to `V → V A` for invertible `A`.
pub fn trace_ratio_objective(v: &CMat, r: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    let vbv = b.congruence(v);
    let vrv = r.congruence(v);
    let x = solve_hpd(&vbv, vrv.as_matrix())?;
    Ok(trace_re(&x))
}

/// Second-to-first stream SINR imbalance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Imbalance {
    /// `Σ_k SINR_{k,2} / Σ_k SINR_{k,1}`.
    pub ratio_of_sums: f64,
    /// `Σ_k SINR_{k,2} / SINR_{k,1}`; infinite if any first stream is dead.
    pub sum_of_ratios: f64,
}

fn imbalance_from_pairs(pairs: impl Iterator<Item = (f64, f64)>) -> Result<Imbalance> {
    let (mut first, mut second, mut ratios) = (0.0, 0.0, 0.0);
    for (s1, s2) in pairs {
        first += s1;
        second += s2;
        ratios += if s1 > 0.0 { s2 / s1 } else { f64::INFINITY };
    }
    if first <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(Imbalance {
        ratio_of_sums: second / first,
        sum_of_ratios: ratios,
    })
}

/// Imbalance between each user's two weakest streams, ranked by SINR.
///
/// Stream labels carry no meaning for schemes that treat streams
/// symmetrically, so each user's SINRs are sorted ascending first and
/// "first" / "second" refer to rank.
pub fn imbalance_ratio(report: &SinrReport) -> Result<Imbalance> {
    if report.sinr.iter().any(|s| s.len() < 2) {
        return Err(Error::TooFewStreams);
    }
    imbalance_from_pairs(report.sinr.iter().map(|s| {
        let mut sorted = s.clone();
        sorted.sort_by(f64::total_cmp);
        (sorted[0], sorted[1])
    }))
}

/// Imbalance between streams labelled 1 and 2, without ranking.
pub fn imbalance_ratio_by_label(report: &SinrReport) -> Result<Imbalance> {
    if report.sinr.iter().any(|s| s.len() < 2) {
        return Err(Error::TooFewStreams);
    }
    imbalance_from_pairs(report.sinr.iter().map(|s| (s[0], s[1])))
}

/// Imbalance over many reports (e.g. Monte-Carlo trials). The ratio of sums
/// pools every user of every report; the sum of ratios is averaged over
/// reports. `ranked` selects [`imbalance_ratio`] ordering over label order.
pub fn pooled_imbalance(reports: &[SinrReport], ranked: bool) -> Result<Imbalance> {
    let (mut first, mut second, mut ratios) = (0.0, 0.0, 0.0);
    for r in reports {
        if r.sinr.iter().any(|s| s.len() < 2) {
            return Err(Error::TooFewStreams);
        }
        for s in &r.sinr {
            let (s1, s2) = if ranked {
                let mut sorted = s.clone();
                sorted.sort_by(f64::total_cmp);
                (sorted[0], sorted[1])
            } else {
                (s[0], s[1])
            };
            first += s1;
            second += s2;
            ratios += if s1 > 0.0 { s2 / s1 } else { f64::INFINITY };
        }
    }
    if first <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(Imbalance {
        ratio_of_sums: second / first,
        sum_of_ratios: ratios / reports.len() as f64,
    })
}
