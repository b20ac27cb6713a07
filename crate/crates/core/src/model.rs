//! Network configuration, random channel and precoder generation, and the
//! records exchanged between the design algorithms and the metrics.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{orthonormalize_columns, CMat};

/// Tolerance on unit column norms of beamformers.
pub const UNIT_NORM_TOL: f64 = 1e-10;

/// Slack allowed on per-user power budgets.
pub const BUDGET_SLACK: f64 = 1e-9;

/// Dimensions and budgets of a K-user MIMO interference channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub tx_antennas: Vec<usize>,
    pub rx_antennas: Vec<usize>,
    pub streams: Vec<usize>,
    /// Total transmit power of each user, linear scale.
    pub power: Vec<f64>,
    pub noise_var: f64,
}

impl NetworkConfig {
    pub fn new(
        tx_antennas: Vec<usize>,
        rx_antennas: Vec<usize>,
        streams: Vec<usize>,
        power: Vec<f64>,
    ) -> Result<Self> {
        let cfg = Self {
            tx_antennas,
            rx_antennas,
            streams,
            power,
            noise_var: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// K users with identical antenna counts, streams and power.
    pub fn symmetric(users: usize, tx: usize, rx: usize, streams: usize, power: f64) -> Result<Self> {
        Self::new(
            vec![tx; users],
            vec![rx; users],
            vec![streams; users],
            vec![power; users],
        )
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.users();
        if k == 0 {
            return Err(Error::InvalidConfig("no users".into()));
        }
        if self.rx_antennas.len() != k || self.streams.len() != k || self.power.len() != k {
            return Err(Error::InvalidConfig(format!(
                "per-user vectors disagree on K: tx {}, rx {}, streams {}, power {}",
                k,
                self.rx_antennas.len(),
                self.streams.len(),
                self.power.len()
            )));
        }
        for u in 0..k {
            let d = self.streams[u];
            if d == 0 || d > self.tx_antennas[u].min(self.rx_antennas[u]) {
                return Err(Error::InvalidConfig(format!(
                    "user {u}: {d} streams with {} tx / {} rx antennas",
                    self.tx_antennas[u], self.rx_antennas[u]
                )));
            }
            if !(self.power[u] > 0.0) || !self.power[u].is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "user {u}: power budget {} must be positive",
                    self.power[u]
                )));
            }
        }
        if self.noise_var != 1.0 {
            return Err(Error::InvalidConfig("noise variance must be 1".into()));
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        self.tx_antennas.len()
    }

    pub fn total_streams(&self) -> usize {
        self.streams.iter().sum()
    }

    /// Same network with transmit and receive roles exchanged.
    pub fn reciprocal(&self) -> Self {
        Self {
            tx_antennas: self.rx_antennas.clone(),
            rx_antennas: self.tx_antennas.clone(),
            ..self.clone()
        }
    }

    /// Copy with every user's budget set to `power`.
    pub fn with_uniform_power(&self, power: f64) -> Self {
        Self {
            power: vec![power; self.users()],
            ..self.clone()
        }
    }
}

/// `h[k][l]` is the `N_k x M_l` channel from transmitter `l` to receiver `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h: Vec<Vec<CMat>>,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.h.len()
    }

    pub fn get(&self, rx: usize, tx: usize) -> &CMat {
        &self.h[rx][tx]
    }

    /// Channels of the reciprocal network: the link from reciprocal
    /// transmitter `k` (original receiver) to reciprocal receiver `j`
    /// (original transmitter) is `H_{kj}†`.
    pub fn reciprocal(&self) -> Self {
        let k = self.users();
        let h = (0..k)
            .map(|j| (0..k).map(|kk| self.h[kk][j].adjoint()).collect())
            .collect();
        Self { h }
    }

    pub fn check(&self, config: &NetworkConfig) -> Result<()> {
        let k = config.users();
        if self.users() != k || self.h.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidConfig("channel grid is not K x K".into()));
        }
        for rx in 0..k {
            for tx in 0..k {
                let m = &self.h[rx][tx];
                if m.nrows() != config.rx_antennas[rx] || m.ncols() != config.tx_antennas[tx] {
                    return Err(Error::InvalidConfig(format!(
                        "H[{rx}][{tx}] is {}x{}, expected {}x{}",
                        m.nrows(),
                        m.ncols(),
                        config.rx_antennas[rx],
                        config.tx_antennas[tx]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-user precoders `u[k]` (`M_k x d_k`) and receive filters `v[k]`
/// (`N_k x d_k`). Columns carry unit-norm directions; power lives in
/// [`StreamPowers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformers {
    pub u: Vec<CMat>,
    pub v: Vec<CMat>,
}

impl Beamformers {
    /// Same filters seen from the reciprocal network.
    pub fn reciprocal(&self) -> Self {
        Self {
            u: self.v.clone(),
            v: self.u.clone(),
        }
    }

    /// Largest deviation of any column norm from one.
    pub fn max_unit_norm_error(&self) -> f64 {
        self.u
            .iter()
            .chain(self.v.iter())
            .flat_map(|m| m.column_iter().map(|c| (c.norm() - 1.0).abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    pub fn has_unit_columns(&self) -> bool {
        self.max_unit_norm_error() <= UNIT_NORM_TOL
    }
}

/// Per-stream power allocation `p[k][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamPowers {
    pub p: Vec<Vec<f64>>,
}

impl StreamPowers {
    /// Budget split evenly across each user's streams.
    pub fn even(config: &NetworkConfig) -> Self {
        let p = config
            .power
            .iter()
            .zip(&config.streams)
            .map(|(&pk, &d)| vec![pk / d as f64; d])
            .collect();
        Self { p }
    }

    /// Even split of explicit per-user totals.
    pub fn even_from_totals(totals: &[f64], streams: &[usize]) -> Self {
        let p = totals
            .iter()
            .zip(streams)
            .map(|(&pk, &d)| vec![pk / d as f64; d])
            .collect();
        Self { p }
    }

    pub fn user_total(&self, k: usize) -> f64 {
        self.p[k].iter().sum()
    }

    pub fn within_budget(&self, config: &NetworkConfig) -> bool {
        self.p.iter().enumerate().all(|(k, pk)| {
            pk.iter().all(|&x| x >= 0.0) && pk.iter().sum::<f64>() <= config.power[k] + BUDGET_SLACK
        })
    }
}

/// Unit-variance circularly-symmetric complex Gaussian.
pub(crate) fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    // column-major fill order is part of the reproducibility contract
    let mut m = CMat::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_gaussian(rng);
        }
    }
    m
}

/// Draws i.i.d. CN(0, 1) Rayleigh channels.
pub fn sample_channels(config: &NetworkConfig, seed: u64) -> ChannelSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = config.users();
    let h = (0..k)
        .map(|rx| {
            (0..k)
                .map(|tx| gaussian_matrix(&mut rng, config.rx_antennas[rx], config.tx_antennas[tx]))
                .collect()
        })
        .collect();
    ChannelSet { h }
}

/// Random precoders with orthonormal columns; receive filters are zero
/// placeholders until the first receive update.
pub fn random_precoders(config: &NetworkConfig, seed: u64) -> Beamformers {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = config.users();
    let u = (0..k)
        .map(|j| orthonormalize_columns(&gaussian_matrix(&mut rng, config.tx_antennas[j], config.streams[j])))
        .collect();
    let v = (0..k)
        .map(|j| CMat::zeros(config.rx_antennas[j], config.streams[j]))
        .collect();
    Beamformers { u, v }
}

/// Transmit power for a given SNR in dB (noise variance is one).
pub fn snr_to_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Stable 64-bit mixing of a master seed with a path of indices.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    path.iter().fold(splitmix(master), |acc, &x| splitmix(acc ^ splitmix(x)))
}
