//! Seeded Monte-Carlo sweeps, CSV output and summaries.
//!
//! An [`ExperimentSpec`] describes one symmetric network, an SNR grid, a
//! design algorithm with its stopping rule and an optional power-control
//! pass. [`run_experiment`] produces one [`TrialRow`] per (trial, user,
//! stream); trials run in parallel but the row order and every value
//! are fixed by the spec.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{Algorithm, StoppingRule, DEFAULT_EPSILON, DEFAULT_MAX_ITERATIONS};
use crate::error::{Error, Result};
use crate::metrics::{self, pooled_imbalance, stream_rate, Imbalance, SinrReport, SinrStyle};
use crate::model::{derive_seed, sample_channels, snr_to_power, NetworkConfig};
use crate::power_control::{adhoc_dpca, user_fairness_spca, DpcaCaps, SpcaCaps};

/// Exact CSV header.
pub const CSV_HEADER: [&str; 17] = [
    "algorithm",
    "mc",
    "snr_db",
    "user",
    "stream",
    "sinr",
    "rate",
    "user_rate",
    "sum_rate",
    "sum_stream_rate",
    "leakage",
    "iters",
    "converged",
    "wall_ms",
    "pc",
    "pc_sinr",
    "pc_rate",
];

/// Iteration setting: a fixed count, or run until the sum-rate settles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Iters {
    Fixed(usize),
    Auto,
}

impl fmt::Display for Iters {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Iters::Fixed(n) => write!(f, "{n}"),
            Iters::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for Iters {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Iters::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Iters::Fixed(n)),
            _ => Err(Error::Parse(format!("iters must be a positive integer or \"auto\", got {s:?}"))),
        }
    }
}

impl Serialize for Iters {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Iters::Fixed(n) => s.serialize_u64(*n as u64),
            Iters::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for Iters {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) if n > 0 => Ok(Iters::Fixed(n as usize)),
            Raw::Int(n) => Err(serde::de::Error::custom(format!("iters must be positive, got {n}"))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerControl {
    None,
    Adhoc,
    Spca,
}

impl PowerControl {
    pub fn name(self) -> &'static str {
        match self {
            PowerControl::None => "none",
            PowerControl::Adhoc => "adhoc",
            PowerControl::Spca => "spca",
        }
    }
}

impl fmt::Display for PowerControl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PowerControl {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PowerControl::None),
            "adhoc" => Ok(PowerControl::Adhoc),
            "spca" => Ok(PowerControl::Spca),
            _ => Err(Error::Parse(format!("unknown power control {s:?} (none|adhoc|spca)"))),
        }
    }
}

impl Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One experiment. Every field has a default, so a config file only needs
/// the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub users: usize,
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub streams: usize,
    pub snr_start_db: f64,
    pub snr_stop_db: f64,
    pub snr_step_db: f64,
    pub mc: usize,
    pub algorithm: Algorithm,
    pub iters: Iters,
    pub epsilon: f64,
    pub power_control: PowerControl,
    /// Per-user rate targets in bits for `spca`; a single value applies to
    /// every user.
    pub rate_targets: Vec<f64>,
    pub seed: u64,
    /// CSV destination; standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Record wall-clock times. Off makes the CSV byte-reproducible.
    pub timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            users: 3,
            tx_antennas: 4,
            rx_antennas: 4,
            streams: 2,
            snr_start_db: 0.0,
            snr_stop_db: 60.0,
            snr_step_db: 10.0,
            mc: 20,
            algorithm: Algorithm::MaxSinr,
            iters: Iters::Auto,
            epsilon: DEFAULT_EPSILON,
            power_control: PowerControl::None,
            rate_targets: Vec::new(),
            seed: 0,
            out: None,
            timing: true,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidExperiment(m));
        if self.users == 0 || self.tx_antennas == 0 || self.rx_antennas == 0 || self.streams == 0 {
            return bad("users, antennas and streams must be positive".into());
        }
        if !(self.snr_step_db > 0.0) {
            return bad(format!("snr_step_db must be positive, got {}", self.snr_step_db));
        }
        if !(self.snr_start_db.is_finite() && self.snr_stop_db.is_finite()) || self.snr_stop_db < self.snr_start_db {
            return bad(format!("empty SNR grid {}..{}", self.snr_start_db, self.snr_stop_db));
        }
        if self.mc == 0 {
            return bad("mc must be at least 1".into());
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.power_control == PowerControl::Spca {
            self.user_rate_targets()?;
        }
        self.network_config(self.snr_start_db)?;
        self.stopping_rule().validate()
    }

    /// SNR points `start, start + step, …` up to `stop`.
    pub fn snr_points(&self) -> Vec<f64> {
        let span = (self.snr_stop_db - self.snr_start_db) / self.snr_step_db;
        let n = (span + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.snr_start_db + i as f64 * self.snr_step_db).collect()
    }

    pub fn stopping_rule(&self) -> StoppingRule {
        match self.iters {
            Iters::Fixed(n) => StoppingRule::FixedIterations(n),
            Iters::Auto => StoppingRule::EpsilonIncrement {
                epsilon: self.epsilon,
                max_iterations: DEFAULT_MAX_ITERATIONS,
            },
        }
    }

    pub fn network_config(&self, snr_db: f64) -> Result<NetworkConfig> {
        NetworkConfig::symmetric(
            self.users,
            self.tx_antennas,
            self.rx_antennas,
            self.streams,
            snr_to_power(snr_db),
        )
    }

    fn user_rate_targets(&self) -> Result<Vec<f64>> {
        let t = match self.rate_targets.len() {
            1 => vec![self.rate_targets[0]; self.users],
            n if n == self.users => self.rate_targets.clone(),
            n => {
                return Err(Error::InvalidExperiment(format!(
                    "spca needs 1 or {} rate targets, got {n}",
                    self.users
                )))
            }
        };
        if t.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidExperiment("rate targets must be non-negative".into()));
        }
        Ok(t)
    }

    /// Seed of trial `(snr_index, mc)`; channels and the initial precoders
    /// are drawn from sub-seeds of it.
    pub fn trial_seed(&self, snr_index: usize, mc: usize) -> u64 {
        derive_seed(self.seed, &[snr_index as u64, mc as u64])
    }
}

/// One (trial, user, stream) record. Floats are held at the 12 significant
/// digits written to CSV, so parsing a written file gives back equal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub algorithm: Algorithm,
    pub mc: usize,
    pub snr_db: f64,
    pub user: usize,
    pub stream: usize,
    /// Stream SINR in the algorithm's native form, linear.
    pub sinr: f64,
    /// `log2(1 + sinr)`.
    pub rate: f64,
    pub user_rate: f64,
    pub sum_rate: f64,
    pub sum_stream_rate: f64,
    /// Total leakage of the trial.
    pub leakage: f64,
    pub iters: usize,
    /// Design converged and, if applied, power control converged.
    pub converged: bool,
    /// Whole-trial wall time in milliseconds.
    pub wall_ms: Option<f64>,
    pub pc: PowerControl,
    pub pc_sinr: Option<f64>,
    pub pc_rate: Option<f64>,
}

/// Rounds to the 12 significant digits used in CSV.
pub fn quantize(x: f64) -> f64 {
    if x.is_finite() {
        format_float(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

impl TrialRow {
    fn quantized(mut self) -> Self {
        for x in [
            &mut self.snr_db,
            &mut self.sinr,
            &mut self.rate,
            &mut self.user_rate,
            &mut self.sum_rate,
            &mut self.sum_stream_rate,
            &mut self.leakage,
        ] {
            *x = quantize(*x);
        }
        for x in [&mut self.wall_ms, &mut self.pc_sinr, &mut self.pc_rate].into_iter().flatten() {
            *x = quantize(*x);
        }
        self
    }

    fn record(&self) -> [String; 17] {
        let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
        [
            self.algorithm.name().to_string(),
            self.mc.to_string(),
            format_float(self.snr_db),
            self.user.to_string(),
            self.stream.to_string(),
            format_float(self.sinr),
            format_float(self.rate),
            format_float(self.user_rate),
            format_float(self.sum_rate),
            format_float(self.sum_stream_rate),
            format_float(self.leakage),
            self.iters.to_string(),
            self.converged.to_string(),
            opt(self.wall_ms),
            self.pc.name().to_string(),
            opt(self.pc_sinr),
            opt(self.pc_rate),
        ]
    }

    fn parse(rec: &csv::StringRecord) -> Result<Self> {
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse(format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len())));
        }
        fn num<T: FromStr>(field: &str, name: &str) -> Result<T> {
            field
                .parse()
                .map_err(|_| Error::Parse(format!("bad {name} value {field:?}")))
        }
        let opt = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                num(&rec[i], CSV_HEADER[i]).map(Some)
            }
        };
        Ok(Self {
            algorithm: rec[0].parse()?,
            mc: num(&rec[1], "mc")?,
            snr_db: num(&rec[2], "snr_db")?,
            user: num(&rec[3], "user")?,
            stream: num(&rec[4], "stream")?,
            sinr: num(&rec[5], "sinr")?,
            rate: num(&rec[6], "rate")?,
            user_rate: num(&rec[7], "user_rate")?,
            sum_rate: num(&rec[8], "sum_rate")?,
            sum_stream_rate: num(&rec[9], "sum_stream_rate")?,
            leakage: num(&rec[10], "leakage")?,
            iters: num(&rec[11], "iters")?,
            converged: num(&rec[12], "converged")?,
            wall_ms: opt(13)?,
            pc: rec[14].parse()?,
            pc_sinr: opt(15)?,
            pc_rate: opt(16)?,
        })
    }
}

pub fn write_csv<W: Write>(rows: &[TrialRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[TrialRow], path: &Path) -> Result<()> {
    write_csv(rows, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrialRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    r.records().map(|rec| TrialRow::parse(&rec?)).collect()
}

pub fn read_csv_file(path: &Path) -> Result<Vec<TrialRow>> {
    read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
}

struct TrialOutcome {
    sinr: SinrReport,
    user_rate: Vec<f64>,
    leakage: f64,
    iters: usize,
    converged: bool,
    pc: Option<(SinrReport, bool)>,
}

fn evaluate_trial(spec: &ExperimentSpec, config: &NetworkConfig, snr_index: usize, mc: usize) -> Result<TrialOutcome> {
    let seed = spec.trial_seed(snr_index, mc);
    let channels = sample_channels(config, derive_seed(seed, &[0]));
    let design = spec
        .algorithm
        .run(&channels, config, spec.stopping_rule(), derive_seed(seed, &[1]))?;
    let bf = &design.beamformers;
    let sinr = SinrReport::evaluate(spec.algorithm.sinr_style(), &channels, bf, &design.powers)?;
    let user_rate = (0..config.users())
        .map(|k| metrics::span_user_rate(k, &channels, bf, &design.powers))
        .collect::<Result<Vec<_>>>()?;
    let leakage = metrics::total_leakage(&channels, bf, &design.powers)?;
    let pc = match spec.power_control {
        PowerControl::None => None,
        PowerControl::Adhoc => {
            let out = adhoc_dpca(&channels, bf, config, &sinr, spec.epsilon, DpcaCaps::default())?;
            Some((out.sinr, out.converged))
        }
        PowerControl::Spca => {
            let out = user_fairness_spca(&channels, bf, config, &spec.user_rate_targets()?, SpcaCaps::default())?;
            let rep = SinrReport::evaluate(SinrStyle::Group, &channels, bf, &out.powers)?;
            Some((rep, out.converged))
        }
    };
    Ok(TrialOutcome {
        sinr,
        user_rate,
        leakage,
        iters: design.trace.iterations,
        converged: design.trace.converged,
        pc,
    })
}

fn trial_rows(spec: &ExperimentSpec, snr_index: usize, snr_db: f64, mc: usize) -> Vec<TrialRow> {
    let start = Instant::now();
    let config = spec.network_config(snr_db).expect("validated spec");
    let outcome = evaluate_trial(spec, &config, snr_index, mc);
    let wall_ms = spec.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    let has_pc = spec.power_control != PowerControl::None;
    let mut rows = Vec::with_capacity(config.total_streams());
    match outcome {
        Ok(o) => {
            let sum_rate = o.user_rate.iter().sum();
            let sum_stream_rate = metrics::sum_stream_rate(&o.sinr);
            for k in 0..config.users() {
                for l in 0..config.streams[k] {
                    let s = o.sinr.sinr[k][l];
                    let pc_sinr = o.pc.as_ref().map(|(r, _)| r.sinr[k][l]);
                    rows.push(TrialRow {
                        algorithm: spec.algorithm,
                        mc,
                        snr_db,
                        user: k,
                        stream: l,
                        sinr: s,
                        rate: stream_rate(s),
                        user_rate: o.user_rate[k],
                        sum_rate,
                        sum_stream_rate,
                        leakage: o.leakage,
                        iters: o.iters,
                        converged: o.converged && o.pc.as_ref().is_none_or(|(_, c)| *c),
                        wall_ms,
                        pc: spec.power_control,
                        pc_sinr,
                        pc_rate: pc_sinr.map(stream_rate),
                    });
                }
            }
        }
        Err(_) => {
            for k in 0..config.users() {
                for l in 0..config.streams[k] {
                    rows.push(TrialRow {
                        algorithm: spec.algorithm,
                        mc,
                        snr_db,
                        user: k,
                        stream: l,
                        sinr: f64::NAN,
                        rate: f64::NAN,
                        user_rate: f64::NAN,
                        sum_rate: f64::NAN,
                        sum_stream_rate: f64::NAN,
                        leakage: f64::NAN,
                        iters: 0,
                        converged: false,
                        wall_ms,
                        pc: spec.power_control,
                        pc_sinr: has_pc.then_some(f64::NAN),
                        pc_rate: has_pc.then_some(f64::NAN),
                    });
                }
            }
        }
    }
    rows.into_iter().map(TrialRow::quantized).collect()
}

/// Runs every (SNR, trial) pair of `spec`. A failing trial yields rows of
/// NaN with `converged = false`; only an invalid spec is an error.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRow>> {
    spec.validate()?;
    let snrs = spec.snr_points();
    let jobs: Vec<(usize, f64, usize)> = snrs
        .iter()
        .enumerate()
        .flat_map(|(i, &s)| (0..spec.mc).map(move |mc| (i, s, mc)))
        .collect();
    let mut rows: Vec<TrialRow> = jobs
        .par_iter()
        .flat_map_iter(|&(i, s, mc)| trial_rows(spec, i, s, mc))
        .collect();
    rows.sort_by(|a, b| {
        a.snr_db
            .total_cmp(&b.snr_db)
            .then(a.mc.cmp(&b.mc))
            .then(a.user.cmp(&b.user))
            .then(a.stream.cmp(&b.stream))
    });
    Ok(rows)
}

/// Aggregates for one (algorithm, power control, SNR) group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub algorithm: Algorithm,
    pub pc: PowerControl,
    pub snr_db: f64,
    pub trials: usize,
    /// Trials whose rows are not NaN.
    pub completed: usize,
    pub mean_sum_rate: f64,
    pub mean_sum_stream_rate: f64,
    pub mean_leakage: f64,
    pub mean_iters: f64,
    pub converged_fraction: f64,
    /// Mean whole-trial wall time, if recorded.
    pub mean_wall_ms: Option<f64>,
    /// Rank-ordered imbalance of the native SINRs.
    pub imbalance: Option<Imbalance>,
    /// Label-ordered imbalance of the native SINRs.
    pub imbalance_by_label: Option<Imbalance>,
    /// Rank-ordered imbalance after power control.
    pub pc_imbalance: Option<Imbalance>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub groups: Vec<GroupSummary>,
}

impl Summary {
    /// Mean of the per-SNR rank-ordered ratio of sums.
    pub fn mean_imbalance(&self) -> Option<f64> {
        let v: Vec<f64> = self.groups.iter().filter_map(|g| g.imbalance.map(|i| i.ratio_of_sums)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Mean wall time per trial across all groups.
    pub fn mean_wall_ms(&self) -> Option<f64> {
        let mut total = 0.0;
        let mut n = 0;
        for g in &self.groups {
            total += g.mean_wall_ms? * g.trials as f64;
            n += g.trials;
        }
        (n > 0).then(|| total / n as f64)
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<13} {:<5} {:>7} {:>6} {:>10} {:>10} {:>11} {:>9} {:>9} {:>9} {:>7} {:>6}",
            "algorithm", "pc", "snr_db", "trials", "sum_rate", "stream_sum", "leakage", "imb", "imb_lab", "imb_pc", "iters", "conv"
        )?;
        let imb = |i: Option<Imbalance>| i.map_or("-".to_string(), |i| format!("{:.3}", i.ratio_of_sums));
        for g in &self.groups {
            writeln!(
                f,
                "{:<13} {:<5} {:>7.1} {:>6} {:>10.3} {:>10.3} {:>11.3e} {:>9} {:>9} {:>9} {:>7.1} {:>6.2}",
                g.algorithm.name(),
                g.pc.name(),
                g.snr_db,
                g.trials,
                g.mean_sum_rate,
                g.mean_sum_stream_rate,
                g.mean_leakage,
                imb(g.imbalance),
                imb(g.imbalance_by_label),
                imb(g.pc_imbalance),
                g.mean_iters,
                g.converged_fraction
            )?;
        }
        Ok(())
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// Groups rows by (algorithm, power control, SNR) and aggregates each group.
pub fn summarize(rows: &[TrialRow]) -> Summary {
    type Key = (&'static str, PowerControl, u64);
    let mut trials: BTreeMap<Key, BTreeMap<usize, Vec<&TrialRow>>> = BTreeMap::new();
    for r in rows {
        trials
            .entry((r.algorithm.name(), r.pc, r.snr_db.to_bits()))
            .or_default()
            .entry(r.mc)
            .or_default()
            .push(r);
    }
    let mut groups: Vec<GroupSummary> = trials
        .into_values()
        .map(|by_mc| {
            let first = by_mc.values().next().expect("non-empty group")[0];
            let trial_rows: Vec<&Vec<&TrialRow>> = by_mc.values().collect();
            let done: Vec<&Vec<&TrialRow>> = trial_rows.iter().copied().filter(|t| t[0].sum_rate.is_finite()).collect();
            let report = |pick: &dyn Fn(&TrialRow) -> Option<f64>| -> Option<Vec<SinrReport>> {
                done.iter()
                    .map(|t| {
                        let users = t.iter().map(|r| r.user).max()? + 1;
                        let mut sinr = vec![Vec::new(); users];
                        for r in t.iter() {
                            sinr[r.user].push(pick(r)?);
                        }
                        Some(SinrReport {
                            sinr,
                            style: first.algorithm.sinr_style(),
                        })
                    })
                    .collect()
            };
            let native = report(&|r: &TrialRow| Some(r.sinr));
            let after = report(&|r: &TrialRow| r.pc_sinr);
            let walls: Option<Vec<f64>> = trial_rows.iter().map(|t| t[0].wall_ms).collect();
            GroupSummary {
                algorithm: first.algorithm,
                pc: first.pc,
                snr_db: first.snr_db,
                trials: trial_rows.len(),
                completed: done.len(),
                mean_sum_rate: mean(done.iter().map(|t| t[0].sum_rate)),
                mean_sum_stream_rate: mean(done.iter().map(|t| t[0].sum_stream_rate)),
                mean_leakage: mean(done.iter().map(|t| t[0].leakage)),
                mean_iters: mean(done.iter().map(|t| t[0].iters as f64)),
                converged_fraction: trial_rows.iter().filter(|t| t[0].converged).count() as f64
                    / trial_rows.len() as f64,
                mean_wall_ms: walls.map(|w| mean(w.into_iter())),
                imbalance: native.as_ref().and_then(|r| pooled_imbalance(r, true).ok()),
                imbalance_by_label: native.as_ref().and_then(|r| pooled_imbalance(r, false).ok()),
                pc_imbalance: after.as_ref().and_then(|r| pooled_imbalance(r, true).ok()),
            }
        })
        .collect();
    groups.sort_by(|a, b| {
        (a.algorithm.name(), a.pc)
            .cmp(&(b.algorithm.name(), b.pc))
            .then(a.snr_db.total_cmp(&b.snr_db))
    });
    Summary { groups }
}

/// Relative extra wall time of a power-controlled run over the same run
/// without it: `mean(with) / mean(without) − 1`. `None` if either run has
/// no timing.
pub fn dpca_overhead(with_pc: &[TrialRow], without_pc: &[TrialRow]) -> Option<f64> {
    let a = summarize(with_pc).mean_wall_ms()?;
    let b = summarize(without_pc).mean_wall_ms()?;
    (b > 0.0).then(|| a / b - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_grid_includes_stop() {
        let s = ExperimentSpec::default();
        assert_eq!(s.snr_points(), vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0]);
        let s = ExperimentSpec {
            snr_start_db: 5.0,
            snr_stop_db: 5.0,
            ..ExperimentSpec::default()
        };
        assert_eq!(s.snr_points(), vec![5.0]);
        let s = ExperimentSpec {
            snr_start_db: 0.0,
            snr_stop_db: 1.0,
            snr_step_db: 0.1,
            ..ExperimentSpec::default()
        };
        assert_eq!(s.snr_points().len(), 11);
    }

    #[test]
    fn iters_parsing() {
        assert_eq!("auto".parse::<Iters>().unwrap(), Iters::Auto);
        assert_eq!("50".parse::<Iters>().unwrap(), Iters::Fixed(50));
        assert!("0".parse::<Iters>().is_err());
        assert!("-3".parse::<Iters>().is_err());
        let s = ExperimentSpec::from_toml_str("iters = 4").unwrap();
        assert_eq!(s.iters, Iters::Fixed(4));
        let s = ExperimentSpec::from_toml_str("iters = \"auto\"").unwrap();
        assert_eq!(s.iters, Iters::Auto);
        assert!(ExperimentSpec::from_toml_str("iters = 0").is_err());
    }

    #[test]
    fn quantize_keeps_twelve_digits() {
        assert_eq!(quantize(1.0 / 3.0), 0.333333333333);
        assert_eq!(quantize(123456.7890123456), 123456.789012);
        assert_eq!(quantize(quantize(std::f64::consts::PI)), quantize(std::f64::consts::PI));
        assert!(quantize(f64::NAN).is_nan());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let ok = ExperimentSpec::default();
        assert!(ok.validate().is_ok());
        for bad in [
            ExperimentSpec { snr_step_db: 0.0, ..ok.clone() },
            ExperimentSpec { mc: 0, ..ok.clone() },
            ExperimentSpec { snr_stop_db: -1.0, ..ok.clone() },
            ExperimentSpec { epsilon: 0.0, ..ok.clone() },
            ExperimentSpec { streams: 5, ..ok.clone() },
            ExperimentSpec { power_control: PowerControl::Spca, ..ok.clone() },
            ExperimentSpec { power_control: PowerControl::Spca, rate_targets: vec![1.0, 2.0], ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }
}
