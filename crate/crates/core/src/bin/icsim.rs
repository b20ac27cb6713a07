//! Command-line front end for [`mimo_ic::harness`]. Flags override values
//! from `--config`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mimo_ic::algorithms::Algorithm;
use mimo_ic::harness::{run_experiment, summarize, write_csv, write_csv_file, ExperimentSpec, Iters, PowerControl};

#[derive(Debug, Parser)]
#[command(name = "icsim", about = "Monte-Carlo sweeps of MIMO interference-channel transceiver designs")]
struct Cli {
    /// TOML file with experiment keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved experiment as TOML and exit
    #[arg(long)]
    print_config: bool,
    /// Print a per-SNR summary table to stderr
    #[arg(long)]
    summary: bool,

    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    tx_antennas: Option<usize>,
    #[arg(long)]
    rx_antennas: Option<usize>,
    #[arg(long)]
    streams: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    snr_start_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_stop_db: Option<f64>,
    #[arg(long)]
    snr_step_db: Option<f64>,
    #[arg(long)]
    mc: Option<usize>,
    /// dia | max-sinr | max-sinr-mod | gevd | min-sum-mse
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// Positive iteration count or "auto"
    #[arg(long)]
    iters: Option<Iters>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// none | adhoc | spca
    #[arg(long)]
    power_control: Option<PowerControl>,
    /// Comma-separated per-user rate targets in bits (spca)
    #[arg(long, value_delimiter = ',')]
    rate_targets: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall times (true|false)
    #[arg(long)]
    timing: Option<bool>,
}

impl Cli {
    fn resolve(self) -> mimo_ic::Result<(ExperimentSpec, bool, bool)> {
        let mut s = match &self.config {
            Some(p) => ExperimentSpec::from_file(p)?,
            None => ExperimentSpec::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { s.$f = v; })*};
        }
        set!(
            users,
            tx_antennas,
            rx_antennas,
            streams,
            snr_start_db,
            snr_stop_db,
            snr_step_db,
            mc,
            algorithm,
            iters,
            epsilon,
            power_control,
            rate_targets,
            seed,
            timing
        );
        if self.out.is_some() {
            s.out = self.out;
        }
        s.validate()?;
        Ok((s, self.print_config, self.summary))
    }
}

fn run() -> mimo_ic::Result<()> {
    let (spec, print_config, summary) = Cli::parse().resolve()?;
    if print_config {
        print!("{}", spec.to_toml());
        return Ok(());
    }
    let rows = run_experiment(&spec)?;
    match &spec.out {
        Some(p) => write_csv_file(&rows, p)?,
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    if summary {
        eprint!("{}", summarize(&rows));
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("icsim: {e}");
            ExitCode::FAILURE
        }
    }
}
