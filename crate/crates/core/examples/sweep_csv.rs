//! A small Monte-Carlo sweep through the experiment harness: write the CSV
//! to stdout and a summary table to stderr.

use mimo_ic::algorithms::Algorithm;
use mimo_ic::harness::{run_experiment, summarize, write_csv, ExperimentSpec, Iters, PowerControl};

fn main() -> mimo_ic::Result<()> {
    let spec = ExperimentSpec {
        mc: 4,
        snr_step_db: 20.0,
        algorithm: Algorithm::MaxSinr,
        iters: Iters::Fixed(30),
        power_control: PowerControl::Adhoc,
        timing: false,
        ..ExperimentSpec::default()
    };
    eprint!("{}", spec.to_toml());
    let rows = run_experiment(&spec)?;
    write_csv(&rows, std::io::stdout().lock())?;
    eprint!("{}", summarize(&rows));
    Ok(())
}
