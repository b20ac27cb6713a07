//! Minimum sum-MSE transceivers: the MSE trace falls monotonically and the
//! streams end up with comparable SINRs.

use mimo_ic::algorithms::{Algorithm, StoppingRule};
use mimo_ic::metrics::{SinrReport, SinrStyle};
use mimo_ic::model::{sample_channels, snr_to_power, NetworkConfig};

fn main() -> mimo_ic::Result<()> {
    let cfg = NetworkConfig::symmetric(3, 4, 4, 2, snr_to_power(20.0))?;
    let h = sample_channels(&cfg, 31);
    let d = Algorithm::MinSumMse.run(&h, &cfg, StoppingRule::FixedIterations(50), 32)?;
    for (i, m) in d.trace.sum_mse.iter().enumerate().step_by(10) {
        println!("iter {i:>3}  sum MSE {m:.5}");
    }
    let rep = SinrReport::evaluate(SinrStyle::InterUser, &h, &d.beamformers, &d.powers)?;
    for (k, s) in rep.sinr.iter().enumerate() {
        println!("user {k}: stream SINRs {:.2} {:.2}", s[0], s[1]);
    }
    Ok(())
}
