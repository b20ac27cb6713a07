//! Max-SINR designs maximize each stream's SINR on its own, which leaves the
//! two streams of a user unequal. Print per-stream SINRs and the imbalance.

use mimo_ic::algorithms::{Algorithm, StoppingRule};
use mimo_ic::metrics::{imbalance_ratio, imbalance_ratio_by_label, SinrReport, SinrStyle};
use mimo_ic::model::{sample_channels, snr_to_power, NetworkConfig};

fn main() -> mimo_ic::Result<()> {
    for snr in [0.0, 30.0, 60.0] {
        let cfg = NetworkConfig::symmetric(3, 4, 4, 2, snr_to_power(snr))?;
        let h = sample_channels(&cfg, 11);
        let d = Algorithm::MaxSinr.run(&h, &cfg, StoppingRule::until_converged(1e-6), 12)?;
        let rep = SinrReport::evaluate(SinrStyle::Separate, &h, &d.beamformers, &d.powers)?;
        println!("{snr} dB:");
        for (k, s) in rep.sinr.iter().enumerate() {
            println!("  user {k}: stream SINRs {:.3e} {:.3e}", s[0], s[1]);
        }
        println!(
            "  imbalance: ranked {:.3}, by label {:.3}",
            imbalance_ratio(&rep)?.ratio_of_sums,
            imbalance_ratio_by_label(&rep)?.ratio_of_sums
        );
    }
    Ok(())
}
