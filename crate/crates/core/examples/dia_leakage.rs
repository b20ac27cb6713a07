//! Distributed interference alignment on a K=3, 4×4, d=2 network: watch the
//! interference leakage fall toward zero, then compare rates.

use mimo_ic::algorithms::{Algorithm, StoppingRule};
use mimo_ic::metrics::{leakage_ratio, sum_rate};
use mimo_ic::model::{sample_channels, snr_to_power, NetworkConfig};

fn main() -> mimo_ic::Result<()> {
    let cfg = NetworkConfig::symmetric(3, 4, 4, 2, snr_to_power(20.0))?;
    let h = sample_channels(&cfg, 7);
    let d = Algorithm::Dia.run(&h, &cfg, StoppingRule::until_converged(1e-6), 8)?;

    let l = &d.trace.leakage;
    for i in std::iter::successors(Some(1), |i| Some(i * 2)).take_while(|&i| i <= l.len()) {
        println!("iter {i:>4}  leakage {:.3e}", l[i - 1]);
    }
    println!(
        "stopped after {} iterations (converged: {}); leakage ratio {:.2e}, sum rate {:.2} bits",
        d.trace.iterations,
        d.trace.converged,
        leakage_ratio(&h, &d.beamformers, &d.powers)?,
        sum_rate(&h, &d.beamformers, &d.powers)?,
    );
    Ok(())
}
