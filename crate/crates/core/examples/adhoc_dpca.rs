//! Ad-hoc per-stream power control on top of max-SINR beamformers: each
//! user's streams are driven to a common SINR.

use mimo_ic::algorithms::{Algorithm, StoppingRule};
use mimo_ic::metrics::{SinrReport, SinrStyle};
use mimo_ic::model::{sample_channels, snr_to_power, NetworkConfig};
use mimo_ic::power_control::{adhoc_dpca, DpcaCaps};

fn main() -> mimo_ic::Result<()> {
    let cfg = NetworkConfig::symmetric(3, 4, 4, 2, snr_to_power(20.0))?;
    let h = sample_channels(&cfg, 41);
    let d = Algorithm::MaxSinr.run(&h, &cfg, StoppingRule::FixedIterations(50), 42)?;
    let before = SinrReport::evaluate(SinrStyle::Separate, &h, &d.beamformers, &d.powers)?;
    let out = adhoc_dpca(&h, &d.beamformers, &cfg, &before, 1e-6, DpcaCaps::default())?;

    println!("converged: {} after {} outer iterations", out.converged, out.trace.outer_iterations());
    for k in 0..cfg.users() {
        println!(
            "user {k}: SINR {:.3} / {:.3} -> {:.3} / {:.3}, powers {:.3} / {:.3} (budget {:.1})",
            before.sinr[k][0],
            before.sinr[k][1],
            out.sinr.sinr[k][0],
            out.sinr.sinr[k][1],
            out.powers.p[k][0],
            out.powers.p[k][1],
            cfg.power[k]
        );
    }
    Ok(())
}
