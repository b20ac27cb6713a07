//! Standard (fixed-point) power control that meets per-user rate targets
//! with the least power, and reports infeasible targets.

use mimo_ic::algorithms::{Algorithm, StoppingRule};
use mimo_ic::model::{sample_channels, snr_to_power, NetworkConfig};
use mimo_ic::power_control::{user_fairness_spca, SpcaCaps};

fn main() -> mimo_ic::Result<()> {
    let cfg = NetworkConfig::symmetric(3, 4, 4, 2, snr_to_power(20.0))?;
    let h = sample_channels(&cfg, 51);
    let d = Algorithm::Gevd.run(&h, &cfg, StoppingRule::FixedIterations(50), 52)?;
    for target in [2.0, 6.0, 60.0] {
        match user_fairness_spca(&h, &d.beamformers, &cfg, &[target; 3], SpcaCaps::default()) {
            Ok(out) => println!(
                "target {target} bits/user: powers {:.3?} after {} iterations (budget {:.0} each)",
                out.user_powers, out.iterations, cfg.power[0]
            ),
            Err(e) => println!("target {target} bits/user: {e}"),
        }
    }
    Ok(())
}
