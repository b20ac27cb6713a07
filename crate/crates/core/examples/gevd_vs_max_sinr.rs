//! Group (GEVD) receive filters against per-stream max-SINR filters. With
//! one stream per user the two coincide; with two they differ.

use mimo_ic::algorithms::{Algorithm, StoppingRule};
use mimo_ic::metrics::span_sum_rate;
use mimo_ic::model::{sample_channels, snr_to_power, NetworkConfig};

fn main() -> mimo_ic::Result<()> {
    let stop = StoppingRule::FixedIterations(40);
    for d in [1, 2] {
        let m = 2 * d;
        let cfg = NetworkConfig::symmetric(3, m, m, d, snr_to_power(20.0))?;
        let h = sample_channels(&cfg, 21);
        let g = Algorithm::Gevd.run(&h, &cfg, stop, 22)?;
        let x = Algorithm::MaxSinr.run(&h, &cfg, stop, 22)?;
        println!(
            "d={d}, {m}×{m}: gevd {:.3} bits, max-SINR {:.3} bits",
            span_sum_rate(&h, &g.beamformers, &g.powers)?,
            span_sum_rate(&h, &x.beamformers, &x.powers)?
        );
        if d == 1 {
            for k in 0..3 {
                let overlap = (g.beamformers.v[k].adjoint() * &x.beamformers.v[k])[(0, 0)].norm();
                println!("  user {k}: |v_gevd† v_max-sinr| = {overlap:.12}");
            }
        }
    }
    Ok(())
}
