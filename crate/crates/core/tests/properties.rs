//! Randomized checks of the documented invariants.

use mimo_ic::algorithms::{Algorithm, StoppingRule};
use mimo_ic::metrics::*;
use mimo_ic::model::*;
use mimo_ic::numerics::*;
use mimo_ic::power_control::*;
use nalgebra::DVector;
use num_complex::Complex64;
use proptest::prelude::*;

fn config() -> impl Strategy<Value = NetworkConfig> {
    (1usize..=3, 2usize..=4, 2usize..=4, 1usize..=2, -5.0..30.0f64).prop_filter_map(
        "streams fit the antennas",
        |(k, m, n, d, snr)| NetworkConfig::symmetric(k, m, n, d.min(m).min(n), snr_to_power(snr)).ok(),
    )
}

/// Channels plus random precoders and receive filters.
fn instance(cfg: &NetworkConfig, seed: u64) -> (ChannelSet, Beamformers, StreamPowers) {
    let h = sample_channels(cfg, seed);
    let mut bf = random_precoders(cfg, seed ^ 1);
    bf.v = random_precoders(&cfg.reciprocal(), seed ^ 2).u;
    (h, bf, StreamPowers::even(cfg))
}

fn hpd(n: usize, seed: u64, shift: f64) -> HermitianMatrix {
    let cfg = NetworkConfig::symmetric(1, n, n, 1, 1.0).unwrap();
    let g = sample_channels(&cfg, seed).h[0][0].clone();
    HermitianMatrix::new(&g * g.adjoint() + CMat::identity(n, n) * Complex64::new(shift, 0.0)).unwrap()
}

fn random_square(n: usize, seed: u64) -> CMat {
    let cfg = NetworkConfig::symmetric(1, n, n, 1, 1.0).unwrap();
    sample_channels(&cfg, seed).h[0][0].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gevd_matches_whitened_eig(seed in any::<u64>()) {
        let r = hpd(4, seed, 0.0);
        let b = hpd(4, seed.wrapping_add(1), 0.1);
        let g = gevd_hpd(&r, &b).unwrap();
        let l = b.as_matrix().clone().cholesky().unwrap().l();
        let li = l.try_inverse().unwrap();
        let c = HermitianMatrix::new(&li * r.as_matrix() * li.adjoint()).unwrap();
        let mut e = hermitian_eig_sorted(&c).values;
        e.reverse();
        for (a, b) in g.values.iter().zip(&e) {
            prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        // pencil residual and B-orthonormality
        let resid = r.as_matrix() * &g.vectors - b.as_matrix() * &g.vectors * CMat::from_diagonal(&DVector::from_iterator(4, g.values.iter().map(|&x| Complex64::new(x, 0.0))));
        prop_assert!(resid.norm() <= 1e-9 * r.as_matrix().norm().max(1.0) * g.vectors.norm());
        let gram = g.vectors.adjoint() * b.as_matrix() * &g.vectors;
        prop_assert!((gram - CMat::identity(4, 4)).norm() < 1e-9);
        // bitwise determinism
        prop_assert_eq!(gevd_hpd(&r, &b).unwrap(), g);
    }

    #[test]
    fn generation_is_a_function_of_the_seed(cfg in config(), seed in any::<u64>()) {
        prop_assert_eq!(sample_channels(&cfg, seed), sample_channels(&cfg, seed));
        let bf = random_precoders(&cfg, seed);
        prop_assert_eq!(&bf, &random_precoders(&cfg, seed));
        prop_assert!(bf.u.iter().all(|u| (u.adjoint() * u - CMat::identity(u.ncols(), u.ncols())).norm() < 1e-12));
    }

    #[test]
    fn covariance_identity(cfg in config(), seed in any::<u64>()) {
        let (h, bf, p) = instance(&cfg, seed);
        for k in 0..cfg.users() {
            let inter = interference_covariance(k, &h, &bf, &p, false, None).unwrap();
            let mut intra = CMat::zeros(inter.dim(), inter.dim());
            for l in 0..cfg.streams[k] {
                intra += stream_covariance(k, l, &h, &bf, &p).unwrap().as_matrix();
            }
            for l in 0..cfg.streams[k] {
                let lhs = interference_covariance(k, &h, &bf, &p, true, Some(l)).unwrap().into_matrix()
                    + stream_covariance(k, l, &h, &bf, &p).unwrap().as_matrix()
                    - inter.as_matrix();
                prop_assert!((lhs - &intra).norm() <= 1e-12 * intra.norm().max(1.0) * 10.0);
            }
            prop_assert!(leakage(k, &h, &bf, &p).unwrap() >= 0.0);
        }
    }

    #[test]
    fn user_rate_depends_only_on_the_span(cfg in config(), seed in any::<u64>()) {
        let (h, mut bf, p) = instance(&cfg, seed);
        for k in 0..cfg.users() {
            let before = user_rate(k, &h, &bf, &p).unwrap();
            let d = cfg.streams[k];
            let t = random_square(d, seed ^ 0xabc) + CMat::identity(d, d) * Complex64::new(0.5, 0.0);
            prop_assume!(t.determinant().norm() > 1e-3);
            bf.v[k] = &bf.v[k] * &t;
            let after = user_rate(k, &h, &bf, &p).unwrap();
            prop_assert!((before - after).abs() <= 1e-9 * before.max(1.0));
            prop_assert!(before >= 0.0);
            prop_assert!((span_user_rate(k, &h, &bf, &p).unwrap() - after).abs() <= 1e-9 * after.max(1.0));
        }
    }

    #[test]
    fn single_stream_sinrs_are_the_top_generalized_eigenvalue(seed in any::<u64>(), snr in 0.0..30.0f64) {
        let cfg = NetworkConfig::symmetric(3, 3, 3, 1, snr_to_power(snr)).unwrap();
        let (h, mut bf, p) = instance(&cfg, seed);
        for k in 0..3 {
            let r = user_covariance(k, &h, &bf, &p).unwrap();
            let b = interference_plus_noise(k, &h, &bf, &p).unwrap();
            let g = gevd_hpd(&r, &b).unwrap();
            let mut v = g.vectors.columns(0, 1).into_owned();
            normalize_columns(&mut v);
            bf.v[k] = v;
            let sf = sinr_sf(k, 0, &h, &bf, &p).unwrap();
            let gf = sinr_gf(k, 0, &h, &bf, &p).unwrap();
            prop_assert!((sf - g.values[0]).abs() <= 1e-8 * g.values[0].max(1.0));
            prop_assert!((gf - g.values[0]).abs() <= 1e-8 * g.values[0].max(1.0));
        }
    }

    #[test]
    fn imbalance_is_scale_free(a in 0.01..100.0f64, b in 0.01..100.0f64, c in 0.01..100.0f64, s in 0.01..100.0f64) {
        let rep = SinrReport { sinr: vec![vec![a, b], vec![c, a]], style: SinrStyle::Separate };
        let scaled = SinrReport { sinr: rep.sinr.iter().map(|r| r.iter().map(|x| x * s).collect()).collect(), ..rep.clone() };
        let i = imbalance_ratio(&rep).unwrap();
        let j = imbalance_ratio(&scaled).unwrap();
        prop_assert!((i.ratio_of_sums - j.ratio_of_sums).abs() < 1e-12 * i.ratio_of_sums);
        // ranked order never reports the weaker stream second
        prop_assert!(i.ratio_of_sums >= 1.0 - 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_algorithm_keeps_unit_columns(cfg in config(), seed in any::<u64>(), n in 1usize..12) {
        for alg in Algorithm::ALL {
            let d = alg.run(&sample_channels(&cfg, seed), &cfg, StoppingRule::FixedIterations(n), seed ^ 9).unwrap();
            prop_assert_eq!(d.trace.iterations, n);
            prop_assert!(d.beamformers.u.iter().all(|u| u.column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-10)));
            prop_assert!(d.powers.within_budget(&cfg));
        }
    }

    #[test]
    fn epsilon_rule_stops_on_a_small_increment(seed in any::<u64>(), snr in 0.0..30.0f64) {
        let cfg = NetworkConfig::symmetric(3, 3, 3, 1, snr_to_power(snr)).unwrap();
        let eps = 1e-4;
        for alg in [Algorithm::Dia, Algorithm::MaxSinr, Algorithm::Gevd] {
            let d = alg.run(&sample_channels(&cfg, seed), &cfg, StoppingRule::until_converged(eps), seed).unwrap();
            let r = &d.trace.sum_rate;
            if d.trace.converged {
                let n = r.len();
                prop_assert!(n % 2 == 1);
                prop_assert!((r[n - 1] - r[n - 3]).abs() <= eps);
            } else {
                prop_assert_eq!(r.len(), 2000);
            }
        }
    }

    #[test]
    fn dia_leakage_never_increases_per_round(cfg in config(), seed in any::<u64>()) {
        let d = Algorithm::Dia.run(&sample_channels(&cfg, seed), &cfg, StoppingRule::FixedIterations(30), seed).unwrap();
        let l = &d.trace.leakage;
        for i in (2..l.len()).step_by(2) {
            prop_assert!(l[i] <= l[i - 2] * (1.0 + 1e-9) + 1e-12, "{} -> {}", l[i - 2], l[i]);
        }
    }

    #[test]
    fn min_sum_mse_never_increases(cfg in config(), seed in any::<u64>()) {
        let d = Algorithm::MinSumMse.run(&sample_channels(&cfg, seed), &cfg, StoppingRule::FixedIterations(20), seed).unwrap();
        for w in d.trace.sum_mse.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].max(1.0));
        }
    }

    #[test]
    fn dpca_respects_budgets_and_equalizes(seed in any::<u64>(), snr in 0.0..30.0f64) {
        let cfg = NetworkConfig::symmetric(3, 4, 4, 2, snr_to_power(snr)).unwrap();
        let h = sample_channels(&cfg, seed);
        let d = Algorithm::MaxSinr.run(&h, &cfg, StoppingRule::FixedIterations(20), seed).unwrap();
        let rep = SinrReport::evaluate(SinrStyle::Separate, &h, &d.beamformers, &d.powers).unwrap();
        let out = adhoc_dpca(&h, &d.beamformers, &cfg, &rep, 1e-6, DpcaCaps::default()).unwrap();
        prop_assert!(out.powers.within_budget(&cfg));
        prop_assert!(out.powers.p.iter().flatten().all(|&p| p >= 0.0));
        if out.converged {
            for k in 0..3 {
                prop_assert!(out.sinr.user_spread(k) <= 1e-6);
            }
            prop_assert!(*out.trace.inner_converged.last().unwrap());
        }
    }

    #[test]
    fn spca_interference_function_is_standard(seed in any::<u64>(), a in prop::collection::vec(0.0..100.0f64, 3), extra in prop::collection::vec(0.0..50.0f64, 3), alpha in 1.01..10.0f64) {
        let cfg = NetworkConfig::symmetric(3, 4, 4, 2, 10.0).unwrap();
        let (h, bf, p) = instance(&cfg, seed);
        let bf = whiten_receivers(&h, &bf, &p).unwrap();
        let b: Vec<f64> = a.iter().zip(&extra).map(|(x, e)| x + e).collect();
        let scaled: Vec<f64> = a.iter().map(|x| x * alpha).collect();
        for k in 0..3 {
            let ia = interference_function(k, &h, &bf, &cfg, &a, 3.0).unwrap();
            let ib = interference_function(k, &h, &bf, &cfg, &b, 3.0).unwrap();
            let is = interference_function(k, &h, &bf, &cfg, &scaled, 3.0).unwrap();
            prop_assert!(ib >= ia * (1.0 - 1e-12));
            prop_assert!(alpha * ia > is);
            prop_assert!(ia > 0.0);
        }
    }
}
