//! Property tests over randomly drawn measures and targets.

use natural_spectrum::decomposition::{decompose, DecompositionOptions, RadiusMode};
use natural_spectrum::io::{measure_from_json, measure_to_json};
use natural_spectrum::kronecker::{disk_preimage, hit_target, rho_hat, Parity, TargetOptions};
use natural_spectrum::measure::{MixedMeasure, PowerBudget, TransformEvaluator, C64};
use natural_spectrum::random::{random_mixed, RandomMeasureSpec};
use natural_spectrum::spectrum::fekete_bound;
use natural_spectrum::suite::SQRT_3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mixed(seed: u64) -> MixedMeasure {
    random_mixed(
        &mut ChaCha8Rng::seed_from_u64(seed),
        &RandomMeasureSpec::default(),
    )
}

fn pair(seed: u64) -> (MixedMeasure, MixedMeasure) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomMeasureSpec::default();
    let a = random_mixed(&mut rng, &spec);
    let b = random_mixed(&mut rng, &spec)
        .rebase(a.basis().clone())
        .unwrap();
    (a, b)
}

fn small_budget() -> PowerBudget {
    PowerBudget {
        max_pairs: 1 << 16,
        ..PowerBudget::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disk_preimage_lands_on_the_circle(r in 0.0f64..=1.0, t in 0.0f64..std::f64::consts::TAU) {
        let w = C64::from_polar(r, t);
        let (z, u) = disk_preimage(w).unwrap();
        prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        prop_assert!((u.norm() - 1.0).abs() < 1e-12);
        prop_assert!(((z + u) / 2.0 - w).norm() < 1e-12);
    }

    #[test]
    fn disk_preimage_rejects_the_outside(r in 1.001f64..10.0, t in 0.0f64..std::f64::consts::TAU) {
        prop_assert!(disk_preimage(C64::from_polar(r, t)).is_err());
    }

    #[test]
    fn convolution_multiplies_coefficients(seed in any::<u64>(), n in -64i64..=64) {
        let (a, b) = pair(seed);
        let ab = a.convolve(&b).unwrap();
        let lhs = ab.fourier_coefficient(n);
        let rhs = a.fourier_coefficient(n) * b.fourier_coefficient(n);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
    }

    #[test]
    fn convolution_commutes(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let ab = a.convolve(&b).unwrap();
        let ba = b.convolve(&a).unwrap();
        prop_assert!(ab.sub(&ba).unwrap().tv_norm().value < 1e-12);
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>()) {
        let mu = mixed(seed);
        prop_assert_eq!(measure_from_json(&measure_to_json(&mu)).unwrap(), mu);
    }

    #[test]
    fn transform_and_bound_scale_with_the_measure(
        seed in any::<u64>(),
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let c = C64::new(re, im);
        prop_assume!(c.norm() > 1e-3);
        let mu = mixed(seed);
        let scaled = mu.scale(c);
        let (ev, ev_s) = (TransformEvaluator::new(&mu), TransformEvaluator::new(&scaled));
        for n in -16..=16 {
            let want = c * ev.coefficient(n);
            prop_assert!((ev_s.coefficient(n) - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
        let r = fekete_bound(&mu, 3, 0.0, &small_budget()).final_bound;
        let rs = fekete_bound(&scaled, 3, 0.0, &small_budget()).final_bound;
        prop_assert!((rs - c.norm() * r).abs() <= 1e-9 * (1.0 + rs), "{rs} vs {}", c.norm() * r);
    }

    #[test]
    fn fekete_bound_is_the_running_minimum(seed in any::<u64>()) {
        let mu = mixed(seed);
        let rep = fekete_bound(&mu, 4, 0.0, &small_budget());
        let min = rep.sequence.iter().map(|s| s.r).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(rep.final_bound, min);
        let ev = TransformEvaluator::new(&mu);
        let sup = (-64..=64).map(|n| ev.coefficient(n).norm()).fold(0.0, f64::max);
        prop_assert!(sup <= rep.final_bound + 1e-9, "{sup} > {}", rep.final_bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hit_target_respects_parity(
        r in 0.0f64..0.95,
        t in 0.0f64..std::f64::consts::TAU,
        parity in prop_oneof![Just(Parity::Any), Just(Parity::Even), Just(Parity::Odd)],
    ) {
        let (alpha, beta) = (std::f64::consts::SQRT_2, SQRT_3);
        let w = C64::from_polar(r, t);
        let hit = hit_target(alpha, beta, w, 0.05, &TargetOptions { parity, ..TargetOptions::default() }).unwrap();
        prop_assert!(parity.admits(hit.n));
        prop_assert!(hit.distance < 0.05);
        let value = rho_hat(alpha, beta, hit.n);
        prop_assert!(((value - w).norm() - hit.distance).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decomposition_scales_with_positive_factors(seed in any::<u64>(), c in 0.1f64..5.0) {
        let mu = mixed(seed);
        let r = mu.tv_norm().upper();
        let manual = |r: f64| DecompositionOptions {
            radius_mode: RadiusMode::Manual { r0: r, r1: r },
            ..DecompositionOptions::default()
        };
        let base = decompose(&mu, &manual(r)).unwrap();
        let scaled = decompose(&mu.scale_real(c), &manual(c * r)).unwrap();
        let pairs = [
            (&scaled.nu0, &base.nu0),
            (&scaled.nu1, &base.nu1),
        ];
        for (s, b) in pairs {
            let gap = s.sub(&b.scale_real(c)).unwrap().tv_norm().upper();
            prop_assert!(gap <= 1e-12 * (1.0 + c * r), "{gap}");
        }
        let nu2 = scaled.nu2.sub(&base.nu2.scale_real(c)).unwrap();
        prop_assert!(nu2.norm() <= 1e-12 * (1.0 + c * r));
        prop_assert_eq!(scaled.nu2.len(), base.nu2.len());
    }
}
