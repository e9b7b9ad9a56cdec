use num_complex::Complex64;
use proptest::prelude::*;
use triality_core::interferometer::{
    phase_average_variance, visibility_from_variance, ChannelModel, VarianceMethod,
};
use triality_core::measures::{
    distinguishability, entanglement, measure_report, pairwise_distinguishability, pairwise_entanglement,
    pairwise_predictability, pairwise_visibility, predictability, rms_reconstruct, visibility, RmsMode,
};
use triality_core::oracles::variance_bruteforce;
use triality_core::states::{
    apply_phases, block_paths, couple_detector, density_from_ensemble, density_from_pure, random_gram, random_mixed,
    random_pure, Ensemble, PathMask, PhaseVector,
};
use triality_core::{DetectorGram, QuantonState};

fn instance(n: usize, seed: u64, mixed: bool) -> (QuantonState, DetectorGram) {
    let s = if mixed {
        random_mixed(n, 2 + (seed % 3) as usize, seed).unwrap()
    } else {
        density_from_pure(&random_pure(n, seed).unwrap()).unwrap()
    };
    let g = random_gram(n, 1 + (seed % 4) as usize, seed ^ 0xa5a5).unwrap();
    (s, g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn measures_lie_in_unit_interval(n in 2usize..7, seed in any::<u64>(), mixed in any::<bool>()) {
        let (s, g) = instance(n, seed, mixed);
        let r = measure_report(&s, &g).unwrap();
        for v in [r.visibility, r.predictability, r.distinguishability, r.entanglement, r.distinguishability_uqsd] {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v), "{r:?}");
        }
        prop_assert!(r.triality_residual.abs() < 1e-10);
    }

    #[test]
    fn detector_never_raises_visibility(n in 2usize..7, seed in any::<u64>(), mixed in any::<bool>()) {
        let (s, g) = instance(n, seed, mixed);
        let reduced = couple_detector(&s, &g).unwrap();
        prop_assert!(visibility(&reduced) <= visibility(&s) + 1e-12);
        prop_assert!((predictability(&reduced).unwrap() - predictability(&s).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn distinguishability_bounds(n in 2usize..7, seed in any::<u64>()) {
        let (s, g) = instance(n, seed, false);
        let d = distinguishability(&s, &g).unwrap();
        let p = predictability(&s).unwrap();
        prop_assert!(d + 1e-12 >= p);
        let ortho = distinguishability(&s, &DetectorGram::orthonormal(n).unwrap()).unwrap();
        prop_assert!((ortho - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phases_leave_measures_unchanged(n in 2usize..7, seed in any::<u64>(), theta in prop::collection::vec(0.0f64..7.0, 7)) {
        let (s, g) = instance(n, seed, true);
        let ph = PhaseVector::new(theta[..n].to_vec()).unwrap();
        let t = apply_phases(&s, &ph).unwrap();
        prop_assert!((visibility(&t) - visibility(&s)).abs() < 1e-12);
        prop_assert!((distinguishability(&t, &g).unwrap() - distinguishability(&s, &g).unwrap()).abs() < 1e-12);
        prop_assert!((t.purity() - s.purity()).abs() < 1e-12);
    }

    #[test]
    fn weighted_reconstruction_is_exact(n in 2usize..7, seed in any::<u64>(), mixed in any::<bool>()) {
        let (s, g) = instance(n, seed, mixed);
        let reduced = couple_detector(&s, &g).unwrap();
        let v = rms_reconstruct(&pairwise_visibility(&reduced).unwrap(), RmsMode::Weighted).unwrap();
        let p = rms_reconstruct(&pairwise_predictability(&reduced).unwrap(), RmsMode::Weighted).unwrap();
        let d = rms_reconstruct(&pairwise_distinguishability(&s, &g).unwrap(), RmsMode::Weighted).unwrap();
        let e = rms_reconstruct(&pairwise_entanglement(&reduced).unwrap(), RmsMode::Weighted).unwrap();
        prop_assert!((v.value - visibility(&reduced)).abs() < 1e-9);
        prop_assert!((p.value - predictability(&reduced).unwrap()).abs() < 1e-9);
        prop_assert!((d.value - distinguishability(&s, &g).unwrap()).abs() < 1e-9);
        prop_assert!((e.value - entanglement(&reduced).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn pairs_of_a_pure_state_block_to_pure_states(n in 3usize..7, seed in any::<u64>(), i in 0usize..7, j in 0usize..7) {
        prop_assume!(i < n && j < n && i != j);
        let s = density_from_pure(&random_pure(n, seed).unwrap()).unwrap();
        let b = block_paths(&s, &PathMask::pair(i, j, n).unwrap()).unwrap();
        prop_assert_eq!(b.n(), 2);
        prop_assert!((b.purity() - 1.0).abs() < 1e-12);
        prop_assert!((visibility(&b) - pairwise_visibility(&s).unwrap().value(i, j).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_and_bruteforce_match_exact_variance(n in 2usize..5, seed in any::<u64>(), points in 3usize..6) {
        let (s, _) = instance(n, seed, seed % 2 == 0);
        let ch = ChannelModel::uniform(n).unwrap();
        let exact = phase_average_variance(&s, &ch, VarianceMethod::Exact).unwrap().value;
        let quad = phase_average_variance(&s, &ch, VarianceMethod::Quadrature { points }).unwrap().value;
        let brute = variance_bruteforce(&s, &ch, points).unwrap();
        prop_assert!((quad - exact).abs() < 1e-12);
        prop_assert!((brute - exact).abs() < 1e-12);
        prop_assert!((visibility_from_variance(exact, n).unwrap() - visibility(&s)).abs() < 1e-10);
    }

    #[test]
    fn ensemble_density_is_weighted_mixture(n in 2usize..6, seed in any::<u64>(), w in 0.05f64..0.95) {
        let a = random_pure(n, seed).unwrap();
        let b = random_pure(n, seed.wrapping_add(1)).unwrap();
        let mixed = density_from_ensemble(&Ensemble::new(vec![(w, a.clone()), (1.0 - w, b.clone())]).unwrap()).unwrap();
        let ra = density_from_pure(&a).unwrap();
        let rb = density_from_pure(&b).unwrap();
        let expect = ra.rho().scale(Complex64::new(w, 0.0)).add(&rb.rho().scale(Complex64::new(1.0 - w, 0.0))).unwrap();
        prop_assert!(mixed.rho().max_abs_diff(&expect) < 1e-12);
        prop_assert!(mixed.purity() <= 1.0 + 1e-12);
    }
}

#[test]
fn random_generators_are_seed_deterministic() {
    assert_eq!(random_pure(5, 9).unwrap(), random_pure(5, 9).unwrap());
    assert_ne!(random_pure(5, 9).unwrap(), random_pure(5, 10).unwrap());
    assert_eq!(random_mixed(4, 3, 2).unwrap(), random_mixed(4, 3, 2).unwrap());
    assert_eq!(random_gram(4, 2, 3).unwrap(), random_gram(4, 2, 3).unwrap());
}
