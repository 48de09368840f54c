use num_complex::Complex64;
use proptest::prelude::*;
use quenchlab_core::spectral_core::random::{random_hermitian, random_unitary};
use quenchlab_core::spectral_core::{
    characteristic_function, characteristic_function_trace, cumulant_entropy_series, eigendecompose,
    entropy_production, tpm_distribution, Beta, QuenchSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quench(seed: u64, dim: usize, beta: f64, unitary: bool) -> QuenchSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = eigendecompose(random_hermitian(dim, 1.0, &mut rng)).unwrap();
    let hf = eigendecompose(random_hermitian(dim, 1.0, &mut rng)).unwrap();
    let u = unitary.then(|| random_unitary(dim, &mut rng));
    QuenchSpec::new(h0, hf, u, Beta::Finite(beta)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identities_hold_for_random_pairs(seed in any::<u64>(), dim in 2usize..=6, beta in 0.05f64..6.0, unitary in any::<bool>()) {
        let q = quench(seed, dim, beta, unitary);
        let d = tpm_distribution(&q).unwrap();
        prop_assert!((d.total_probability() - 1.0).abs() < 1e-10);
        let r = entropy_production(&q).unwrap();
        prop_assert!(r.jarzynski_residual.abs() < 1e-9);
        prop_assert!((r.s_irr - r.relative_entropy).abs() < 1e-8 * r.s_irr.abs().max(1.0));
        prop_assert!(r.s_irr >= -1e-12);
        prop_assert!(r.pinsker_holds());
        prop_assert!(r.trace_distance <= 1.0 + 1e-12);
    }

    #[test]
    fn characteristic_function_routes_agree(seed in any::<u64>(), dim in 2usize..=5, beta in 0.1f64..3.0) {
        let q = quench(seed, dim, beta, true);
        let u: Vec<f64> = (0..9).map(|k| -2.0 + 0.5 * k as f64).collect();
        let a = characteristic_function(&tpm_distribution(&q).unwrap(), &u);
        let b = characteristic_function_trace(&q, &u).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() < 1e-10);
        }
        prop_assert!((a[4] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn cumulant_series_converges_for_narrow_work_ranges() {
    let mut checked = 0;
    for seed in 0..200u64 {
        let q = quench(seed, 3, 1.0, false);
        let d = tpm_distribution(&q).unwrap();
        let beta = 0.9 / (d.max_work() - d.min_work());
        let q = QuenchSpec::sudden(q.initial.clone(), q.final_.clone(), Beta::Finite(beta)).unwrap();
        let r = entropy_production(&q).unwrap();
        let series = cumulant_entropy_series(&r.cumulants, beta);
        assert!((series - r.s_irr).abs() < 1e-6, "seed {seed}: {series} vs {}", r.s_irr);
        checked += 1;
    }
    assert_eq!(checked, 200);
}
