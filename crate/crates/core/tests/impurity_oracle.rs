use proptest::prelude::*;
use quenchlab_core::fermi_impurity::ed::{ed_persistence, ed_work_distribution};
use quenchlab_core::fermi_impurity::{
    absorption_spectrum, anderson_overlap, broadened_lehmann, build_impurity_model, persistence_determinant,
    persistence_time_grid, work_cumulants, Dispersion,
};
use quenchlab_core::numerics::linspace;
use quenchlab_core::spectral_core::{characteristic_function, cumulants, Beta};

#[test]
fn determinants_match_fock_space() {
    let t = linspace(0.0, 8.0, 81);
    for disp in [Dispersion::Linear { spacing: 1.0 }, Dispersion::Box { scale: 0.25 }] {
        let model = build_impurity_model(6, 3, disp, 1.9).unwrap();
        for beta in [Beta::GroundState, Beta::Finite(2.0)] {
            let det = persistence_determinant(&model, &t, beta).unwrap();
            let ed = ed_persistence(&model, &t, beta).unwrap();
            for (a, b) in det.nu.iter().zip(&ed) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn persistence_is_conjugate_characteristic_function() {
    let model = build_impurity_model(8, 4, Dispersion::Linear { spacing: 0.7 }, -1.2).unwrap();
    let t = linspace(0.0, 5.0, 26);
    let nu = persistence_determinant(&model, &t, Beta::GroundState).unwrap().nu;
    let g = characteristic_function(&ed_work_distribution(&model, Beta::GroundState).unwrap(), &t);
    for (a, b) in nu.iter().zip(&g) {
        assert!((a - b.conj()).norm() < 1e-10);
    }
}

#[test]
fn windowed_spectrum_is_broadened_work_distribution() {
    let model = build_impurity_model(6, 3, Dispersion::Linear { spacing: 1.0 }, 1.7).unwrap();
    let eta = 0.3;
    let t = persistence_time_grid(&model, eta, 1e-12).unwrap();
    let s = persistence_determinant(&model, &t, Beta::GroundState).unwrap();
    let x = linspace(-2.0, 12.0, 281);
    let a = absorption_spectrum(&s, &x, eta).unwrap();
    let lehmann = broadened_lehmann(&ed_work_distribution(&model, Beta::GroundState).unwrap(), &x, eta);
    for (p, q) in a.a_values.iter().zip(&lehmann) {
        assert!((p - q).abs() / (2.0 * std::f64::consts::PI) < 1e-6);
    }
    assert!((a.sum_rule - 1.0).abs() < 0.05);
}

#[test]
fn closed_form_cumulants_match_ed() {
    for v in [0.8, -2.0] {
        let model = build_impurity_model(7, 3, Dispersion::Box { scale: 0.3 }, v).unwrap();
        let d = ed_work_distribution(&model, Beta::GroundState).unwrap();
        let k = cumulants(&d, 3).unwrap();
        let c = work_cumulants(&model);
        for (a, b) in k.iter().zip(c) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn persistence_is_bounded(m in 2usize..24, frac in 0.1f64..0.9, v in -20.0f64..20.0, t in 0.0f64..30.0) {
        let n = ((m as f64 * frac).round() as usize).clamp(1, m);
        let model = build_impurity_model(m, n, Dispersion::Linear { spacing: 1.0 }, v).unwrap();
        let s = persistence_determinant(&model, &[0.0, t], Beta::GroundState).unwrap();
        prop_assert_eq!(s.nu[0].re, 1.0);
        prop_assert!(s.nu[1].norm() <= 1.0 + 1e-9);
        let f = anderson_overlap(&model);
        prop_assert!(f > 0.0 && f <= 1.0);
        prop_assert!(model.phase_shift.abs() < std::f64::consts::FRAC_PI_2);
    }
}
