//! Built-in invariant suite behind `quenchlab check`.

use std::time::Instant;

use quenchlab_core::fermi_impurity::ed::{ed_persistence, ed_work_distribution};
use quenchlab_core::fermi_impurity::{
    absorption_spectrum, broadened_lehmann, build_impurity_model, persistence_determinant, persistence_time_grid,
    Dispersion,
};
use quenchlab_core::ising_chain::{build_modes, ed_oracle_g, ising_dense_family, ising_film, ising_g_exact};
use quenchlab_core::large_dev::{legendre_fenchel, legendre_fenchel_inverse, rate_function, RateConfig};
use quenchlab_core::numerics::linspace;
use quenchlab_core::spectral_core::random::{random_hermitian, random_unitary};
use quenchlab_core::spectral_core::{
    cumulant_entropy_series, eigendecompose, entropy_production, thermal_sudden_work, tpm_distribution, Beta,
    QuenchSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::Scenario;
use crate::emit::sha256_hex;
use crate::runner::render;
use crate::scenario::{execute, prepare};

type Outcome = std::result::Result<String, String>;

pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fluctuation_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 2];
    for i in 0..60 {
        let dim = 2 + i % 5;
        let beta = [0.2, 1.0, 5.0][i % 3];
        let h0 = eigendecompose(random_hermitian(dim, 1.0, &mut rng)).map_err(fail)?;
        let hf = eigendecompose(random_hermitian(dim, 1.0, &mut rng)).map_err(fail)?;
        let u = (i % 2 == 1).then(|| random_unitary(dim, &mut rng));
        let q = QuenchSpec::new(h0, hf, u, Beta::Finite(beta)).map_err(fail)?;
        let d = tpm_distribution(&q).map_err(fail)?;
        let r = entropy_production(&q).map_err(fail)?;
        if !r.pinsker_holds() {
            return Err(format!("Pinsker bound violated on instance {i}"));
        }
        worst[0] = worst[0].max((d.total_probability() - 1.0).abs());
        worst[1] = worst[1].max(r.jarzynski_residual.abs());
    }
    require(
        worst[0] < 1e-10 && worst[1] < 1e-9,
        format!("normalization {:.1e}, Jarzynski {:.1e}", worst[0], worst[1]),
    )
}

fn cumulant_series() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h0 = eigendecompose(random_hermitian(3, 1.0, &mut rng)).map_err(fail)?;
        let hf = eigendecompose(random_hermitian(3, 1.0, &mut rng)).map_err(fail)?;
        let probe = tpm_distribution(&QuenchSpec::sudden(h0.clone(), hf.clone(), Beta::Finite(1.0)).map_err(fail)?)
            .map_err(fail)?;
        let beta = 0.9 / (probe.max_work() - probe.min_work());
        let r = entropy_production(&QuenchSpec::sudden(h0, hf, Beta::Finite(beta)).map_err(fail)?).map_err(fail)?;
        worst = worst.max((cumulant_entropy_series(&r.cumulants, beta) - r.s_irr).abs());
    }
    require(worst < 1e-6, format!("max series error {worst:.1e}"))
}

fn ising_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = linspace(-8.0, 8.0, 128);
    let mut worst = 0.0f64;
    for l in [4usize, 6, 8, 10, 12] {
        for _ in 0..2 {
            let (l0, lf) = (rng.random_range(0.0..2.5), rng.random_range(0.0..2.5));
            let g = ising_g_exact(&build_modes(l, l0, lf).map_err(fail)?, &u);
            let ed = ed_oracle_g(l, l0, lf, &u).map_err(fail)?;
            worst = g.iter().zip(&ed).map(|(a, b)| (a - b).norm()).fold(worst, f64::max);
        }
    }
    require(worst < 1e-8, format!("max |g - g_ED| {worst:.1e}"))
}

fn film_identity() -> Outcome {
    let mut worst = 0.0f64;
    for l in [8usize, 12, 64] {
        let modes = build_modes(l, 0.4, 1.3).map_err(fail)?;
        let film = ising_film(&modes).map_err(fail)?;
        let log_gap = -2.0 * film.transverse_cells * film.surface - 2.0 * modes.ln_fidelity();
        worst = worst.max(log_gap.exp_m1().abs());
    }
    require(worst < 1e-8, format!("max |exp(-2N f_s)/F^2 - 1| {worst:.1e}"))
}

fn legendre_round_trip() -> Outcome {
    let (wbar, s2) = (0.7, 0.3);
    let r = linspace(-20.0, 20.0, 8001);
    let f: Vec<f64> = r.iter().map(|x| wbar * x - 0.5 * s2 * x * x).collect();
    let w = linspace(-5.0, 7.0, 6001);
    let lt = legendre_fenchel(&r, &f, &w).map_err(fail)?;
    let back = legendre_fenchel_inverse(&w, &lt.rate, &r);
    // I is infinite below zero, so the round trip only closes where the
    // minimizing w stays non-negative and on the grid.
    let worst = r
        .iter()
        .zip(&f)
        .zip(&back)
        .filter(|((x, _), _)| (-10.0..=0.9 * wbar / s2).contains(*x))
        .map(|((_, a), b)| (a - b).abs())
        .fold(0.0, f64::max);
    require(worst < 1e-4, format!("max |f_ex - f_ex**| {worst:.1e}"))
}

fn rate_function_pins() -> Outcome {
    let modes = build_modes(200, 0.0, 5.0).map_err(fail)?;
    let wbar = modes.mean_irreversible_work() / 200.0;
    let mut w = linspace(0.0, 1.5 * wbar, 61);
    w.insert(0, -0.1 * wbar);
    let c = rate_function(&modes, &RateConfig::new(w)).map_err(fail)?;
    let i0 = c.rate_at_zero().ok_or("no finite I(0)")?;
    let at_mean = c.rate_at(c.mean_w).ok_or("no finite I(w̄)")?;
    let rel = (i0 / c.surface_limit - 1.0).abs();
    require(
        c.rate[0].is_infinite() && c.min_second_difference() > -1e-7 && at_mean < 1e-3 * c.surface_limit && rel < 0.02,
        format!("I(0)/2f_s - 1 = {rel:.1e}, I(w̄) = {at_mean:.1e}"),
    )
}

fn impurity_oracle() -> Outcome {
    let model = build_impurity_model(6, 3, Dispersion::Linear { spacing: 1.0 }, 1.9).map_err(fail)?;
    let t = linspace(0.0, 8.0, 81);
    let mut worst = 0.0f64;
    for beta in [Beta::GroundState, Beta::Finite(2.0)] {
        let det = persistence_determinant(&model, &t, beta).map_err(fail)?;
        let ed = ed_persistence(&model, &t, beta).map_err(fail)?;
        worst = det.nu.iter().zip(&ed).map(|(a, b)| (a - b).norm()).fold(worst, f64::max);
    }
    require(worst < 1e-9, format!("max |nu_det - nu_ED| {worst:.1e}"))
}

fn lehmann_identity() -> Outcome {
    let model = build_impurity_model(6, 3, Dispersion::Linear { spacing: 1.0 }, 1.9).map_err(fail)?;
    let eta = 0.3;
    let t = persistence_time_grid(&model, eta, 1e-12).map_err(fail)?;
    let s = persistence_determinant(&model, &t, Beta::GroundState).map_err(fail)?;
    let x = linspace(-2.0, 12.0, 141);
    let a = absorption_spectrum(&s, &x, eta).map_err(fail)?;
    let d = ed_work_distribution(&model, Beta::GroundState).map_err(fail)?;
    let worst = a
        .a_values
        .iter()
        .zip(broadened_lehmann(&d, &x, eta))
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
        / (2.0 * std::f64::consts::PI);
    require(worst < 1e-6, format!("max |A/2pi - P_eta| {worst:.1e}"))
}

fn thermal_work() -> Outcome {
    let fam = ising_dense_family(6).map_err(fail)?;
    let mut worst = 0.0f64;
    for (l0, lf, b) in [(0.9, 1.1, 1.0), (0.5, 0.7, 4.0), (1.2, 1.0, 0.5)] {
        let w = thermal_sudden_work(&fam, l0, lf, b).map_err(fail)?;
        worst = worst.max((w.lhs - w.rhs).abs() / w.lhs.abs().max(1.0));
    }
    require(worst < 1e-6, format!("max two-route gap {worst:.1e}"))
}

fn emit_determinism() -> Outcome {
    let params = json!({
        "h0": {"random_dim": 5},
        "hf": {"random_dim": 5},
        "beta": 0.8,
        "unitary": "random",
        "u_grid": {"start": -3.0, "end": 3.0, "points": 31},
    });
    let map = params.as_object().cloned().unwrap_or_default();
    let hashes = || -> std::result::Result<Vec<String>, String> {
        let p = prepare(Scenario::Tpm, &map).map_err(fail)?;
        let out = execute(&p, 42).map_err(fail)?;
        Ok(render(&out, 12).iter().map(|(n, t)| format!("{n}:{}", sha256_hex(t.as_bytes()))).collect())
    };
    let (a, b) = (hashes()?, hashes()?);
    require(a == b, format!("{} artifacts hashed twice", a.len()))
}

pub const CHECKS: &[(&str, fn() -> Outcome)] = &[
    ("fluctuation_identities", fluctuation_identities),
    ("cumulant_series", cumulant_series),
    ("ising_free_fermions_vs_ed", ising_oracle),
    ("film_surface_identity", film_identity),
    ("legendre_round_trip", legendre_round_trip),
    ("rate_function_pins", rate_function_pins),
    ("impurity_determinant_vs_ed", impurity_oracle),
    ("lehmann_identity", lehmann_identity),
    ("thermal_two_route_work", thermal_work),
    ("artifact_determinism", emit_determinism),
];

pub fn run_checks() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let outcome = f();
            let seconds = start.elapsed().as_secs_f64();
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                name,
                passed,
                detail,
                seconds,
            }
        })
        .collect()
}
