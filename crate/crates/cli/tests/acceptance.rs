//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_FAILURES` are computed exactly as stated and
//! currently fail; the run exits non-zero if any other criterion fails or if
//! a known failure starts passing. Set `QUENCHLAB_ACCEPTANCE_STRICT=1` to
//! require every criterion to pass.

use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use quenchlab_core::fermi_impurity::ed::{ed_persistence, ed_work_distribution};
use quenchlab_core::fermi_impurity::{
    absorption_spectrum, broadened_lehmann, build_impurity_model, fit_absorption_edge, fit_linked_cluster,
    overlap_scaling, persistence_determinant, persistence_time_grid, strength_for_coupling, Dispersion,
};
use quenchlab_core::ising_chain::{
    build_modes, ed_oracle_g, ising_dense_family, ising_film, ising_g_exact, susceptibility_scan, work_density,
};
use quenchlab_core::large_dev::{
    binned_irreversible_work, casimir_collapse, legendre_fenchel, legendre_fenchel_inverse, rate_function, RateConfig,
};
use quenchlab_core::numerics::{geomspace, linspace};
use quenchlab_core::quench_ground::{
    default_film_grid, film_partition_function, fit_edge, ground_fidelity, reachable_gap, EdgeMode,
};
use quenchlab_core::spectral_core::random::{random_hermitian, random_unitary};
use quenchlab_core::spectral_core::{
    cumulant_entropy_series, eigendecompose, entropy_production, small_quench_entropy_expansion,
    sudden_entropy_production, thermal_sudden_work, tpm_distribution, Beta, CMatrix, QuenchSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

const KNOWN_FAILURES: &[(usize, &str)] = &[
    (7, "empirical -ln P/N carries O(ln N / N) prefactor corrections above 5% at L <= 400"),
    (9, "F decays as N^(-delta^2/(2 pi^2)); the stated exponent is that of F^2"),
];

fn require(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_quench(rng: &mut ChaCha8Rng, dim: usize, beta: f64, unitary: bool) -> QuenchSpec {
    let h0 = eigendecompose(random_hermitian(dim, 1.0, rng)).unwrap();
    let hf = eigendecompose(random_hermitian(dim, 1.0, rng)).unwrap();
    let u = unitary.then(|| random_unitary(dim, rng));
    QuenchSpec::new(h0, hf, u, Beta::Finite(beta)).unwrap()
}

fn c1_fluctuation_identities() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut norm, mut jar, mut rel) = (0.0f64, 0.0f64, 0.0f64);
    let mut pinsker = true;
    for i in 0..200 {
        let dim = 2 + i % 5;
        let beta = [0.2, 1.0, 5.0][i % 3];
        let q = random_quench(&mut rng, dim, beta, i % 2 == 1);
        let d = tpm_distribution(&q).map_err(err)?;
        let r = entropy_production(&q).map_err(err)?;
        norm = norm.max((d.total_probability() - 1.0).abs());
        jar = jar.max(r.jarzynski_residual.abs());
        rel = rel.max((r.s_irr - r.relative_entropy).abs());
        pinsker &= r.pinsker_holds();
    }
    let secs = start.elapsed().as_secs_f64();
    require(
        norm < 1e-10 && jar < 1e-9 && rel < 1e-8 && pinsker && secs < 10.0,
        format!("200 pairs: norm {norm:.1e}, Jarzynski {jar:.1e}, relative entropy {rel:.1e}, Pinsker {pinsker}, {secs:.2}s"),
    )
}

fn c2_cumulant_series() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let dim = 2 + i % 5;
        let h0 = eigendecompose(random_hermitian(dim, 1.0, &mut rng)).unwrap();
        let hf = eigendecompose(random_hermitian(dim, 1.0, &mut rng)).unwrap();
        let probe = QuenchSpec::sudden(h0.clone(), hf.clone(), Beta::Finite(1.0)).unwrap();
        let d = tpm_distribution(&probe).map_err(err)?;
        let beta = rng.random_range(0.2..0.95) / (d.max_work() - d.min_work());
        let q = QuenchSpec::sudden(h0, hf, Beta::Finite(beta)).unwrap();
        let r = entropy_production(&q).map_err(err)?;
        worst = worst.max((cumulant_entropy_series(&r.cumulants[..10], beta) - r.s_irr).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    require(
        worst < 1e-6 && secs < 5.0,
        format!("50 instances: max |series - s_irr| {worst:.1e}, {secs:.2}s"),
    )
}

fn c3_ising_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = linspace(-8.0, 8.0, 512);
    let mut worst = 0.0f64;
    for l in [4usize, 6, 8, 10, 12] {
        for _ in 0..10 {
            let (l0, lf) = (rng.random_range(0.0..2.5), rng.random_range(0.0..2.5));
            let g = ising_g_exact(&build_modes(l, l0, lf).map_err(err)?, &u);
            let ed = ed_oracle_g(l, l0, lf, &u).map_err(err)?;
            worst = g.iter().zip(&ed).map(|(a, b)| (a - b).norm()).fold(worst, f64::max);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    require(
        worst < 1e-8 && secs < 120.0,
        format!("L = 4..12 (even), 10 quenches each, 512 u: max error {worst:.1e}, {secs:.1}s"),
    )
}

fn c4_film_identity() -> Outcome {
    let mut worst = 0.0f64;
    let sz = CMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0].map(|x: f64| x.into()));
    for theta in [0.3f64, 1.0, 2.0] {
        let (c, s) = (theta.cos(), theta.sin());
        let hf = CMatrix::from_row_slice(2, 2, &[c, s, s, -c].map(|x: f64| x.into()));
        let h0 = eigendecompose(sz.clone()).map_err(err)?;
        let hf = eigendecompose(hf).map_err(err)?;
        let gap = reachable_gap(&h0, &hf).map_err(err)?;
        let film = film_partition_function(&h0, &hf, &default_film_grid(gap), 1.0).map_err(err)?;
        let closed = (theta / 2.0).cos().powi(2);
        let f = ground_fidelity(&h0, &hf).map_err(err)?;
        worst = worst.max((film.surface_weight() - closed).abs()).max((f * f - closed).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for l in [4usize, 6, 8, 10, 12] {
        for _ in 0..5 {
            let modes = build_modes(l, rng.random_range(0.0..2.5), rng.random_range(0.0..2.5)).map_err(err)?;
            let film = ising_film(&modes).map_err(err)?;
            worst = worst.max((film.surface_weight() - modes.fidelity().powi(2)).abs());
        }
    }
    require(worst < 1e-8, format!("two-level and Ising L <= 12: max |exp(-2N f_s) - F^2| {worst:.1e}"))
}

fn c5_susceptibility() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = geomspace(0.02, 0.3, 10).iter().map(|d| 1.0 + d).collect();
    let rep = susceptibility_scan(2000, 0.5, &grid).map_err(err)?;
    let slope = rep.fitted_exponent.ok_or("no fit")?;
    let secs = start.elapsed().as_secs_f64();
    require(
        (slope + 1.0).abs() <= 0.15 && secs < 30.0,
        format!("L = 2000, lambda0 = 0.5, lambda_f in [1.02, 1.3]: |chi2| exponent {slope:.4}, {secs:.1}s"),
    )
}

fn c6_edge_constants() -> Outcome {
    let modes = build_modes(400, 1.5, 1.2).map_err(err)?;
    let w_max = 4.0 * modes.post_energies.iter().copied().fold(0.0, f64::max);
    let w = linspace(0.0, w_max, 2001);
    let d = work_density(&modes, 1e-3 * w_max, &w).map_err(err)?;
    let m = modes.mass();
    let fit = fit_edge(&d, m, EdgeMode::Measure, None).map_err(err)?;
    let t = fit.threshold();
    require(
        (fit.exponent - 1.0).abs() <= 0.2,
        format!(
            "L = 400, 1.5 -> 1.2: a = {:.3}, threshold {t:.4} (q = {:.3} in units of m = {m:.2}; vs m {:+.4}, vs 2m {:+.4})",
            fit.exponent,
            fit.threshold_multiplier,
            t - m,
            t - 2.0 * m
        ),
    )
}

fn c7_large_deviations() -> Outcome {
    let start = Instant::now();
    let (wbar, s2) = (0.7, 0.3);
    let r = linspace(-20.0, 20.0, 8001);
    let f: Vec<f64> = r.iter().map(|x| wbar * x - 0.5 * s2 * x * x).collect();
    let w = linspace(0.0, 2.0 * wbar, 141);
    let lt = legendre_fenchel(&r, &f, &w).map_err(err)?;
    let quad = w
        .iter()
        .zip(&lt.rate)
        .map(|(wi, i)| (i.as_f64() - (wi - wbar).powi(2) / (2.0 * s2)).abs())
        .fold(0.0, f64::max);
    // Keeps the minimizing w = wbar - s2 R inside the w grid.
    let r_in = linspace(-2.0, 2.0, 81);
    let back = legendre_fenchel_inverse(&w, &lt.rate, &r_in);
    let round = r_in
        .iter()
        .zip(&back)
        .map(|(x, b)| (wbar * x - 0.5 * s2 * x * x - b).abs())
        .fold(quad, f64::max);

    let (l0, lf) = (0.0, 5.0);
    let modes = build_modes(1000, l0, lf).map_err(err)?;
    let wm = modes.mean_irreversible_work() / 1000.0;
    let mut grid = linspace(0.0, 1.5 * wm, 151);
    grid.insert(0, -0.1 * wm);
    let c = rate_function(&modes, &RateConfig::new(grid)).map_err(err)?;
    let i0 = c.rate_at_zero().ok_or("no I(0)")?;
    let surface = (i0 / c.surface_limit - 1.0).abs();
    let shape = c.rate[0].is_infinite() && c.min_second_difference() > -1e-7 && c.min_rate() > -1e-10;
    let at_mean = c.rate_at(c.mean_w).ok_or("no I(wbar)")?;

    let mut empirical = Vec::new();
    for l in [100usize, 200, 400] {
        let modes = build_modes(l, l0, lf).map_err(err)?;
        let wm = modes.mean_irreversible_work() / l as f64;
        let curve = rate_function(&modes, &RateConfig::new(linspace(0.0, 1.5 * wm, 301))).map_err(err)?;
        let i0 = curve.rate_at_zero().ok_or("no I(0)")?;
        let width = wm / 20.0;
        let binned = binned_irreversible_work(&modes, width, 1.5 * wm, width / 20.0).map_err(err)?;
        let mut worst = 0.0f64;
        for (wc, emp) in binned.empirical_rate() {
            let Some(exact) = curve.rate_at(wc) else { continue };
            if exact >= 0.25 * i0 && exact <= 0.75 * i0 {
                worst = worst.max((emp - exact).abs() / exact);
            }
        }
        empirical.push(worst);
    }
    let secs = start.elapsed().as_secs_f64();
    let emp_ok = empirical.iter().all(|e| *e <= 0.05);
    require(
        round < 1e-4 && surface < 0.02 && shape && at_mean < 1e-6 && emp_ok && secs < 120.0,
        format!(
            "round trip {round:.1e}; L = 1000: |I(0)/2f_s - 1| {surface:.1e}, I(wbar) {at_mean:.1e}, convex/inf-below-zero {shape}; \
             empirical mid-range rel. error L = 100/200/400: {:.3}/{:.3}/{:.3}; {secs:.1}s",
            empirical[0], empirical[1], empirical[2]
        ),
    )
}

fn c8_collapse() -> Outcome {
    let mut curves = Vec::new();
    for lf in [1.3, 1.2, 1.1] {
        let modes = build_modes(2000, 1.5, lf).map_err(err)?;
        let wm = modes.mean_irreversible_work() / 2000.0;
        let c = rate_function(&modes, &RateConfig::new(linspace(0.0, wm, 201))).map_err(err)?;
        curves.push((c, 1.0 / (lf - 1.0f64).abs()));
    }
    let rep = casimir_collapse(&curves, 1.0, None).map_err(err)?;
    let d = &rep.consecutive_distances;
    require(
        rep.distances_decreasing(),
        format!("lambda_f = 1.3, 1.2, 1.1 from 1.5, L = 2000: consecutive sup-distances {:.5} -> {:.5}", d[0], d[1]),
    )
}

fn c9_orthogonality() -> Outcome {
    let start = Instant::now();
    let ns = [50usize, 100, 200, 400, 800, 1600];
    let mut parts = Vec::new();
    let mut ok = true;
    for c in [0.15, 0.3] {
        let scan = overlap_scaling(&ns, Dispersion::Linear { spacing: 1.0 }, c).map_err(err)?;
        let slope = scan.slope.ok_or("no fit")?;
        let target = -(scan.phase_shift / PI).powi(2);
        let rel = (slope / target - 1.0).abs();
        ok &= rel <= 0.10;
        parts.push(format!("c = {c}: slope {slope:.5} vs {target:.5} (rel {rel:.2}), F^2 slope {:.5}", 2.0 * slope));
    }
    let secs = start.elapsed().as_secs_f64();
    require(ok && secs < 60.0, format!("{}; {secs:.1}s", parts.join("; ")))
}

fn c10_determinants() -> Outcome {
    let model = build_impurity_model(6, 3, Dispersion::Linear { spacing: 1.0 }, 1.9).map_err(err)?;
    let t = linspace(0.0, 8.0, 81);
    let mut det_err = 0.0f64;
    for beta in [Beta::GroundState, Beta::Finite(2.0)] {
        let det = persistence_determinant(&model, &t, beta).map_err(err)?;
        let ed = ed_persistence(&model, &t, beta).map_err(err)?;
        det_err = det.nu.iter().zip(&ed).map(|(a, b)| (a - b).norm()).fold(det_err, f64::max);
    }
    let eta = 0.3;
    let tg = persistence_time_grid(&model, eta, 1e-12).map_err(err)?;
    let s = persistence_determinant(&model, &tg, Beta::GroundState).map_err(err)?;
    let x = linspace(-2.0, 12.0, 281);
    let a = absorption_spectrum(&s, &x, eta).map_err(err)?;
    let p = broadened_lehmann(&ed_work_distribution(&model, Beta::GroundState).map_err(err)?, &x, eta);
    let lehmann = a.a_values.iter().zip(&p).map(|(u, v)| (u - v).abs() / (2.0 * PI)).fold(0.0, f64::max);
    require(
        det_err < 1e-9 && lehmann < 1e-6,
        format!("M = 6, N = 3: determinant vs ED {det_err:.1e}; Lehmann {lehmann:.1e}"),
    )
}

fn c11_edge_singularity() -> Outcome {
    let disp = Dispersion::Linear { spacing: 1.0 };
    let (m, n) = (400, 200);
    let v = strength_for_coupling(m, n, disp, 0.05).map_err(err)?;
    let model = build_impurity_model(m, n, disp, v).map_err(err)?;
    let g = fit_linked_cluster(&model, Beta::GroundState, None).map_err(err)?.g;
    let eta = 2.0;
    let t = persistence_time_grid(&model, eta, 1e-12).map_err(err)?;
    let s = persistence_determinant(&model, &t, Beta::GroundState).map_err(err)?;
    let x = linspace(-20.0, 200.0, 1101);
    let spec = absorption_spectrum(&s, &x, eta).map_err(err)?;
    let edge = fit_absorption_edge(&spec, (8.0 * eta, model.bandwidth() / 4.0)).map_err(err)?.slope;
    let rel = (edge / (g - 1.0) - 1.0).abs();

    let free = build_impurity_model(m, n, disp, 0.0).map_err(err)?;
    let eta0 = 0.2;
    let t0 = persistence_time_grid(&free, eta0, 1e-12).map_err(err)?;
    let s0 = persistence_determinant(&free, &t0, Beta::GroundState).map_err(err)?;
    let x0 = linspace(-2.0, 2.0, 401);
    let a0 = absorption_spectrum(&s0, &x0, eta0).map_err(err)?;
    let peak = (2.0 * PI).sqrt() / eta0;
    let single = x0
        .iter()
        .zip(&a0.a_values)
        .map(|(xi, ai)| (ai - peak * (-0.5 * (xi / eta0).powi(2)).exp()).abs() / peak)
        .fold(0.0, f64::max);
    require(
        rel <= 0.15 && single < 1e-6,
        format!(
            "N = 200, rho v = 0.05: g = {g:.5}, edge exponent {edge:.4} vs g - 1 = {:.4} (rel {rel:.3}); v = 0 peak deviation {single:.1e}",
            g - 1.0
        ),
    )
}

fn c12_thermal() -> Outcome {
    let fam = ising_dense_family(8).map_err(err)?;
    let mut two_route = 0.0f64;
    for (l0, lf, beta) in [(0.95, 1.05, 2.0), (0.5, 0.7, 1.0), (1.5, 1.2, 4.0)] {
        let w = thermal_sudden_work(&fam, l0, lf, beta).map_err(err)?;
        two_route = two_route.max((w.lhs - w.rhs).abs());
    }
    let exp = small_quench_entropy_expansion(&fam, 0.95, &[0.01, 0.02, 0.04, 0.08], 2.0).map_err(err)?;
    let order = exp.residual_order.ok_or("no residual fit")?;
    let s: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|b| sudden_entropy_production(&fam, 0.95, 1.05, *b))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let monotone = s.windows(2).all(|p| p[1] > p[0]);
    require(
        two_route < 1e-6 && (2.7..=3.3).contains(&order) && monotone,
        format!(
            "Ising L = 8: two-route {two_route:.1e}; residual order {order:.3}; s_irr(beta = 1,2,4,8) = {:.4e}, {:.4e}, {:.4e}, {:.4e}",
            s[0], s[1], s[2], s[3]
        ),
    )
}

fn artifact_hashes(config: &Path, out: &Path) -> Result<Value, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_quenchlab"))
        .args(["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env_remove("QUENCHLAB_THREADS")
        .output()
        .map_err(err)?;
    if !status.status.success() {
        return Err(format!("{} exited with {:?}", config.display(), status.status.code()));
    }
    let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).map_err(err)?).map_err(err)?;
    Ok(m["artifacts"].clone())
}

fn c13_determinism() -> Outcome {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut same = true;
    let names = ["tpm_random", "ising_paramagnet", "ratefn_gapped", "thermal_ising"];
    for name in names {
        let cfg = configs.join(format!("{name}.json"));
        let a = artifact_hashes(&cfg, &tmp.path().join(format!("{name}_a")))?;
        let b = artifact_hashes(&cfg, &tmp.path().join(format!("{name}_b")))?;
        same &= a == b;
    }
    let check = Command::new(env!("CARGO_BIN_EXE_quenchlab")).arg("check").output().map_err(err)?;
    let code = check.status.code();
    require(
        same && code == Some(0),
        format!("{} configs hashed twice, identical {same}; check exit code {code:?}", names.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [(usize, &str, fn() -> Outcome); 13] = [
        (1, "fluctuation identities", c1_fluctuation_identities),
        (2, "cumulant series", c2_cumulant_series),
        (3, "Ising oracle equivalence", c3_ising_oracle),
        (4, "fidelity/surface identity", c4_film_identity),
        (5, "susceptibility scaling", c5_susceptibility),
        (6, "edge constants", c6_edge_constants),
        (7, "large-deviation duality", c7_large_deviations),
        (8, "scaling collapse", c8_collapse),
        (9, "orthogonality exponent", c9_orthogonality),
        (10, "determinant vs many-body ED", c10_determinants),
        (11, "edge singularity", c11_edge_singularity),
        (12, "thermal identities", c12_thermal),
        (13, "CLI determinism", c13_determinism),
    ];
    let strict = std::env::var("QUENCHLAB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        let (passed, detail) = match f() {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let known = KNOWN_FAILURES.iter().find(|k| k.0 == id);
        let note = match (passed, known) {
            (false, Some((_, why))) => format!(" [known: {why}]"),
            (true, Some(_)) => " [listed as a known failure]".to_string(),
            _ => String::new(),
        };
        println!("{} {id:>2} {name}: {detail}{note}", if passed { "PASS" } else { "FAIL" });
        let expected = known.is_none() || strict;
        if passed != expected {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
