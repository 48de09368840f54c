use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::model::ImpurityModel;
use super::persistence::occupations;
use crate::error::{Error, Result};
use crate::numerics::{fit_line, geomspace};
use crate::spectral_core::Beta;

const FIT_POINTS: usize = 64;
const QUADRATURE_MAX_LEVEL: u32 = 20;

/// Particle-hole pairs `(v² w_a² w_b² f_a (1 - f_b), ε_b - ε_a)` of the
/// connected bubble.
fn bubble(model: &ImpurityModel, beta: Beta) -> Vec<(f64, f64)> {
    let v = model.potential_strength;
    if v == 0.0 {
        return Vec::new();
    }
    let occ = occupations(model, beta);
    let w = &model.potential_vector;
    let mut pairs = Vec::new();
    for (a, fa) in occ.iter().enumerate() {
        for (b, fb) in occ.iter().enumerate() {
            let weight = v * v * w[a] * w[a] * w[b] * w[b] * fa * (1.0 - fb);
            if weight > 0.0 {
                pairs.push((weight, model.levels[b] - model.levels[a]));
            }
        }
    }
    pairs
}

/// `∫₀ᵗ (t - τ) e^{-iΩτ} dτ`.
fn kernel(omega: f64, t: f64) -> Complex64 {
    let x = omega * t;
    if x.abs() < 1e-3 {
        let x2 = x * x;
        return t * t * Complex64::new(0.5 - x2 / 24.0, -x / 6.0 + x * x2 / 120.0);
    }
    let (s, c) = x.sin_cos();
    Complex64::new(1.0 - c, s - x) / (omega * omega)
}

/// `Λ₂(t) = -∫₀ᵗ dt₁ ∫₀^{t₁} dt₂ ⟨Ṽ(t₁)Ṽ(t₂)⟩_c`, with each particle-hole
/// pair integrated in closed form.
pub fn linked_cluster_lambda2(model: &ImpurityModel, t_grid: &[f64], beta: Beta) -> Result<Vec<Complex64>> {
    let beta = beta.validate()?;
    let pairs = bubble(model, beta);
    Ok(t_grid
        .par_iter()
        .map(|&t| -pairs.iter().map(|(wgt, om)| kernel(*om, t) * *wgt).sum::<Complex64>())
        .collect())
}

/// The same double integral by adaptive composite Simpson quadrature over
/// the connected correlator; a cross-check for small models.
pub fn linked_cluster_lambda2_quadrature(
    model: &ImpurityModel,
    t_grid: &[f64],
    beta: Beta,
    tol: f64,
) -> Result<Vec<Complex64>> {
    let beta = beta.validate()?;
    let pairs = bubble(model, beta);
    let corr = |tau: f64| -> Complex64 {
        pairs
            .iter()
            .map(|(wgt, om)| Complex64::from_polar(*wgt, -om * tau))
            .sum()
    };
    t_grid
        .iter()
        .map(|&t| {
            if t == 0.0 || pairs.is_empty() {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let integrand = |tau: f64| corr(tau) * (t - tau);
            let mut prev = simpson(&integrand, t, 2);
            for level in 2..=QUADRATURE_MAX_LEVEL {
                let cur = simpson(&integrand, t, 1 << level);
                let change = (cur - prev).norm();
                if change <= tol * cur.norm().max(f64::MIN_POSITIVE) {
                    return Ok(-cur);
                }
                prev = cur;
                if level == QUADRATURE_MAX_LEVEL {
                    return Err(Error::QuadratureNonConvergent { t, change });
                }
            }
            unreachable!("loop returns on its final level")
        })
        .collect()
}

fn simpson<F: Fn(f64) -> Complex64>(f: &F, t: f64, panels: usize) -> Complex64 {
    let h = t / panels as f64;
    let mut acc = f(0.0) + f(t);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(k as f64 * h) * w;
    }
    acc * (h / 3.0)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinkedClusterFit {
    /// Slope of `-Re Λ₂` against `ln t`.
    pub g: f64,
    /// From the intercept, `-Re Λ₂ ≈ g ln(t/τ₀)`; absent when `g = 0`.
    pub tau0: Option<f64>,
    pub window: (f64, f64),
}

/// Default log window: many inverse bandwidths up to a fraction of the
/// level-spacing recurrence time.
pub fn log_window(model: &ImpurityModel) -> (f64, f64) {
    (8.0 / model.bandwidth(), 0.5 / model.fermi_spacing())
}

/// Fits `-Re Λ₂ = g ln t - g ln τ₀` on log-spaced times.
pub fn fit_linked_cluster(model: &ImpurityModel, beta: Beta, window: Option<(f64, f64)>) -> Result<LinkedClusterFit> {
    let window = window.unwrap_or_else(|| log_window(model));
    if !(window.0 > 0.0 && window.1 > window.0) {
        return Err(Error::FitWindowTooNarrow {
            points: 0,
            required: 2,
        });
    }
    let t = geomspace(window.0, window.1, FIT_POINTS);
    let l2 = linked_cluster_lambda2(model, &t, beta)?;
    let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = l2.iter().map(|z| -z.re).collect();
    let fit = fit_line(&x, &y)?;
    let g = fit.slope;
    let tau0 = (g != 0.0).then(|| (-fit.intercept / g).exp());
    Ok(LinkedClusterFit { g, tau0, window })
}

/// First three cumulants of `W = H_f - E₀` in the unperturbed ground state.
///
/// For a one-body operator `A` in a Slater determinant with projector `P`:
/// `κ₂ = Tr PAQA`, `κ₃ = Tr PAQAQA - Tr PAPAQA`. With `A = h₀ + v|w⟩⟨w|`
/// the traces reduce to sums over the two blocks of `w`.
pub fn work_cumulants(model: &ImpurityModel) -> [f64; 3] {
    let n = model.n_particles;
    let v = model.potential_strength;
    let w = &model.potential_vector;
    let (wp, wq) = w.split_at(n);
    let (ep, eq) = model.levels.split_at(n);
    let np: f64 = wp.iter().map(|x| x * x).sum();
    let nq: f64 = wq.iter().map(|x| x * x).sum();
    let hp: f64 = wp.iter().zip(ep).map(|(x, e)| e * x * x).sum::<f64>() + v * np * np;
    let hq: f64 = wq.iter().zip(eq).map(|(x, e)| e * x * x).sum::<f64>() + v * nq * nq;
    [v * np, v * v * np * nq, v * v * (np * hq - nq * hp)]
}
