use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::linked::{fit_linked_cluster, linked_cluster_lambda2, LinkedClusterFit};
use super::model::ImpurityModel;
use crate::error::{Error, Result};
use crate::numerics::fit_power_law;
use crate::spectral_core::Beta;

const MAX_TIME_STEPS: usize = 10_000;

/// `ν_β(t)` with its second-order linked-cluster term and the fits built on
/// them.
#[derive(Debug, Clone)]
pub struct PersistenceSeries {
    pub t_grid: Vec<f64>,
    pub nu: Vec<Complex64>,
    pub lambda2: Vec<Complex64>,
    pub beta: Beta,
    /// Log-growth coefficient `g` of `-Re Λ₂`; absent when the model is too
    /// small to have a logarithmic window.
    pub coupling: Option<f64>,
    pub tau0: Option<f64>,
    /// Power-law decay exponent of `|ν|` over the same window.
    pub fitted_alpha: Option<f64>,
    /// `Δε₀`, the many-body ground-energy shift.
    pub threshold: f64,
}

/// Fermi occupations in the unperturbed basis: the lowest `N` levels at zero
/// temperature, or Fermi–Dirac at the Fermi energy otherwise.
pub fn occupations(model: &ImpurityModel, beta: Beta) -> Vec<f64> {
    match beta {
        Beta::GroundState => (0..model.n_levels())
            .map(|i| if i < model.n_particles { 1.0 } else { 0.0 })
            .collect(),
        Beta::Finite(b) => {
            let mu = model.fermi_energy();
            model.levels.iter().map(|e| 1.0 / (1.0 + (b * (e - mu)).exp())).collect()
        }
    }
}

/// Uniform grid from 0 resolving the single-pair spectrum, long enough for a
/// Gaussian window of width `eta` to fall below `leak`.
pub fn persistence_time_grid(model: &ImpurityModel, eta: f64, leak: f64) -> Result<Vec<f64>> {
    if !(eta > 0.0 && leak > 0.0 && leak < 1.0) {
        return Err(Error::invalid("window width must be positive and leak in (0, 1)"));
    }
    let t_max = (2.0 * (1.0 / leak).ln()).sqrt() / eta;
    let span = model.bandwidth() + model.potential_strength.abs();
    let dt = 2.0 * std::f64::consts::PI / (2.5 * span.max(eta));
    let steps = ((t_max / dt).ceil() as usize).clamp(1, MAX_TIME_STEPS);
    let dt = t_max / steps as f64;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

/// Rows `0..k` and columns `0..k` of the single-particle echo
/// `e^{i h₀ t} e^{-i h t}`, from the leading rows `uk` of the orbital matrix.
fn echo_block(model: &ImpurityModel, uk: &DMatrix<f64>, ukt: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
    let k = uk.nrows();
    let mut uc = uk.clone();
    let mut us = uk.clone();
    for (j, e) in model.perturbed_levels.iter().enumerate() {
        let (s, c) = (e * t).sin_cos();
        uc.column_mut(j).scale_mut(c);
        us.column_mut(j).scale_mut(s);
    }
    let re = &uc * ukt;
    let im = &us * ukt;
    DMatrix::from_fn(k, k, |i, j| {
        Complex64::from_polar(1.0, model.levels[i] * t) * Complex64::new(re[(i, j)], -im[(i, j)])
    })
}

fn nu_at(model: &ImpurityModel, uk: &DMatrix<f64>, ukt: &DMatrix<f64>, occ: &[f64], zero_t: bool, t: f64) -> Complex64 {
    if t == 0.0 || model.potential_strength == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let x = echo_block(model, uk, ukt, t);
    if zero_t {
        x.determinant()
    } else {
        let m = x.nrows();
        let a = DMatrix::from_fn(m, m, |i, j| {
            let f = occ[i];
            let id = if i == j { 1.0 - f } else { 0.0 };
            Complex64::new(id, 0.0) + x[(i, j)] * f
        });
        a.determinant()
    }
}

/// `ν(t) = det[P e^{ih₀t} e^{-iht} P]` at zero temperature, or
/// `det[1 - n + n e^{ih₀t} e^{-iht}]` with the grand-canonical occupation
/// matrix `n` at finite `β`.
pub fn persistence_determinant(model: &ImpurityModel, t_grid: &[f64], beta: Beta) -> Result<PersistenceSeries> {
    let beta = beta.validate()?;
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::invalid("times must be finite and non-negative"));
    }
    let occ = occupations(model, beta);
    let zero_t = matches!(beta, Beta::GroundState);
    let k = if zero_t { model.n_particles } else { model.n_levels() };
    let uk = model.perturbed_orbitals.rows(0, k).into_owned();
    let ukt = uk.transpose();
    let nu: Vec<Complex64> = t_grid
        .par_iter()
        .map(|&t| nu_at(model, &uk, &ukt, &occ, zero_t, t))
        .collect();
    let lambda2 = linked_cluster_lambda2(model, t_grid, beta)?;
    let (coupling, tau0, fitted_alpha) = match fit_linked_cluster(model, beta, None) {
        Ok(LinkedClusterFit { g, tau0, window }) => (Some(g), tau0, decay_exponent(t_grid, &nu, window)),
        Err(Error::FitWindowTooNarrow { .. }) => (None, None, None),
        Err(e) => return Err(e),
    };
    Ok(PersistenceSeries {
        t_grid: t_grid.to_vec(),
        nu,
        lambda2,
        beta,
        coupling,
        tau0,
        fitted_alpha,
        threshold: model.ground_shift(),
    })
}

fn decay_exponent(t: &[f64], nu: &[Complex64], window: (f64, f64)) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(nu)
        .filter(|(t, v)| **t >= window.0 && **t <= window.1 && v.norm() > 0.0)
        .map(|(t, v)| (*t, v.norm()))
        .unzip();
    if x.len() < 4 {
        return None;
    }
    fit_power_law(&x, &y).ok().map(|f| -f.slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermi_impurity::model::{build_impurity_model, Dispersion};
    use crate::numerics::linspace;

    #[test]
    fn trivial_limits() {
        let model = build_impurity_model(12, 6, Dispersion::Linear { spacing: 1.0 }, 0.0).unwrap();
        let s = persistence_determinant(&model, &linspace(0.0, 5.0, 11), Beta::GroundState).unwrap();
        assert!(s.nu.iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        assert!(s.lambda2.iter().all(|z| *z == Complex64::new(0.0, 0.0)));

        let model = build_impurity_model(12, 6, Dispersion::Linear { spacing: 1.0 }, 3.0).unwrap();
        for beta in [Beta::GroundState, Beta::Finite(2.0)] {
            let s = persistence_determinant(&model, &linspace(0.0, 5.0, 51), beta).unwrap();
            assert_eq!(s.nu[0], Complex64::new(1.0, 0.0));
            assert!(s.nu.iter().all(|z| z.norm() <= 1.0 + 1e-9));
        }
    }

    #[test]
    fn finite_temperature_approaches_ground_state() {
        let model = build_impurity_model(16, 8, Dispersion::Linear { spacing: 1.0 }, 2.5).unwrap();
        let t = linspace(0.0, 4.0, 21);
        let cold = persistence_determinant(&model, &t, Beta::GroundState).unwrap();
        let warm = persistence_determinant(&model, &t, Beta::Finite(30.0)).unwrap();
        for (a, b) in cold.nu.iter().zip(&warm.nu) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn time_grid_reaches_window_cutoff() {
        let model = build_impurity_model(10, 5, Dispersion::Linear { spacing: 1.0 }, 1.0).unwrap();
        let t = persistence_time_grid(&model, 0.5, 1e-6).unwrap();
        assert_eq!(t[0], 0.0);
        let t_max = *t.last().unwrap();
        assert!(((-0.125 * t_max * t_max).exp() - 1e-6).abs() < 1e-9);
    }
}
