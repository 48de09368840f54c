use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{fit_line, trapezoid};
use crate::spectral_core::WorkDistribution;

const MIN_WINDOW_POINTS: usize = 5;
const THRESHOLD_SCAN: usize = 400;
const DENSITY_FLOOR: f64 = 1e-300;

/// Broadened density of `W_irr = W - Δε₀`, with the adiabatic atom kept
/// aside as an exact weight.
#[derive(Debug, Clone, Serialize)]
pub struct WorkDensity {
    pub w_grid: Vec<f64>,
    pub density: Vec<f64>,
    pub delta_weight: f64,
    pub broadening: f64,
}

impl WorkDensity {
    /// Gaussian broadening of the non-adiabatic atoms of a ground-state
    /// distribution.
    pub fn from_atoms(d: &WorkDistribution, eta: f64, w_grid: &[f64]) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::invalid("broadening must be positive"));
        }
        let tol = d.merged_tolerance.max(1e-14);
        let atoms: Vec<_> = d
            .irreversible_atoms()
            .into_iter()
            .filter(|a| a.work > tol)
            .collect();
        let norm = 1.0 / (eta * (2.0 * std::f64::consts::PI).sqrt());
        let density = w_grid
            .iter()
            .map(|&w| {
                atoms
                    .iter()
                    .map(|a| {
                        let x = (w - a.work) / eta;
                        a.probability * norm * (-0.5 * x * x).exp()
                    })
                    .sum()
            })
            .collect();
        Ok(Self {
            w_grid: w_grid.to_vec(),
            density,
            delta_weight: d.adiabatic_weight(),
            broadening: eta,
        })
    }

    pub fn continuum_mass(&self) -> f64 {
        trapezoid(&self.w_grid, &self.density)
    }

    /// `|delta_weight + ∫density - 1|`.
    pub fn normalization_defect(&self) -> f64 {
        (self.delta_weight + self.continuum_mass() - 1.0).abs()
    }

    pub fn span(&self) -> f64 {
        match (self.w_grid.first(), self.w_grid.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub enum EdgeMode {
    /// Threshold multiplier and exponent held fixed; only the amplitude is fit.
    Verify { q: f64, a: f64 },
    /// Threshold, exponent and amplitude all fit.
    Measure,
}

/// `ρ(W) ≈ C (W - q m)^{1-a}` near the lower continuum edge.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeFit {
    pub weight: f64,
    pub amplitude: f64,
    pub threshold_multiplier: f64,
    pub exponent: f64,
    pub mass: f64,
    pub window: (f64, f64),
    /// RMS residual of `ln ρ` on the window.
    pub residual: f64,
    pub points: usize,
}

impl EdgeFit {
    pub fn threshold(&self) -> f64 {
        self.threshold_multiplier * self.mass
    }
}

struct PowerFit {
    ln_c: f64,
    power: f64,
    residual: f64,
}

fn window_points(d: &WorkDensity, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    d.w_grid
        .iter()
        .zip(&d.density)
        .filter(|(w, rho)| **w >= lo && **w <= hi && **rho > DENSITY_FLOOR)
        .map(|(w, rho)| (*w, *rho))
        .collect()
}

fn fit_at_threshold(points: &[(f64, f64)], threshold: f64) -> Option<PowerFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(w, _)| *w > threshold)
        .map(|(w, rho)| ((w - threshold).ln(), rho.ln()))
        .unzip();
    if x.len() < MIN_WINDOW_POINTS {
        return None;
    }
    let f = fit_line(&x, &y).ok()?;
    Some(PowerFit {
        ln_c: f.intercept,
        power: f.slope,
        residual: f.rms_residual,
    })
}

fn fixed_fit(points: &[(f64, f64)], threshold: f64, power: f64) -> Option<PowerFit> {
    let r: Vec<f64> = points
        .iter()
        .filter(|(w, _)| *w > threshold)
        .map(|(w, rho)| rho.ln() - power * (w - threshold).ln())
        .collect();
    if r.len() < MIN_WINDOW_POINTS {
        return None;
    }
    let ln_c = r.iter().sum::<f64>() / r.len() as f64;
    let residual = (r.iter().map(|v| (v - ln_c).powi(2)).sum::<f64>() / r.len() as f64).sqrt();
    Some(PowerFit { ln_c, power, residual })
}

/// Lowest energy at which the density exceeds a thousandth of its maximum.
fn onset(d: &WorkDensity) -> Option<f64> {
    let peak = d.density.iter().cloned().fold(0.0, f64::max);
    d.w_grid
        .iter()
        .zip(&d.density)
        .find(|(_, rho)| **rho > 1e-3 * peak)
        .map(|(w, _)| *w)
}

pub fn fit_edge(
    density: &WorkDensity,
    mass: f64,
    mode: EdgeMode,
    window: Option<(f64, f64)>,
) -> Result<EdgeFit> {
    if !(mass > 0.0) {
        return Err(Error::invalid("mass must be positive"));
    }
    if density.w_grid.len() != density.density.len() || density.w_grid.is_empty() {
        return Err(Error::invalid("density samples are malformed"));
    }
    let peak = density.density.iter().cloned().fold(0.0, f64::max);
    if density.delta_weight >= 1.0 - 1e-12 || !(peak > DENSITY_FLOOR) {
        return Err(Error::NoContinuum);
    }
    let eta = density.broadening;
    let span = density.span();
    let default_window = |edge: f64| (edge + 3.0 * eta, edge + 0.2 * span);
    let fit = match mode {
        EdgeMode::Verify { q, a } => {
            let threshold = q * mass;
            let (lo, hi) = window.unwrap_or_else(|| default_window(threshold));
            let points = window_points(density, lo, hi);
            let f = fixed_fit(&points, threshold, 1.0 - a).ok_or(Error::FitWindowTooNarrow {
                points: points.len(),
                required: MIN_WINDOW_POINTS,
            })?;
            (f, threshold, (lo, hi), points.len())
        }
        EdgeMode::Measure => {
            let edge = onset(density).ok_or(Error::NoContinuum)?;
            let (lo, hi) = window.unwrap_or_else(|| default_window(edge));
            let points = window_points(density, lo, hi);
            if points.len() < MIN_WINDOW_POINTS {
                return Err(Error::FitWindowTooNarrow {
                    points: points.len(),
                    required: MIN_WINDOW_POINTS,
                });
            }
            // The threshold cannot sit where the measured density is still
            // negligible, so the scan starts just below the onset.
            let t_hi = points[0].0 - 0.5 * eta;
            let t_lo = (edge - 2.0 * eta).max(density.w_grid[0]).min(t_hi);
            let best = |a: f64, b: f64, n: usize| {
                (0..=n)
                    .map(|i| a + (b - a) * i as f64 / n as f64)
                    .filter_map(|t| fit_at_threshold(&points, t).map(|f| (t, f)))
                    .min_by(|x, y| x.1.residual.total_cmp(&y.1.residual))
            };
            let (t0, _) = best(t_lo, t_hi, THRESHOLD_SCAN).ok_or(Error::FitWindowTooNarrow {
                points: points.len(),
                required: MIN_WINDOW_POINTS,
            })?;
            let step = (t_hi - t_lo) / THRESHOLD_SCAN as f64;
            let (t, f) = best((t0 - step).max(t_lo), (t0 + step).min(t_hi), 200).unwrap();
            (f, t, (lo, hi), points.len())
        }
    };
    let (f, threshold, window, points) = fit;
    Ok(EdgeFit {
        weight: density.delta_weight,
        amplitude: f.ln_c.exp(),
        threshold_multiplier: threshold / mass,
        exponent: 1.0 - f.power,
        mass,
        window,
        residual: f.residual,
        points,
    })
}
