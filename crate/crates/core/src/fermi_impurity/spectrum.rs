use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::persistence::PersistenceSeries;
use crate::error::{Error, Result};
use crate::numerics::{fit_power_law, trapezoid, LineFit};
use crate::spectral_core::WorkDistribution;

const LEAK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct AbsorptionSpectrum {
    /// `ω - ω_T`, with the threshold `ω_T = Δε₀`.
    pub detuning_grid: Vec<f64>,
    pub a_values: Vec<f64>,
    pub threshold: f64,
    pub time_cutoff: f64,
    /// Width `η` of the Gaussian time window `e^{-η²t²/2}`.
    pub window_width: f64,
    /// `∫ A d(detuning) / 2π`; one when the grid covers the spectrum.
    pub sum_rule: f64,
}

/// `A(ω) = 2 Re ∫₀^∞ dt e^{iωt} ν(t) e^{-η²t²/2}` on a detuning grid, by the
/// trapezoid rule on the uniform time grid of `series`.
pub fn absorption_spectrum(series: &PersistenceSeries, detuning_grid: &[f64], eta: f64) -> Result<AbsorptionSpectrum> {
    let t = &series.t_grid;
    if t.len() < 2 || t[0] != 0.0 {
        return Err(Error::invalid("time grid must start at 0 and have at least two points"));
    }
    if !(eta > 0.0) {
        return Err(Error::invalid("window width must be positive"));
    }
    let window: Vec<f64> = t.iter().map(|s| (-0.5 * eta * eta * s * s).exp()).collect();
    let last = t.len() - 1;
    let leak = series.nu[last].norm() * window[last];
    if leak > LEAK_TOL {
        return Err(Error::WindowTooShort { leak });
    }
    // Trapezoid weights on a possibly uneven grid.
    let weights: Vec<f64> = (0..=last)
        .map(|k| {
            let left = if k > 0 { t[k] - t[k - 1] } else { 0.0 };
            let right = if k < last { t[k + 1] - t[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();
    let samples: Vec<Complex64> = series
        .nu
        .iter()
        .zip(&window)
        .zip(&weights)
        .map(|((v, w), h)| v * (w * h))
        .collect();
    let a_values: Vec<f64> = detuning_grid
        .par_iter()
        .map(|&x| {
            let omega = x + series.threshold;
            2.0 * t
                .iter()
                .zip(&samples)
                .map(|(s, z)| (Complex64::from_polar(1.0, omega * s) * z).re)
                .sum::<f64>()
        })
        .collect();
    let sum_rule = trapezoid(detuning_grid, &a_values) / (2.0 * std::f64::consts::PI);
    Ok(AbsorptionSpectrum {
        detuning_grid: detuning_grid.to_vec(),
        a_values,
        threshold: series.threshold,
        time_cutoff: t[last],
        window_width: eta,
        sum_rule,
    })
}

/// `2π Σ p_m G_η(x + Δε₀ - W_m)`: the Lehmann form of the windowed spectrum
/// for a work distribution.
pub fn broadened_lehmann(d: &WorkDistribution, detuning_grid: &[f64], eta: f64) -> Vec<f64> {
    let norm = (2.0 * std::f64::consts::PI).sqrt() / eta;
    detuning_grid
        .iter()
        .map(|&x| {
            let omega = x + d.adiabatic_shift;
            norm * d
                .atoms
                .iter()
                .map(|a| a.probability * (-0.5 * ((omega - a.work) / eta).powi(2)).exp())
                .sum::<f64>()
        })
        .collect()
}

/// Log-log slope of `A` against detuning over `window`: the edge exponent.
pub fn fit_absorption_edge(spectrum: &AbsorptionSpectrum, window: (f64, f64)) -> Result<LineFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = spectrum
        .detuning_grid
        .iter()
        .zip(&spectrum.a_values)
        .filter(|(x, a)| **x >= window.0 && **x <= window.1 && **x > 0.0 && **a > 0.0)
        .map(|(x, a)| (*x, *a))
        .unzip();
    if x.len() < 3 {
        return Err(Error::FitWindowTooNarrow {
            points: x.len(),
            required: 3,
        });
    }
    fit_power_law(&x, &y)
}
