use num_complex::Complex64;
use rayon::prelude::*;

use super::modes::BogoliubovModeSet;
use crate::error::{Error, Result};
use crate::quench_ground::WorkDensity;

const WINDOW_FLOOR: f64 = 1e-10;
const ALIAS_TOL: f64 = 1e-8;
const TAIL_SIGMAS: f64 = 12.0;

/// `P(W_irr)` by Fourier inversion of the mode-product characteristic
/// function under a Gaussian window `e^{-η²u²/2}`.
///
/// The adiabatic atom `Π cos²Δ_k` is subtracted from `g` before the
/// transform and reported separately. The `u` step is chosen so that the
/// periodic images of the continuum land beyond both the requested grid and
/// the bulk of the distribution.
pub fn work_density(modes: &BogoliubovModeSet, eta: f64, w_grid: &[f64]) -> Result<WorkDensity> {
    work_density_with_cutoff(modes, eta, w_grid, None)
}

/// As [`work_density`] with an explicit upper integration limit in `u`.
pub fn work_density_with_cutoff(
    modes: &BogoliubovModeSet,
    eta: f64,
    w_grid: &[f64],
    u_max: Option<f64>,
) -> Result<WorkDensity> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::invalid("broadening must be finite and positive"));
    }
    if w_grid.is_empty() || w_grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("w grid must be non-empty and finite"));
    }
    let f2 = modes.delta_weight();
    let w_top = w_grid.iter().cloned().fold(0.0, f64::max);
    let mean = modes.mean_irreversible_work();
    let sigma = modes.irreversible_work_variance().sqrt();
    let support = w_top.max(mean + TAIL_SIGMAS * sigma).min(modes.max_pair_energy() * modes.momenta.len() as f64);
    let period = 2.0 * (support.max(w_top) + 10.0 * eta);
    let du = 2.0 * std::f64::consts::PI / period;
    let u_cut = u_max.unwrap_or_else(|| (2.0 * (1.0 / WINDOW_FLOOR).ln()).sqrt() / eta);
    let n_u = (u_cut / du).ceil() as usize;

    let tail = (modes.irreversible_characteristic(n_u as f64 * du) - f2).norm()
        * (-0.5 * (eta * n_u as f64 * du).powi(2)).exp();
    if tail > ALIAS_TOL {
        return Err(Error::AliasingDetected { leak: tail });
    }

    let coefficients: Vec<Complex64> = (0..=n_u)
        .into_par_iter()
        .map(|j| {
            let u = j as f64 * du;
            let trap = if j == 0 || j == n_u { 0.5 } else { 1.0 };
            (modes.irreversible_characteristic(u) - f2) * (trap * (-0.5 * (eta * u).powi(2)).exp())
        })
        .collect();

    let density = w_grid
        .par_iter()
        .map(|&w| {
            // e^{-i u_j w} by rotation; re-seeded periodically to bound drift.
            let step = Complex64::from_polar(1.0, -du * w);
            let mut phase = Complex64::new(1.0, 0.0);
            let mut acc = 0.0;
            for (j, c) in coefficients.iter().enumerate() {
                if j % 256 == 0 {
                    phase = Complex64::from_polar(1.0, -(j as f64) * du * w);
                }
                acc += (c * phase).re;
                phase *= step;
            }
            acc * du / std::f64::consts::PI
        })
        .collect();

    Ok(WorkDensity {
        w_grid: w_grid.to_vec(),
        density,
        delta_weight: f2,
        broadening: eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising_chain::ed::ising_sector_family;
    use crate::ising_chain::modes::build_modes;
    use crate::numerics::linspace;
    use crate::spectral_core::{tpm_distribution, Beta, QuenchSpec};

    #[test]
    fn null_quench_is_all_delta() {
        let m = build_modes(20, 1.3, 1.3).unwrap();
        let d = work_density(&m, 0.05, &linspace(0.0, 10.0, 101)).unwrap();
        assert_eq!(d.delta_weight, 1.0);
        assert!(d.density.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn normalized_and_nonnegative() {
        let m = build_modes(40, 1.5, 1.2).unwrap();
        let top = 8.0 * m.post_energies.iter().cloned().fold(0.0, f64::max);
        let grid = linspace(0.0, top, 4001);
        let d = work_density(&m, 0.05, &grid).unwrap();
        assert!(d.normalization_defect() < 1e-6, "{}", d.normalization_defect());
        assert!(d.density.iter().all(|v| *v > -1e-9));
    }

    #[test]
    fn matches_broadened_oracle_atoms() {
        let (l, l0, lf) = (8, 0.5, 1.5);
        let m = build_modes(l, l0, lf).unwrap();
        let fam = ising_sector_family(l).unwrap();
        let q = QuenchSpec::sudden(fam.at(l0).unwrap(), fam.at(lf).unwrap(), Beta::GroundState).unwrap();
        let dist = tpm_distribution(&q).unwrap();
        let grid = linspace(0.0, 40.0, 801);
        let fourier = work_density(&m, 0.1, &grid).unwrap();
        let direct = WorkDensity::from_atoms(&dist, 0.1, &grid).unwrap();
        assert!((fourier.delta_weight - direct.delta_weight).abs() < 1e-10);
        let worst = fourier
            .density
            .iter()
            .zip(&direct.density)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn short_cutoff_is_flagged() {
        let m = build_modes(40, 1.5, 1.2).unwrap();
        let err = work_density_with_cutoff(&m, 0.05, &linspace(0.0, 20.0, 101), Some(10.0)).unwrap_err();
        assert!(matches!(err, Error::AliasingDetected { .. }));
    }
}
