use serde::Serialize;

use super::fidelity::{ground_overlaps, require_unique_ground};
use crate::error::{Error, Result};
use crate::numerics::{linspace, log_sum_exp};
use crate::spectral_core::HermitianOperator;

const CONVERGENCE_TOL: f64 = 1e-6;
const TAIL_FRACTION: f64 = 0.2;
const OVERLAP_FLOOR: f64 = 1e-300;

/// Imaginary-time film: `Z(R) = ⟨ε₀|e^{-(H_f - ε'₀)R}|ε₀⟩` and the split of
/// `f(R) = -ln⟨ε₀|e^{-(H_f - ε₀)R}|ε₀⟩ / N` into bulk, surface and Casimir
/// parts.
#[derive(Debug, Clone, Serialize)]
pub struct FilmFreeEnergy {
    pub r_grid: Vec<f64>,
    pub z_samples: Vec<f64>,
    pub transverse_cells: f64,
    pub f_total: Vec<f64>,
    /// `Δε₀ / N`.
    pub bulk: f64,
    pub surface: f64,
    pub casimir: Vec<f64>,
}

impl FilmFreeEnergy {
    /// Builds the decomposition from `ln Z(R)` samples and the exact
    /// `R → ∞` limit `ln Z_∞ = ln F²`.
    pub fn from_ln_z(
        r_grid: &[f64],
        ln_z: &[f64],
        transverse_cells: f64,
        ground_shift: f64,
        ln_z_limit: f64,
    ) -> Result<Self> {
        validate_grid(r_grid)?;
        if ln_z.len() != r_grid.len() {
            return Err(Error::invalid("ln Z samples must match the R grid"));
        }
        if !(transverse_cells > 0.0) {
            return Err(Error::invalid("transverse cell count must be positive"));
        }
        let n = transverse_cells;
        let last = *ln_z.last().unwrap();
        let deviation = (last - ln_z_limit).exp_m1().abs();
        if deviation > CONVERGENCE_TOL {
            return Err(Error::GridTooShort { deviation });
        }
        let tail_len = ((r_grid.len() as f64 * TAIL_FRACTION).ceil() as usize).max(1);
        let tail = &ln_z[ln_z.len() - tail_len..];
        let surface = tail.iter().map(|l| -l / (2.0 * n)).sum::<f64>() / tail_len as f64;
        let bulk = ground_shift / n;
        let f_total: Vec<f64> = r_grid.iter().zip(ln_z).map(|(r, l)| r * bulk - l / n).collect();
        let casimir = ln_z.iter().map(|l| -l / n - 2.0 * surface).collect();
        Ok(Self {
            r_grid: r_grid.to_vec(),
            z_samples: ln_z.iter().map(|l| l.exp()).collect(),
            transverse_cells,
            f_total,
            bulk,
            surface,
            casimir,
        })
    }

    /// `e^{-2N f_s}`, to be compared with `F²`.
    pub fn surface_weight(&self) -> f64 {
        (-2.0 * self.transverse_cells * self.surface).exp()
    }
}

fn validate_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.len() < 2 {
        return Err(Error::invalid("R grid needs at least two points"));
    }
    if !(r_grid[0] > 0.0) || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("R grid must be positive and strictly ascending"));
    }
    Ok(())
}

/// Uniform grid on `(0, r_max]` with `r_max = 40 / gap`, so the tail used
/// for the surface term sits deep in the projected regime.
pub fn default_film_grid(gap: f64) -> Vec<f64> {
    let r_max = 40.0 / gap;
    linspace(r_max / 200.0, r_max, 200)
}

pub fn film_partition_function(
    h0: &HermitianOperator,
    hf: &HermitianOperator,
    r_grid: &[f64],
    transverse_cells: f64,
) -> Result<FilmFreeEnergy> {
    require_unique_ground(h0)?;
    require_unique_ground(hf)?;
    validate_grid(r_grid)?;
    let overlaps = ground_overlaps(h0, hf);
    let ef0 = hf.ground_energy();
    let terms: Vec<(f64, f64)> = overlaps
        .iter()
        .zip(hf.eigenvalues())
        .filter(|(c, _)| **c > OVERLAP_FLOOR)
        .map(|(c, e)| (c.ln(), e - ef0))
        .collect();
    let ln_z: Vec<f64> = r_grid
        .iter()
        .map(|&r| {
            let logs: Vec<f64> = terms.iter().map(|(lc, de)| lc - de * r).collect();
            log_sum_exp(&logs)
        })
        .collect();
    let ground_shift = ef0 - h0.ground_energy();
    FilmFreeEnergy::from_ln_z(r_grid, &ln_z, transverse_cells, ground_shift, overlaps[0].ln())
}

/// Smallest excitation of `hf` that the pre-quench ground state overlaps.
pub fn reachable_gap(h0: &HermitianOperator, hf: &HermitianOperator) -> Result<f64> {
    let overlaps = ground_overlaps(h0, hf);
    let ef0 = hf.ground_energy();
    overlaps
        .iter()
        .zip(hf.eigenvalues())
        .skip(1)
        .filter(|(c, _)| **c > 1e-14)
        .map(|(_, e)| e - ef0)
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))))
        .ok_or(Error::NoContinuum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quench_ground::ground_fidelity;

    fn pair() -> (HermitianOperator, HermitianOperator) {
        let h0 = HermitianOperator::from_real_diagonal(&[-1.0, 1.0]).unwrap();
        let hf = HermitianOperator::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        (h0, hf)
    }

    #[test]
    fn pair_closed_form() {
        let (h0, hf) = pair();
        let grid = default_film_grid(2.0);
        let film = film_partition_function(&h0, &hf, &grid, 1.0).unwrap();
        for (r, z) in grid.iter().zip(&film.z_samples) {
            assert!((z - 0.5 * (1.0 + (-2.0 * r).exp())).abs() < 1e-14);
        }
        assert!((film.surface - 2f64.ln() / 2.0).abs() < 1e-14);
        assert!((film.surface_weight() - 0.5).abs() < 1e-14);
        assert!((film.bulk - (-1.0 + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn decomposition_reconstructs() {
        let (h0, hf) = pair();
        let grid = default_film_grid(2.0);
        let film = film_partition_function(&h0, &hf, &grid, 1.0).unwrap();
        for i in 0..grid.len() {
            let rebuilt = grid[i] * film.bulk + 2.0 * film.surface + film.casimir[i];
            assert!((rebuilt - film.f_total[i]).abs() < 1e-9);
        }
        assert!(film.z_samples.windows(2).all(|w| w[1] <= w[0]));
        assert!(film.z_samples.iter().all(|z| *z > 0.0 && *z <= 1.0));
        assert!(film.casimir.last().unwrap().abs() < 1e-12);
    }

    #[test]
    fn null_quench_film_is_trivial() {
        let (h0, _) = pair();
        let film = film_partition_function(&h0, &h0, &[0.5, 1.0, 2.0], 3.0).unwrap();
        assert!(film.z_samples.iter().all(|z| (z - 1.0).abs() < 1e-15));
        assert_eq!(film.surface, 0.0);
        assert!(film.casimir.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn short_grid_is_rejected() {
        let (h0, hf) = pair();
        let err = film_partition_function(&h0, &hf, &[0.1, 0.2, 0.3], 1.0).unwrap_err();
        assert!(matches!(err, Error::GridTooShort { .. }));
        assert!(film_partition_function(&h0, &hf, &[0.2, 0.1], 1.0).is_err());
    }

    #[test]
    fn surface_matches_fidelity() {
        let (h0, hf) = pair();
        let f = ground_fidelity(&h0, &hf).unwrap();
        let gap = reachable_gap(&h0, &hf).unwrap();
        let film = film_partition_function(&h0, &hf, &default_film_grid(gap), 1.0).unwrap();
        assert!((film.surface_weight() - f * f).abs() < 1e-8);
    }
}
