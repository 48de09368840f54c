//! Transverse-field Ising chain: free-fermion mode data, the product form
//! of the vacuum persistence amplitude, work densities, and a spin-chain
//! exact-diagonalization oracle.

mod density;
mod ed;
mod modes;

pub use density::{work_density, work_density_with_cutoff};
pub use ed::{
    ed_dense_g, ed_ground_energy, ed_oracle_g, ising_dense_family, ising_sector_family, SectorBasis,
    DENSE_MAX_LENGTH, ED_MAX_LENGTH,
};
pub use modes::{
    bogoliubov_angle, build_modes, ising_g_exact, quasiparticle_energy, BogoliubovModeSet,
    CRITICAL_FIELD,
};

use crate::error::Result;
use crate::quench_ground::{
    fidelity_susceptibility, CriticalExponents, FilmFreeEnergy, GroundStateSource, SusceptibilityReport,
};

/// Film partition function from mode data on the default grid
/// `(0, 40/Δ_min]`, `Δ_min` the lightest pair energy.
pub fn ising_film(modes: &BogoliubovModeSet) -> Result<FilmFreeEnergy> {
    let gap = modes.pair_energies().into_iter().fold(f64::INFINITY, f64::min);
    ising_film_on(modes, &crate::quench_ground::default_film_grid(gap))
}

pub fn ising_film_on(modes: &BogoliubovModeSet, r_grid: &[f64]) -> Result<FilmFreeEnergy> {
    let ln_z: Vec<f64> = r_grid.iter().map(|&r| modes.ln_mgf(r)).collect();
    FilmFreeEnergy::from_ln_z(
        r_grid,
        &ln_z,
        modes.n_cells(),
        modes.ground_shift,
        2.0 * modes.ln_fidelity(),
    )
}

/// Periodic chain of `length` sites as a ground-state source.
#[derive(Debug, Clone, Copy)]
pub struct IsingChain {
    pub length: usize,
}

impl GroundStateSource for IsingChain {
    fn n_cells(&self) -> f64 {
        self.length as f64
    }

    fn ln_fidelity(&self, lambda0: f64, lambda_f: f64) -> Result<f64> {
        Ok(build_modes(self.length, lambda0, lambda_f)?.ln_fidelity())
    }

    fn surface_free_energy(&self, lambda0: f64, lambda_f: f64) -> Result<f64> {
        let modes = build_modes(self.length, lambda0, lambda_f)?;
        if modes.angle_diffs.iter().all(|d| *d == 0.0) {
            return Ok(0.0);
        }
        Ok(ising_film(&modes)?.surface)
    }
}

/// Orders 1 and 2 of the generalized susceptibility along a `λ_f` grid.
pub fn susceptibility_scan(length: usize, lambda0: f64, lambda_f_grid: &[f64]) -> Result<SusceptibilityReport> {
    fidelity_susceptibility(
        &IsingChain { length },
        lambda0,
        lambda_f_grid,
        &[1, 2],
        CriticalExponents::ISING_CHAIN,
    )
}
