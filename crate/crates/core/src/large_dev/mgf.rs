use crate::error::{Error, Result};
use crate::ising_chain::BogoliubovModeSet;
use crate::numerics::log_sum_exp;
use crate::quench_ground::WorkDensity;
use crate::spectral_core::WorkDistribution;

const DENSITY_TAIL_TOL: f64 = 1e-8;

/// Anything that can evaluate `ln ⟨e^{-R W_irr}⟩` for a ground-state quench.
pub trait MomentGenerating: Sync {
    fn n_cells(&self) -> f64;
    fn ln_mgf(&self, r: f64) -> Result<f64>;
    /// `⟨W_irr⟩`, extensive.
    fn mean_work(&self) -> f64;
    /// Smallest nonzero irreversible work; sets the `R` scale.
    fn energy_scale(&self) -> f64;
    /// `2 f_s = -ln F² / N`.
    fn surface_limit(&self) -> f64;
}

/// Atomic distribution of `W_irr` with its cell count.
#[derive(Debug, Clone)]
pub struct AtomicWork {
    atoms: Vec<(f64, f64)>,
    n_cells: f64,
    delta_weight: f64,
}

impl AtomicWork {
    pub fn new(d: &WorkDistribution, n_cells: f64) -> Result<Self> {
        if !(n_cells > 0.0) {
            return Err(Error::invalid("cell count must be positive"));
        }
        let tol = d.merged_tolerance.max(1e-14);
        let atoms: Vec<(f64, f64)> = d
            .irreversible_atoms()
            .iter()
            .map(|a| (if a.work <= tol { 0.0 } else { a.work }, a.probability))
            .collect();
        Ok(Self {
            atoms,
            n_cells,
            delta_weight: d.adiabatic_weight(),
        })
    }

    /// Direct construction from `(W_irr, p)` pairs.
    pub fn from_pairs(atoms: Vec<(f64, f64)>, n_cells: f64) -> Result<Self> {
        if atoms.iter().any(|(w, p)| *w < 0.0 || *p < 0.0) {
            return Err(Error::invalid("irreversible work atoms must be nonnegative"));
        }
        let delta_weight = atoms.iter().filter(|(w, _)| *w == 0.0).map(|(_, p)| p).sum();
        Ok(Self {
            atoms,
            n_cells,
            delta_weight,
        })
    }
}

impl MomentGenerating for AtomicWork {
    fn n_cells(&self) -> f64 {
        self.n_cells
    }

    fn ln_mgf(&self, r: f64) -> Result<f64> {
        let logs: Vec<f64> = self
            .atoms
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(w, p)| p.ln() - r * w)
            .collect();
        Ok(log_sum_exp(&logs))
    }

    fn mean_work(&self) -> f64 {
        self.atoms.iter().map(|(w, p)| w * p).sum()
    }

    fn energy_scale(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|(w, p)| *w > 0.0 && *p > 0.0)
            .map(|(w, _)| *w)
            .fold(f64::INFINITY, f64::min)
    }

    fn surface_limit(&self) -> f64 {
        -self.delta_weight.ln() / self.n_cells
    }
}

impl MomentGenerating for BogoliubovModeSet {
    fn n_cells(&self) -> f64 {
        BogoliubovModeSet::n_cells(self)
    }

    fn ln_mgf(&self, r: f64) -> Result<f64> {
        Ok(BogoliubovModeSet::ln_mgf(self, r))
    }

    fn mean_work(&self) -> f64 {
        self.mean_irreversible_work()
    }

    fn energy_scale(&self) -> f64 {
        self.pair_energies().into_iter().fold(f64::INFINITY, f64::min)
    }

    fn surface_limit(&self) -> f64 {
        -2.0 * self.ln_fidelity() / BogoliubovModeSet::n_cells(self)
    }
}

/// Broadened density plus its adiabatic atom. Negative `R` is only admitted
/// while the integrand has decayed at the top of the grid.
#[derive(Debug, Clone)]
pub struct DensityWork<'a> {
    pub density: &'a WorkDensity,
    pub n_cells: f64,
}

impl MomentGenerating for DensityWork<'_> {
    fn n_cells(&self) -> f64 {
        self.n_cells
    }

    fn ln_mgf(&self, r: f64) -> Result<f64> {
        let d = self.density;
        let integrand: Vec<f64> = d
            .w_grid
            .iter()
            .zip(&d.density)
            .map(|(w, rho)| rho.max(0.0) * (-r * w).exp())
            .collect();
        let total = d.delta_weight + crate::numerics::trapezoid(&d.w_grid, &integrand);
        let top = integrand.last().copied().unwrap_or(0.0);
        if !total.is_finite() || (r < 0.0 && top > DENSITY_TAIL_TOL * total) {
            return Err(Error::DivergentMgf { r });
        }
        Ok(total.ln())
    }

    fn mean_work(&self) -> f64 {
        let d = self.density;
        let wr: Vec<f64> = d.w_grid.iter().zip(&d.density).map(|(w, rho)| w * rho).collect();
        crate::numerics::trapezoid(&d.w_grid, &wr)
    }

    fn energy_scale(&self) -> f64 {
        let d = self.density;
        let peak = d.density.iter().cloned().fold(0.0, f64::max);
        d.w_grid
            .iter()
            .zip(&d.density)
            .find(|(w, rho)| **w > 0.0 && **rho > 1e-3 * peak)
            .map_or(d.broadening, |(w, _)| *w)
    }

    fn surface_limit(&self) -> f64 {
        -self.density.delta_weight.ln() / self.n_cells
    }
}

/// `f_ex(R) = -(1/N) ln ⟨e^{-R W_irr}⟩` on a grid containing `R = 0`.
pub fn excess_free_energy<M: MomentGenerating + ?Sized>(source: &M, r_grid: &[f64]) -> Result<Vec<f64>> {
    if !r_grid.iter().any(|r| *r == 0.0) {
        return Err(Error::invalid("R grid must contain 0"));
    }
    let n = source.n_cells();
    r_grid.iter().map(|&r| Ok(-source.ln_mgf(r)? / n)).collect()
}
