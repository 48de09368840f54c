use rayon::prelude::*;
use serde::Serialize;

use super::film::{default_film_grid, film_partition_function, reachable_gap};
use super::fidelity::ground_fidelity;
use crate::error::{Error, Result};
use crate::numerics::{fit_power_law, richardson_nth};
use crate::spectral_core::HamiltonianFamily;

pub const MAX_ORDER: usize = 4;
const MIN_FIT_POINTS: usize = 5;
const ROUTE_TOL: f64 = 1e-4;

/// A one-parameter family of Hamiltonians whose ground-state overlaps can
/// be evaluated along two routes.
pub trait GroundStateSource: Sync {
    /// `N`, the number of transverse cells.
    fn n_cells(&self) -> f64;
    /// `ln |⟨ε₀(λ₀)|ε₀(λ_f)⟩|`.
    fn ln_fidelity(&self, lambda0: f64, lambda_f: f64) -> Result<f64>;
    /// Surface free energy `f_s` extracted from the imaginary-time film.
    fn surface_free_energy(&self, lambda0: f64, lambda_f: f64) -> Result<f64>;
}

/// Dense family `A + λB` with an explicit cell count.
pub struct FamilySource<'a> {
    pub family: &'a HamiltonianFamily,
    pub n_cells: f64,
}

impl GroundStateSource for FamilySource<'_> {
    fn n_cells(&self) -> f64 {
        self.n_cells
    }

    fn ln_fidelity(&self, lambda0: f64, lambda_f: f64) -> Result<f64> {
        Ok(ground_fidelity(&self.family.at(lambda0)?, &self.family.at(lambda_f)?)?.ln())
    }

    fn surface_free_energy(&self, lambda0: f64, lambda_f: f64) -> Result<f64> {
        let h0 = self.family.at(lambda0)?;
        let hf = self.family.at(lambda_f)?;
        let grid = match reachable_gap(&h0, &hf) {
            Ok(gap) => default_film_grid(gap),
            // Nothing but the ground state is reachable: Z ≡ F².
            Err(Error::NoContinuum) => vec![1.0, 2.0],
            Err(e) => return Err(e),
        };
        Ok(film_partition_function(&h0, &hf, &grid, self.n_cells)?.surface)
    }
}

/// Bulk critical exponents used to predict susceptibility scaling.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalExponents {
    pub nu: f64,
    pub alpha_specific_heat: f64,
    pub dimension: f64,
    pub lambda_c: f64,
}

impl CriticalExponents {
    pub const ISING_CHAIN: Self = Self {
        nu: 1.0,
        alpha_specific_heat: 0.0,
        dimension: 1.0,
        lambda_c: 1.0,
    };
}

#[derive(Debug, Clone, Serialize)]
pub struct SusceptibilityReport {
    pub orders: Vec<usize>,
    pub lambda0: f64,
    pub lambda_f: Vec<f64>,
    /// `chi[i][j]`: order `orders[i]` at `lambda_f[j]`, from `-N⁻¹ ∂ⁿ ln F`.
    pub chi: Vec<Vec<f64>>,
    /// Same derivatives taken of the film surface free energy.
    pub chi_surface: Vec<Vec<f64>>,
    /// Slope of `ln|χ₂|` against `ln|λ_f - λ_c|`, when order 2 was requested.
    pub fitted_exponent: Option<f64>,
    /// `νd - 2`.
    pub expected_exponent: f64,
    /// `α + ν`.
    pub alpha_s: f64,
    pub lambda_c: f64,
}

impl SusceptibilityReport {
    pub fn order_row(&self, order: usize) -> Option<&[f64]> {
        self.orders.iter().position(|o| *o == order).map(|i| self.chi[i].as_slice())
    }
}

fn step_for(lambda_f: f64, lambda_c: f64) -> f64 {
    (0.05 * (lambda_f - lambda_c).abs()).clamp(1e-4, 1e-2)
}

/// `χ_n = -N⁻¹ ∂ⁿ_{λ_f} ln F` at a single point, by Richardson
/// extrapolation with a step scaled to the distance from `lambda_c`.
pub fn susceptibility_at<S: GroundStateSource>(
    source: &S,
    lambda0: f64,
    lambda_f: f64,
    order: usize,
    lambda_c: f64,
) -> Result<f64> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::OrderCap { order, cap: MAX_ORDER });
    }
    let n = source.n_cells();
    let ln_f = |l: f64| source.ln_fidelity(lambda0, l).map(|v| -v / n).unwrap_or(f64::NAN);
    richardson_nth(ln_f, lambda_f, step_for(lambda_f, lambda_c), order)
}

pub fn fidelity_susceptibility<S: GroundStateSource>(
    source: &S,
    lambda0: f64,
    lambda_f_grid: &[f64],
    orders: &[usize],
    exponents: CriticalExponents,
) -> Result<SusceptibilityReport> {
    if orders.is_empty() || orders.iter().any(|o| *o == 0 || *o > MAX_ORDER) {
        return Err(Error::OrderCap {
            order: orders.iter().copied().max().unwrap_or(0),
            cap: MAX_ORDER,
        });
    }
    if lambda_f_grid.len() < MIN_FIT_POINTS {
        return Err(Error::FitWindowTooNarrow {
            points: lambda_f_grid.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let lc = exponents.lambda_c;
    if lambda_f_grid.iter().any(|l| (l - lc).abs() < 1e-9) {
        return Err(Error::invalid("lambda_f grid must avoid the critical point"));
    }

    let columns: Vec<(Vec<f64>, Vec<f64>)> = lambda_f_grid
        .par_iter()
        .map(|&lf| {
            let h = step_for(lf, lc);
            let f_s = |l: f64| source.surface_free_energy(lambda0, l).unwrap_or(f64::NAN);
            let mut a = Vec::with_capacity(orders.len());
            let mut b = Vec::with_capacity(orders.len());
            for &o in orders {
                a.push(susceptibility_at(source, lambda0, lf, o, lc)?);
                b.push(richardson_nth(f_s, lf, h, o)?);
            }
            Ok((a, b))
        })
        .collect::<Result<_>>()?;

    let mut chi = vec![Vec::with_capacity(lambda_f_grid.len()); orders.len()];
    let mut chi_surface = chi.clone();
    for (a, b) in &columns {
        for i in 0..orders.len() {
            chi[i].push(a[i]);
            chi_surface[i].push(b[i]);
        }
    }
    for i in 0..orders.len() {
        let scale = chi[i].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in chi[i].iter().zip(&chi_surface[i]) {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::invalid("susceptibility evaluation produced a non-finite value"));
            }
            if (x - y).abs() > ROUTE_TOL * x.abs().max(1e-6 * scale) {
                return Err(Error::IdentityMismatch {
                    quantity: "susceptibility from fidelity vs surface free energy",
                    first: *x,
                    second: *y,
                });
            }
        }
    }

    let fitted_exponent = match orders.iter().position(|o| *o == 2) {
        Some(i) => {
            let (x, y): (Vec<f64>, Vec<f64>) = lambda_f_grid
                .iter()
                .zip(&chi[i])
                .filter(|(_, c)| **c != 0.0)
                .map(|(l, c)| ((l - lc).abs(), c.abs()))
                .unzip();
            if x.len() < MIN_FIT_POINTS {
                return Err(Error::FitWindowTooNarrow {
                    points: x.len(),
                    required: MIN_FIT_POINTS,
                });
            }
            Some(fit_power_law(&x, &y)?.slope)
        }
        None => None,
    };

    Ok(SusceptibilityReport {
        orders: orders.to_vec(),
        lambda0,
        lambda_f: lambda_f_grid.to_vec(),
        chi,
        chi_surface,
        fitted_exponent,
        expected_exponent: exponents.nu * exponents.dimension - 2.0,
        alpha_s: exponents.alpha_specific_heat + exponents.nu,
        lambda_c: lc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linspace;
    use crate::spectral_core::CMatrix;
    use num_complex::Complex64;

    fn spin_half_family() -> HamiltonianFamily {
        // H(λ) = -σz - λσx: ground-state angle θ with tan θ = λ.
        let c = |v: f64| Complex64::new(v, 0.0);
        let a = CMatrix::from_row_slice(2, 2, &[c(-1.0), c(0.0), c(0.0), c(1.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.0), c(-1.0), c(-1.0), c(0.0)]);
        HamiltonianFamily::new(a, b).unwrap()
    }

    #[test]
    fn two_level_closed_form_susceptibility() {
        let fam = spin_half_family();
        let src = FamilySource { family: &fam, n_cells: 1.0 };
        let grid = linspace(0.3, 0.9, 7);
        let exps = CriticalExponents { lambda_c: 5.0, ..CriticalExponents::ISING_CHAIN };
        let rep = fidelity_susceptibility(&src, 0.0, &grid, &[1, 2], exps).unwrap();
        // F = cos(atan(λ)/2) from λ₀ = 0.
        for (j, &l) in grid.iter().enumerate() {
            let f = |x: f64| -(x.atan() / 2.0).cos().ln();
            let h = 1e-4;
            let d2 = (f(l + h) - 2.0 * f(l) + f(l - h)) / (h * h);
            assert!((rep.order_row(2).unwrap()[j] - d2).abs() < 1e-5);
        }
        assert_eq!(rep.expected_exponent, -1.0);
        assert_eq!(rep.alpha_s, 1.0);
    }

    #[test]
    fn first_order_vanishes_at_coincidence() {
        let fam = spin_half_family();
        let src = FamilySource { family: &fam, n_cells: 1.0 };
        let exps = CriticalExponents { lambda_c: 5.0, ..CriticalExponents::ISING_CHAIN };
        let grid = [0.4, 0.4 + 1e-3, 0.4 + 2e-3, 0.4 - 1e-3, 0.4 - 2e-3];
        let rep = fidelity_susceptibility(&src, 0.4, &grid, &[1], exps).unwrap();
        assert!(rep.chi[0][0].abs() < 1e-9);
    }

    #[test]
    fn guards() {
        let fam = spin_half_family();
        let src = FamilySource { family: &fam, n_cells: 1.0 };
        let exps = CriticalExponents::ISING_CHAIN;
        assert!(matches!(
            fidelity_susceptibility(&src, 0.0, &[0.2, 0.3], &[2], exps),
            Err(Error::FitWindowTooNarrow { .. })
        ));
        assert!(matches!(
            fidelity_susceptibility(&src, 0.0, &linspace(0.1, 0.5, 5), &[5], exps),
            Err(Error::OrderCap { .. })
        ));
    }
}
