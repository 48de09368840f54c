//! Thermal sudden quenches of a linear family `H(λ) = A + λB`: the mean
//! work equals the quench amplitude times `∂_λ F_β`, and for small quenches
//! the entropy production is set by `∂²_λ F_β`.

use serde::Serialize;

use super::entropy::entropy_production;
use super::gibbs::{free_energy_difference, Beta};
use super::operator::HamiltonianFamily;
use super::work::{tpm_distribution, QuenchSpec};
use crate::error::{Error, Result};
use crate::numerics::{fit_power_law, log_sum_exp, richardson_first, richardson_second};

const FD_STEP: f64 = 1e-5;
// Roundoff in a second difference scales as eps/h², so F'' uses a wider step.
const FD_STEP_SECOND: f64 = 1e-3;
const WORK_IDENTITY_TOL: f64 = 1e-6;

/// `F_β(λ) = -ln Z(λ) / β`.
pub fn equilibrium_free_energy(fam: &HamiltonianFamily, lambda: f64, beta: f64) -> Result<f64> {
    let h = fam.at(lambda)?;
    let e0 = h.ground_energy();
    let logs: Vec<f64> = h.eigenvalues().iter().map(|e| -beta * (e - e0)).collect();
    Ok(e0 - log_sum_exp(&logs) / beta)
}

fn fd_step(lambda0: f64) -> f64 {
    FD_STEP * lambda0.abs().max(1.0)
}

fn fd_step_second(lambda0: f64) -> f64 {
    FD_STEP_SECOND * lambda0.abs().max(1.0)
}

fn free_energy_fn(fam: &HamiltonianFamily, beta: f64) -> impl Fn(f64) -> f64 + '_ {
    move |l| equilibrium_free_energy(fam, l, beta).unwrap_or(f64::NAN)
}

fn require_positive_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("beta must be finite and positive, got {beta}")))
    }
}

/// The two sides of `⟨W⟩ = (λ_f - λ_0)·F'_β(λ_0)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThermalWork {
    /// Mean of the TPM distribution.
    pub lhs: f64,
    /// Quench amplitude times the finite-difference free-energy slope.
    pub rhs: f64,
}

pub fn thermal_sudden_work(
    fam: &HamiltonianFamily,
    lambda0: f64,
    lambda_f: f64,
    beta: f64,
) -> Result<ThermalWork> {
    require_positive_beta(beta)?;
    let q = QuenchSpec::sudden(fam.at(lambda0)?, fam.at(lambda_f)?, Beta::Finite(beta))?;
    let lhs = tpm_distribution(&q)?.mean();
    let slope = richardson_first(free_energy_fn(fam, beta), lambda0, fd_step(lambda0));
    if !slope.is_finite() {
        return Err(Error::invalid("free energy is not finite near lambda0"));
    }
    let rhs = (lambda_f - lambda0) * slope;
    if (lhs - rhs).abs() >= WORK_IDENTITY_TOL * lhs.abs().max(1.0) {
        return Err(Error::IdentityMismatch {
            quantity: "thermal sudden-quench mean work",
            first: lhs,
            second: rhs,
        });
    }
    Ok(ThermalWork { lhs, rhs })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpansionRow {
    pub delta_lambda: f64,
    pub exact: f64,
    /// `-(δλ)² β F''_β(λ_0) / 2`.
    pub quadratic: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyExpansion {
    pub rows: Vec<ExpansionRow>,
    pub second_derivative: f64,
    /// Slope of `ln|exact - quadratic|` against `ln|δλ|`; expected near 3.
    pub residual_order: Option<f64>,
}

pub fn small_quench_entropy_expansion(
    fam: &HamiltonianFamily,
    lambda0: f64,
    deltas: &[f64],
    beta: f64,
) -> Result<EntropyExpansion> {
    require_positive_beta(beta)?;
    let f2 = richardson_second(free_energy_fn(fam, beta), lambda0, fd_step_second(lambda0));
    if !f2.is_finite() {
        return Err(Error::invalid("free energy is not finite near lambda0"));
    }
    let h0 = fam.at(lambda0)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &dl in deltas {
        let exact = if dl == 0.0 {
            0.0
        } else {
            let q = QuenchSpec::sudden(h0.clone(), fam.at(lambda0 + dl)?, Beta::Finite(beta))?;
            entropy_production(&q)?.s_irr
        };
        rows.push(ExpansionRow {
            delta_lambda: dl,
            exact,
            quadratic: -dl * dl * beta * f2 / 2.0,
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.delta_lambda != 0.0 && r.exact != r.quadratic)
        .map(|r| (r.delta_lambda.abs(), (r.exact - r.quadratic).abs()))
        .unzip();
    let residual_order = if x.len() >= 2 {
        Some(fit_power_law(&x, &y)?.slope)
    } else {
        None
    };
    Ok(EntropyExpansion {
        rows,
        second_derivative: f2,
        residual_order,
    })
}

/// `β(⟨W⟩ - ΔF)` for a thermal sudden quench, from the closed form
/// `β[(λ_f - λ_0)F'(λ_0) - F(λ_f) + F(λ_0)]` with the TPM mean in place of
/// the derivative term.
pub fn sudden_entropy_production(
    fam: &HamiltonianFamily,
    lambda0: f64,
    lambda_f: f64,
    beta: f64,
) -> Result<f64> {
    require_positive_beta(beta)?;
    let h0 = fam.at(lambda0)?;
    let hf = fam.at(lambda_f)?;
    let q = QuenchSpec::sudden(h0.clone(), hf.clone(), Beta::Finite(beta))?;
    let mean = tpm_distribution(&q)?.mean();
    Ok(beta * (mean - free_energy_difference(&h0, &hf, Beta::Finite(beta))?))
}
