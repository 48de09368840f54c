use serde::Serialize;

use super::gibbs::{free_energy_difference, gibbs_state, Beta};
use super::operator::eigendecompose;
use super::work::{cumulants, tpm_distribution, QuenchSpec};
use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, pairwise_sum};

const IDENTITY_TOL: f64 = 1e-8;
const REPORTED_CUMULANTS: usize = 10;

/// Entropy production of a finite-temperature quench, computed along
/// independent routes.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    /// `⟨W⟩` from the TPM distribution.
    pub mean_work: f64,
    /// `Tr[H_f ρ_τ] - Tr[H_0 ρ_G]`.
    pub mean_work_trace: f64,
    pub delta_f: f64,
    /// `β(⟨W⟩ - ΔF)`.
    pub s_irr: f64,
    /// `D(ρ_τ ‖ ρ_G(λ_f))` from the spectrum of `ρ_τ` and the matrix `ln ρ_G(λ_f)`.
    pub relative_entropy: f64,
    /// `½‖ρ_τ - ρ_G(λ_f)‖₁`, in `[0, 1]`.
    pub trace_distance: f64,
    /// `‖ρ_τ - ρ_G(λ_f)‖₁`, in `[0, 2]`.
    pub trace_norm: f64,
    /// `⟨e^{-β(W-ΔF)}⟩ - 1`.
    pub jarzynski_residual: f64,
    pub cumulants: Vec<f64>,
}

impl EntropyReport {
    /// `D ≥ ‖ρ - σ‖₁²/2`.
    pub fn pinsker_holds(&self) -> bool {
        self.relative_entropy >= self.trace_norm.powi(2) / 2.0 - 1e-9
    }
}

pub fn entropy_production(q: &QuenchSpec) -> Result<EntropyReport> {
    let beta = match q.beta {
        Beta::Finite(b) if b > 0.0 => b,
        _ => {
            return Err(Error::invalid(
                "entropy production needs a finite positive beta",
            ))
        }
    };
    let d = tpm_distribution(q)?;
    let mean_work = d.mean();

    let initial = gibbs_state(&q.initial, q.beta)?;
    let reference = gibbs_state(&q.final_, q.beta)?;
    let rho_g = q.initial.spectral_matrix(&initial.weights);
    let u = q.propagator_matrix();
    let rho_tau = &u * &rho_g * u.adjoint();

    let e_final = (q.final_.entries() * &rho_tau).trace().re;
    let e_initial = (q.initial.entries() * &rho_g).trace().re;
    let mean_work_trace = e_final - e_initial;
    if (mean_work - mean_work_trace).abs() > IDENTITY_TOL * mean_work.abs().max(1.0) {
        return Err(Error::IdentityMismatch {
            quantity: "mean work",
            first: mean_work,
            second: mean_work_trace,
        });
    }

    let delta_f = free_energy_difference(&q.initial, &q.final_, q.beta)?;
    let s_irr = beta * (mean_work - delta_f);

    // D = Tr ρ ln ρ - Tr ρ ln σ with σ = ρ_G(λ_f).
    let rho_tau_op = eigendecompose(rho_tau.clone())?;
    let neg_entropy: Vec<f64> = rho_tau_op
        .eigenvalues()
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * p.ln())
        .collect();
    let ln_sigma_diag: Vec<f64> = reference.weights.iter().map(|p| p.ln()).collect();
    if ln_sigma_diag.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "reference Gibbs state is not full rank at this beta",
        ));
    }
    let ln_sigma = q.final_.spectral_matrix(&ln_sigma_diag);
    let cross = (&rho_tau * &ln_sigma).trace().re;
    let relative_entropy = pairwise_sum(&neg_entropy) - cross;

    if (s_irr - relative_entropy).abs() > IDENTITY_TOL * s_irr.abs().max(1.0) {
        return Err(Error::IdentityMismatch {
            quantity: "irreversible entropy vs relative entropy",
            first: s_irr,
            second: relative_entropy,
        });
    }

    let sigma = q.final_.spectral_matrix(&reference.weights);
    let diff = eigendecompose(&rho_tau - &sigma)?;
    let trace_norm: f64 = diff.eigenvalues().iter().map(|e| e.abs()).sum();

    let logs: Vec<f64> = d
        .atoms
        .iter()
        .map(|a| a.probability.ln() - beta * (a.work - delta_f))
        .collect();
    let jarzynski_residual = log_sum_exp(&logs).exp_m1();

    Ok(EntropyReport {
        mean_work,
        mean_work_trace,
        delta_f,
        s_irr,
        relative_entropy,
        trace_distance: 0.5 * trace_norm,
        trace_norm,
        jarzynski_residual,
        cumulants: cumulants(&d, REPORTED_CUMULANTS)?,
    })
}
