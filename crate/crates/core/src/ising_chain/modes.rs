//! Free-fermion solution of `H(λ) = -Σ_j (σˣ_j σˣ_{j+1} + λ σᶻ_j)` on a
//! periodic chain, restricted to the even-parity sector where the fermion
//! momenta are antiperiodic, `k = (2j-1)π/L`.
//!
//! Each pair `(k, -k)` is an independent two-level problem. A sudden quench
//! `λ₀ → λ_f` rotates the pair vacuum by the half-angle difference
//! `Δ_k = (θ_k(λ_f) - θ_k(λ₀))/2` with `tan θ_k = sin k / (λ - cos k)`, and
//! the post-quench vacuum overlap is `Π cos Δ_k`. Exciting a pair costs
//! `2ε_k(λ_f)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;

pub const CRITICAL_FIELD: f64 = 1.0;
const MAX_LENGTH: usize = 1_000_000;

/// Single quasiparticle energy `ε_k(λ) = 2√(λ² - 2λ cos k + 1)`.
pub fn quasiparticle_energy(lambda: f64, k: f64) -> f64 {
    // (λ - cos k)² + sin² k avoids cancellation near λ = 1, k = 0.
    2.0 * (lambda - k.cos()).hypot(k.sin())
}

/// Bogoliubov angle on the branch `θ ∈ (0, π)` for `k ∈ (0, π)`.
pub fn bogoliubov_angle(lambda: f64, k: f64) -> f64 {
    k.sin().atan2(lambda - k.cos())
}

#[derive(Debug, Clone, Serialize)]
pub struct BogoliubovModeSet {
    pub length: usize,
    pub lambda0: f64,
    pub lambda_f: f64,
    /// Positive momenta `(2j-1)π/L`, `j = 1..L/2`.
    pub momenta: Vec<f64>,
    pub pre_energies: Vec<f64>,
    pub post_energies: Vec<f64>,
    pub angle_diffs: Vec<f64>,
    /// `Δε₀ = E₀(λ_f) - E₀(λ₀)`.
    pub ground_shift: f64,
}

pub fn build_modes(length: usize, lambda0: f64, lambda_f: f64) -> Result<BogoliubovModeSet> {
    if length % 2 != 0 || !(4..=MAX_LENGTH).contains(&length) {
        return Err(Error::invalid(format!(
            "chain length must be even and in [4, {MAX_LENGTH}], got {length}"
        )));
    }
    if !lambda0.is_finite() || !lambda_f.is_finite() {
        return Err(Error::invalid("fields must be finite"));
    }
    let l = length as f64;
    let momenta: Vec<f64> = (1..=length / 2)
        .map(|j| (2 * j - 1) as f64 * std::f64::consts::PI / l)
        .collect();
    let pre_energies: Vec<f64> = momenta.iter().map(|&k| quasiparticle_energy(lambda0, k)).collect();
    let post_energies: Vec<f64> = momenta.iter().map(|&k| quasiparticle_energy(lambda_f, k)).collect();
    let angle_diffs: Vec<f64> = momenta
        .iter()
        .map(|&k| 0.5 * (bogoliubov_angle(lambda_f, k) - bogoliubov_angle(lambda0, k)))
        .collect();
    let ground_shift = pairwise_sum(&pre_energies) - pairwise_sum(&post_energies);
    Ok(BogoliubovModeSet {
        length,
        lambda0,
        lambda_f,
        momenta,
        pre_energies,
        post_energies,
        angle_diffs,
        ground_shift,
    })
}

impl BogoliubovModeSet {
    pub fn n_cells(&self) -> f64 {
        self.length as f64
    }

    /// `E₀(λ) = -Σ_{k>0} ε_k(λ)` for the pre-quench field.
    pub fn pre_ground_energy(&self) -> f64 {
        -pairwise_sum(&self.pre_energies)
    }

    pub fn post_ground_energy(&self) -> f64 {
        -pairwise_sum(&self.post_energies)
    }

    /// `ln F = Σ ln|cos Δ_k|`.
    pub fn ln_fidelity(&self) -> f64 {
        let logs: Vec<f64> = self.angle_diffs.iter().map(|d| d.cos().abs().ln()).collect();
        pairwise_sum(&logs)
    }

    pub fn fidelity(&self) -> f64 {
        self.ln_fidelity().exp()
    }

    /// Weight of the adiabatic atom, `Π cos² Δ_k`.
    pub fn delta_weight(&self) -> f64 {
        (2.0 * self.ln_fidelity()).exp()
    }

    /// Probability of exciting the pair `(k, -k)`: `sin² Δ_k`.
    pub fn pair_probabilities(&self) -> Vec<f64> {
        self.angle_diffs.iter().map(|d| d.sin().powi(2)).collect()
    }

    /// Pair excitation energies `2ε_k(λ_f)`.
    pub fn pair_energies(&self) -> Vec<f64> {
        self.post_energies.iter().map(|e| 2.0 * e).collect()
    }

    /// Thermodynamic single-quasiparticle gap `2|λ_f - 1|`.
    pub fn mass(&self) -> f64 {
        2.0 * (self.lambda_f - CRITICAL_FIELD).abs()
    }

    /// `⟨W_irr⟩ = Σ sin²Δ_k · 2ε_k(λ_f)`.
    pub fn mean_irreversible_work(&self) -> f64 {
        let terms: Vec<f64> = self
            .pair_probabilities()
            .iter()
            .zip(self.pair_energies())
            .map(|(p, e)| p * e)
            .collect();
        pairwise_sum(&terms)
    }

    /// `Var(W_irr) = Σ sin²Δ cos²Δ (2ε)²`.
    pub fn irreversible_work_variance(&self) -> f64 {
        let terms: Vec<f64> = self
            .angle_diffs
            .iter()
            .zip(self.pair_energies())
            .map(|(d, e)| (d.sin() * d.cos() * e).powi(2))
            .collect();
        pairwise_sum(&terms)
    }

    /// Largest pair energy; every multi-pair atom lies below the sum of these.
    pub fn max_pair_energy(&self) -> f64 {
        self.pair_energies().into_iter().fold(0.0, f64::max)
    }

    /// `ln ⟨e^{-R W_irr}⟩ = Σ ln[cos²Δ_k + sin²Δ_k e^{-2ε_k R}]`, valid for
    /// any real `R`.
    pub fn ln_mgf(&self, r: f64) -> f64 {
        let terms: Vec<f64> = self
            .angle_diffs
            .iter()
            .zip(&self.post_energies)
            .map(|(d, e)| {
                let c2 = d.cos().powi(2);
                let s2 = d.sin().powi(2);
                let x = -2.0 * e * r;
                if s2 == 0.0 {
                    c2.ln()
                } else if x > 0.0 {
                    // ln(c² + s² eˣ) = x + ln s² + ln(1 + (c²/s²) e^{-x})
                    x + s2.ln() + (c2 / s2 * (-x).exp()).ln_1p()
                } else {
                    (c2 + s2 * x.exp()).ln()
                }
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// `Z(R) = ⟨ε₀|e^{-(H_f - ε'₀)R}|ε₀⟩`.
    pub fn film_partition(&self, r: f64) -> f64 {
        self.ln_mgf(r).exp()
    }

    /// Characteristic function of `W_irr`:
    /// `Π_{k>0} [cos²Δ_k + sin²Δ_k e^{2iε_k(λ_f)u}]`, accumulated in log form.
    pub fn irreversible_characteristic(&self, u: f64) -> Complex64 {
        let mut re = Vec::with_capacity(self.angle_diffs.len());
        let mut im = Vec::with_capacity(self.angle_diffs.len());
        for (d, e) in self.angle_diffs.iter().zip(&self.post_energies) {
            let c2 = d.cos().powi(2);
            let s2 = d.sin().powi(2);
            let factor = Complex64::new(c2, 0.0) + Complex64::from_polar(s2, 2.0 * e * u);
            if factor.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let ln = factor.ln();
            re.push(ln.re);
            im.push(ln.im);
        }
        Complex64::from_polar(pairwise_sum(&re).exp(), pairwise_sum(&im))
    }
}

/// `g(u) = e^{iΔε₀u} Π_{k>0}[cos²Δ_k + sin²Δ_k e^{2iε_k(λ_f)u}]`.
pub fn ising_g_exact(modes: &BogoliubovModeSet, u_grid: &[f64]) -> Vec<Complex64> {
    u_grid
        .par_iter()
        .map(|&u| {
            Complex64::from_polar(1.0, modes.ground_shift * u) * modes.irreversible_characteristic(u)
        })
        .collect()
}
