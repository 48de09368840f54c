use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::fit_power_law;

const MAX_ROOT_ITERATIONS: usize = 200;

/// Unperturbed single-particle spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dispersion {
    /// `ε_n = spacing · n`.
    Linear { spacing: f64 },
    /// `ε_n = scale · (n + 1)²`, a particle in a box.
    Box { scale: f64 },
}

impl Dispersion {
    pub fn levels(&self, m: usize) -> Result<Vec<f64>> {
        match *self {
            Dispersion::Linear { spacing } if spacing > 0.0 && spacing.is_finite() => {
                Ok((0..m).map(|n| spacing * n as f64).collect())
            }
            Dispersion::Box { scale } if scale > 0.0 && scale.is_finite() => {
                Ok((0..m).map(|n| scale * ((n + 1) as f64).powi(2)).collect())
            }
            _ => Err(Error::invalid("dispersion scale must be finite and positive")),
        }
    }
}

/// Free fermions in `M` levels with a separable scatterer `v|w⟩⟨w|`.
///
/// Orbitals are expressed in the unperturbed eigenbasis, so `h₀` is
/// diagonal and column `j` of `perturbed_orbitals` is the `j`-th lowest
/// eigenvector of `h = h₀ + v|w⟩⟨w|`.
#[derive(Debug, Clone)]
pub struct ImpurityModel {
    pub levels: Vec<f64>,
    pub n_particles: usize,
    pub potential_strength: f64,
    pub potential_vector: Vec<f64>,
    /// On-shell T-matrix phase shift at the Fermi energy.
    pub phase_shift: f64,
    /// Phase shift read off the level displacements next to the Fermi energy.
    pub eigenphase_shift: f64,
    pub perturbed_levels: Vec<f64>,
    pub perturbed_orbitals: DMatrix<f64>,
}

/// Model with a uniform scatterer `w = (1, …, 1)/√M`.
pub fn build_impurity_model(m: usize, n: usize, dispersion: Dispersion, v: f64) -> Result<ImpurityModel> {
    let levels = dispersion.levels(m)?;
    let w = vec![1.0 / (m as f64).sqrt(); m];
    ImpurityModel::new(levels, n, w, v)
}

/// Potential strength giving `ρ_F v = coupling` for the uniform scatterer.
pub fn strength_for_coupling(m: usize, n: usize, dispersion: Dispersion, coupling: f64) -> Result<f64> {
    let levels = dispersion.levels(m)?;
    let w = vec![1.0 / (m as f64).sqrt(); m];
    let (_, rho) = fermi_point(&levels, &w, n)?;
    Ok(coupling / rho)
}

impl ImpurityModel {
    pub fn new(levels: Vec<f64>, n_particles: usize, weights: Vec<f64>, v: f64) -> Result<Self> {
        let m = levels.len();
        if m == 0 || n_particles == 0 || n_particles > m {
            return Err(Error::invalid(format!(
                "need 1 <= N <= M, got N = {n_particles}, M = {m}"
            )));
        }
        if weights.len() != m {
            return Err(Error::invalid("potential vector length differs from the level count"));
        }
        if levels.windows(2).any(|p| !(p[1] > p[0])) || levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("levels must be finite and strictly ascending"));
        }
        if !v.is_finite() {
            return Err(Error::invalid("potential strength must be finite"));
        }
        let norm = weights.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("potential vector must be nonzero"));
        }
        let w: Vec<f64> = weights.iter().map(|x| x / norm).collect();
        let (perturbed_levels, perturbed_orbitals) = rank_one_eigen(&levels, &w, v);
        let phase_shift = t_matrix_phase(&levels, &w, n_particles, v)?;
        let eigenphase_shift = eigenphase(&levels, &perturbed_levels, n_particles, v);
        Ok(Self {
            levels,
            n_particles,
            potential_strength: v,
            potential_vector: w,
            phase_shift,
            eigenphase_shift,
            perturbed_levels,
            perturbed_orbitals,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// Midpoint between the highest occupied and lowest empty level.
    pub fn fermi_energy(&self) -> f64 {
        fermi_point(&self.levels, &self.potential_vector, self.n_particles)
            .map(|p| p.0)
            .unwrap_or(f64::NAN)
    }

    /// `|w_F|² / Δ_F`, the scatterer-weighted density of states at the Fermi
    /// energy.
    pub fn fermi_density(&self) -> f64 {
        fermi_point(&self.levels, &self.potential_vector, self.n_particles)
            .map(|p| p.1)
            .unwrap_or(f64::NAN)
    }

    /// Level spacing at the Fermi energy.
    pub fn fermi_spacing(&self) -> f64 {
        let n = self.n_particles;
        let m = self.n_levels();
        if m < 2 {
            return 1.0;
        }
        let i = n.min(m - 1);
        self.levels[i] - self.levels[i - 1]
    }

    pub fn bandwidth(&self) -> f64 {
        let lo = self.levels[0].min(self.perturbed_levels[0]);
        let hi = self.levels[self.n_levels() - 1].max(self.perturbed_levels[self.n_levels() - 1]);
        hi - lo
    }

    /// `Δε₀`: many-body ground-energy shift for `N` particles.
    pub fn ground_shift(&self) -> f64 {
        (0..self.n_particles)
            .map(|j| self.perturbed_levels[j] - self.levels[j])
            .sum()
    }

    /// `(δ/π)²`.
    pub fn alpha_oc(&self) -> f64 {
        (self.phase_shift / std::f64::consts::PI).powi(2)
    }

    /// Dense `h₀ + v|w⟩⟨w|` in the unperturbed basis.
    pub fn single_particle_hamiltonian(&self) -> DMatrix<f64> {
        let m = self.n_levels();
        let w = &self.potential_vector;
        let v = self.potential_strength;
        DMatrix::from_fn(m, m, |i, j| {
            v * w[i] * w[j] + if i == j { self.levels[i] } else { 0.0 }
        })
    }
}

fn fermi_point(levels: &[f64], w: &[f64], n: usize) -> Result<(f64, f64)> {
    let m = levels.len();
    if n == 0 || n > m {
        return Err(Error::invalid("particle number outside 1..=M"));
    }
    if m == 1 {
        return Ok((levels[0], w[0] * w[0]));
    }
    let (lo, hi) = if n < m { (n - 1, n) } else { (m - 2, m - 1) };
    let spacing = levels[hi] - levels[lo];
    let e_f = if n < m {
        0.5 * (levels[lo] + levels[hi])
    } else {
        levels[m - 1] + 0.5 * spacing
    };
    let weight = 0.5 * (w[lo] * w[lo] + w[hi] * w[hi]);
    Ok((e_f, weight / spacing))
}

/// `tan δ = -π ρ_F v_eff` with `v_eff = v / (1 - v Re G₀(E_F))`; the
/// discrete sum at the midpoint stands in for the principal value.
fn t_matrix_phase(levels: &[f64], w: &[f64], n: usize, v: f64) -> Result<f64> {
    if v == 0.0 {
        return Ok(0.0);
    }
    let (e_f, rho) = fermi_point(levels, w, n)?;
    let g_re: f64 = levels.iter().zip(w).map(|(e, x)| x * x / (e_f - e)).sum();
    // δ is defined modulo π; atan keeps it in (-π/2, π/2).
    Ok((-std::f64::consts::PI * rho * v / (1.0 - v * g_re)).atan())
}

/// `δ = -π (E_j - ε_j) / Δ_j` averaged over the two levels at the Fermi
/// energy.
fn eigenphase(levels: &[f64], perturbed: &[f64], n: usize, v: f64) -> f64 {
    let m = levels.len();
    if v == 0.0 || m < 2 {
        return 0.0;
    }
    let local = |j: usize| {
        let spacing = if v > 0.0 {
            if j + 1 < m { levels[j + 1] - levels[j] } else { levels[j] - levels[j - 1] }
        } else if j > 0 {
            levels[j] - levels[j - 1]
        } else {
            levels[1] - levels[0]
        };
        -std::f64::consts::PI * (perturbed[j] - levels[j]) / spacing
    };
    if n < m {
        0.5 * (local(n - 1) + local(n))
    } else {
        local(n - 1)
    }
}

/// Eigenpairs of `diag(levels) + v w wᵀ` from the secular equation
/// `1 = v Σ w_n² / (E - ε_n)`, one root per interlacing interval.
fn rank_one_eigen(levels: &[f64], w: &[f64], v: f64) -> (Vec<f64>, DMatrix<f64>) {
    let m = levels.len();
    if v == 0.0 {
        return (levels.to_vec(), DMatrix::identity(m, m));
    }
    let active: Vec<usize> = (0..m).filter(|&i| w[i] != 0.0).collect();
    let k = active.len();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..k)
        .into_par_iter()
        .map(|j| {
            let p = active[j];
            let (a, b) = if v > 0.0 {
                (0.0, if j + 1 < k { levels[active[j + 1]] - levels[p] } else { v })
            } else {
                (if j > 0 { levels[active[j - 1]] - levels[p] } else { v }, 0.0)
            };
            let tau = secular_root(levels, w, &active, p, v, a, b);
            let mut x = vec![0.0; m];
            for &n in &active {
                x[n] = w[n] / (tau - (levels[n] - levels[p]));
            }
            let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            x.iter_mut().for_each(|c| *c /= norm);
            (levels[p] + tau, x)
        })
        .collect();
    for i in (0..m).filter(|&i| w[i] == 0.0) {
        let mut x = vec![0.0; m];
        x[i] = 1.0;
        pairs.push((levels[i], x));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let energies = pairs.iter().map(|p| p.0).collect();
    let orbitals = DMatrix::from_fn(m, m, |i, j| pairs[j].1[i]);
    (energies, orbitals)
}

/// Root of `f(τ) = 1 - v Σ w_n² / (τ - d_n)` on the open interval `(a, b)`,
/// with `d_n = ε_n - ε_p` measured from the anchoring pole.
fn secular_root(levels: &[f64], w: &[f64], active: &[usize], p: usize, v: f64, a: f64, b: f64) -> f64 {
    let f = |tau: f64| {
        let mut g = 0.0;
        let mut dg = 0.0;
        for &n in active {
            let r = 1.0 / (tau - (levels[n] - levels[p]));
            g += w[n] * w[n] * r;
            dg -= w[n] * w[n] * r * r;
        }
        (1.0 - v * g, -v * dg)
    };
    // f runs from -sign(v)·∞ at a to the opposite sign at b.
    let s_lo = -v.signum();
    let (mut lo, mut hi) = (a, b);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..MAX_ROOT_ITERATIONS {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx.signum() == s_lo {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if newton > lo && newton < hi && dfx.is_finite() && dfx != 0.0 {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        if (next - x).abs() <= 2.0 * f64::EPSILON * scale || hi - lo <= 2.0 * f64::EPSILON * scale {
            return next;
        }
        x = next;
    }
    x
}

/// `F = |det ⟨φ_i|ψ_j⟩|` over the occupied orbitals.
pub fn anderson_overlap(model: &ImpurityModel) -> f64 {
    if model.potential_strength == 0.0 {
        return 1.0;
    }
    let n = model.n_particles;
    let block = model.perturbed_orbitals.view((0, 0), (n, n)).into_owned();
    block.determinant().abs().min(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct AdiabaticScan {
    /// `(N, P(W = Δε₀))`.
    pub rows: Vec<(usize, f64)>,
    /// Log-log slope of the probability against `N`.
    pub fitted_exponent: Option<f64>,
}

/// `P(W = Δε₀) = F²` for each model.
pub fn adiabatic_probability_scan(models: &[ImpurityModel]) -> AdiabaticScan {
    let rows: Vec<(usize, f64)> = models
        .par_iter()
        .map(|m| (m.n_particles, anderson_overlap(m).powi(2)))
        .collect();
    let fitted_exponent = fit_scan(&rows);
    AdiabaticScan { rows, fitted_exponent }
}

fn fit_scan(rows: &[(usize, f64)]) -> Option<f64> {
    let x: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    if y.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    fit_power_law(&x, &y).ok().map(|f| f.slope)
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapScan {
    pub coupling: f64,
    pub phase_shift: f64,
    /// `(N, F, slope fitted over the rows so far)`.
    pub rows: Vec<(usize, f64, Option<f64>)>,
    /// Log-log slope of `F` against `N`.
    pub slope: Option<f64>,
}

/// Overlap at half filling (`M = 2N`) and fixed `ρ_F v`, for each `N`.
pub fn overlap_scaling(ns: &[usize], dispersion: Dispersion, coupling: f64) -> Result<OverlapScan> {
    if ns.is_empty() {
        return Err(Error::invalid("overlap scan needs at least one N"));
    }
    let results: Vec<(usize, f64, f64)> = ns
        .par_iter()
        .map(|&n| {
            let m = 2 * n;
            let v = strength_for_coupling(m, n, dispersion, coupling)?;
            let model = build_impurity_model(m, n, dispersion, v)?;
            Ok((n, anderson_overlap(&model), model.phase_shift))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(results.len());
    for i in 0..results.len() {
        let so_far: Vec<(usize, f64)> = results[..=i].iter().map(|r| (r.0, r.1)).collect();
        rows.push((results[i].0, results[i].1, if i > 0 { fit_scan(&so_far) } else { None }));
    }
    Ok(OverlapScan {
        coupling,
        phase_shift: results[results.len() - 1].2,
        slope: rows.last().and_then(|r| r.2),
        rows,
    })
}
