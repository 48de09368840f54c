use num_complex::Complex64;
use serde::Serialize;

use super::gibbs::{gibbs_state, Beta};
use super::operator::{unitarity_deviation, CMatrix, HermitianOperator};
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;

pub const DEFAULT_DIMENSION_CAP: usize = 4096;
pub const CUMULANT_ORDER_CAP: usize = 12;
const MERGE_RELATIVE: f64 = 1e-11;

/// Protocol between the two energy measurements.
#[derive(Debug, Clone)]
pub struct QuenchSpec {
    pub initial: HermitianOperator,
    pub final_: HermitianOperator,
    /// `None` means a sudden quench (identity propagator).
    pub propagator: Option<CMatrix>,
    pub beta: Beta,
}

impl QuenchSpec {
    pub fn sudden(initial: HermitianOperator, final_: HermitianOperator, beta: Beta) -> Result<Self> {
        Self::new(initial, final_, None, beta)
    }

    pub fn new(
        initial: HermitianOperator,
        final_: HermitianOperator,
        propagator: Option<CMatrix>,
        beta: Beta,
    ) -> Result<Self> {
        if initial.dim() != final_.dim() {
            return Err(Error::invalid(format!(
                "initial dim {} != final dim {}",
                initial.dim(),
                final_.dim()
            )));
        }
        if let Some(u) = &propagator {
            if u.nrows() != initial.dim() || u.ncols() != initial.dim() {
                return Err(Error::invalid("propagator dimension mismatch"));
            }
            let dev = unitarity_deviation(u);
            if dev > 1e-10 {
                return Err(Error::invalid(format!(
                    "propagator is not unitary (deviation {dev:e})"
                )));
            }
        }
        Ok(Self {
            initial,
            final_,
            propagator,
            beta: beta.validate()?,
        })
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    /// `U` as a dense matrix (identity for sudden quenches).
    pub fn propagator_matrix(&self) -> CMatrix {
        self.propagator
            .clone()
            .unwrap_or_else(|| CMatrix::identity(self.dim(), self.dim()))
    }

    /// `|⟨ε'_m|U|ε_n⟩|²` indexed `[m][n]`.
    pub fn transition_probabilities(&self) -> Vec<Vec<f64>> {
        let v0 = self.initial.eigenvectors();
        let vf = self.final_.eigenvectors();
        let amp = match &self.propagator {
            Some(u) => vf.adjoint() * u * v0,
            None => vf.adjoint() * v0,
        };
        (0..self.dim())
            .map(|m| (0..self.dim()).map(|n| amp[(m, n)].norm_sqr()).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkAtom {
    pub work: f64,
    pub probability: f64,
}

/// Finite atomic measure over work values, strictly ascending in `W`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkDistribution {
    pub atoms: Vec<WorkAtom>,
    /// `Δε₀ = ε'₀ - ε₀`.
    pub adiabatic_shift: f64,
    pub merged_tolerance: f64,
}

impl WorkDistribution {
    /// Build from raw `(W, p)` pairs: sort, drop zero weights, and merge
    /// values closer than `merged_tolerance`.
    pub fn from_raw(mut raw: Vec<WorkAtom>, adiabatic_shift: f64, merged_tolerance: f64) -> Self {
        raw.retain(|a| a.probability > 0.0);
        raw.sort_by(|a, b| a.work.total_cmp(&b.work));
        let mut atoms: Vec<WorkAtom> = Vec::new();
        let mut group: Vec<WorkAtom> = Vec::new();
        let flush = |group: &mut Vec<WorkAtom>, atoms: &mut Vec<WorkAtom>| {
            if group.is_empty() {
                return;
            }
            let ps: Vec<f64> = group.iter().map(|a| a.probability).collect();
            let pw: Vec<f64> = group.iter().map(|a| a.probability * a.work).collect();
            let p = pairwise_sum(&ps);
            atoms.push(WorkAtom {
                work: pairwise_sum(&pw) / p,
                probability: p,
            });
            group.clear();
        };
        for atom in raw {
            if let Some(last) = group.last() {
                if atom.work - last.work > merged_tolerance {
                    flush(&mut group, &mut atoms);
                }
            }
            group.push(atom);
        }
        flush(&mut group, &mut atoms);
        Self {
            atoms,
            adiabatic_shift,
            merged_tolerance,
        }
    }

    pub fn total_probability(&self) -> f64 {
        let ps: Vec<f64> = self.atoms.iter().map(|a| a.probability).collect();
        pairwise_sum(&ps)
    }

    pub fn mean(&self) -> f64 {
        let v: Vec<f64> = self.atoms.iter().map(|a| a.probability * a.work).collect();
        pairwise_sum(&v)
    }

    /// Weight of the atom at `W = Δε₀` (the adiabatic outcome), zero if absent.
    pub fn adiabatic_weight(&self) -> f64 {
        self.atoms
            .iter()
            .find(|a| (a.work - self.adiabatic_shift).abs() <= self.merged_tolerance.max(1e-14))
            .map_or(0.0, |a| a.probability)
    }

    /// Atoms shifted to irreversible work `W - Δε₀`.
    pub fn irreversible_atoms(&self) -> Vec<WorkAtom> {
        self.atoms
            .iter()
            .map(|a| WorkAtom {
                work: (a.work - self.adiabatic_shift).max(0.0),
                probability: a.probability,
            })
            .collect()
    }

    pub fn min_work(&self) -> f64 {
        self.atoms.first().map_or(0.0, |a| a.work)
    }

    pub fn max_work(&self) -> f64 {
        self.atoms.last().map_or(0.0, |a| a.work)
    }
}

/// Two-point-measurement work distribution with the default dimension cap.
pub fn tpm_distribution(q: &QuenchSpec) -> Result<WorkDistribution> {
    tpm_distribution_with_cap(q, DEFAULT_DIMENSION_CAP)
}

pub fn tpm_distribution_with_cap(q: &QuenchSpec, cap: usize) -> Result<WorkDistribution> {
    let dim = q.dim();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let gibbs = gibbs_state(&q.initial, q.beta)?;
    let transitions = q.transition_probabilities();
    let e0 = q.initial.eigenvalues();
    let ef = q.final_.eigenvalues();

    let lo = e0[0].min(ef[0]);
    let hi = e0[dim - 1].max(ef[dim - 1]);
    let span = (hi - lo).max(lo.abs().max(hi.abs())).max(1.0);
    let tolerance = MERGE_RELATIVE * span;

    let mut raw = Vec::with_capacity(dim * dim);
    for (n, &pn) in gibbs.weights.iter().enumerate() {
        if pn == 0.0 {
            continue;
        }
        for (m, row) in transitions.iter().enumerate() {
            let p = pn * row[n];
            if p > 0.0 {
                raw.push(WorkAtom {
                    work: ef[m] - e0[n],
                    probability: p,
                });
            }
        }
    }
    Ok(WorkDistribution::from_raw(raw, ef[0] - e0[0], tolerance))
}

/// `g(u) = Σ p·e^{iuW}` over the atoms.
pub fn characteristic_function(d: &WorkDistribution, u_grid: &[f64]) -> Vec<Complex64> {
    u_grid
        .iter()
        .map(|&u| {
            let re: Vec<f64> = d.atoms.iter().map(|a| a.probability * (u * a.work).cos()).collect();
            let im: Vec<f64> = d.atoms.iter().map(|a| a.probability * (u * a.work).sin()).collect();
            Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
        })
        .collect()
}

/// `g(u) = Tr[U† e^{iuH_f} U e^{-iuH_0} ρ_G]` from dense matrix products.
pub fn characteristic_function_trace(q: &QuenchSpec, u_grid: &[f64]) -> Result<Vec<Complex64>> {
    let gibbs = gibbs_state(&q.initial, q.beta)?;
    let rho = q.initial.spectral_matrix(&gibbs.weights);
    let u_mat = q.propagator_matrix();
    Ok(u_grid
        .iter()
        .map(|&u| {
            let forward = q.final_.exp_i(u);
            let backward = q.initial.exp_i(-u);
            let prod = u_mat.adjoint() * forward * &u_mat * backward * &rho;
            prod.trace()
        })
        .collect())
}

/// Cumulants `C_1..C_max_order`, `C_1` the mean and `C_2` the variance.
pub fn cumulants(d: &WorkDistribution, max_order: usize) -> Result<Vec<f64>> {
    if max_order > CUMULANT_ORDER_CAP {
        return Err(Error::OrderCap {
            order: max_order,
            cap: CUMULANT_ORDER_CAP,
        });
    }
    if max_order == 0 {
        return Ok(Vec::new());
    }
    let mean = d.mean();
    // Central moments μ_0..μ_max.
    let central: Vec<f64> = (0..=max_order)
        .map(|k| {
            let terms: Vec<f64> = d
                .atoms
                .iter()
                .map(|a| a.probability * (a.work - mean).powi(k as i32))
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    let mut kappa = vec![0.0; max_order + 1];
    for n in 1..=max_order {
        let mut k = central[n];
        for m in 1..n {
            k -= binomial(n - 1, m - 1) * kappa[m] * central[n - m];
        }
        kappa[n] = k;
    }
    kappa[1] = mean;
    Ok(kappa[1..].to_vec())
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `Σ_{n=2}^{N} (-1)^n βⁿ C_n / n!` given `C_1..C_N`.
pub fn cumulant_entropy_series(cumulants: &[f64], beta: f64) -> f64 {
    let mut factorial = 1.0;
    let mut total = 0.0;
    for (idx, c) in cumulants.iter().enumerate() {
        let n = idx + 1;
        factorial *= n as f64;
        if n >= 2 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * beta.powi(n as i32) * c / factorial;
        }
    }
    total
}
