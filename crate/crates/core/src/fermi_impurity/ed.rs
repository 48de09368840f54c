//! Many-body oracle in Fock space for a handful of levels.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::model::ImpurityModel;
use crate::error::{Error, Result};
use crate::spectral_core::{
    characteristic_function_trace, eigendecompose, tpm_distribution, Beta, CMatrix, QuenchSpec, WorkDistribution,
};

pub const ED_MAX_LEVELS: usize = 10;

/// `Σ h_ij c†_i c_j - μ N̂` on bit-string occupation states. With
/// `particles` set, only that number sector is kept.
pub fn fock_hamiltonian(h: &DMatrix<f64>, particles: Option<usize>, mu: f64) -> Result<CMatrix> {
    let m = h.nrows();
    if m > ED_MAX_LEVELS {
        let dim = match particles {
            Some(n) => binomial(m, n),
            None => 1usize << m.min(63),
        };
        return Err(Error::DimensionCap {
            dim,
            cap: binomial(ED_MAX_LEVELS, ED_MAX_LEVELS / 2),
        });
    }
    let states: Vec<u32> = (0u32..(1 << m))
        .filter(|s| particles.map_or(true, |n| s.count_ones() as usize == n))
        .collect();
    let mut index = vec![usize::MAX; 1 << m];
    for (k, s) in states.iter().enumerate() {
        index[*s as usize] = k;
    }
    let dim = states.len();
    let mut out = CMatrix::zeros(dim, dim);
    for (col, &s) in states.iter().enumerate() {
        for j in 0..m {
            if s & (1 << j) == 0 {
                continue;
            }
            // c_j picks up the parity of the occupied orbitals below j.
            let sign_j = parity(s & ((1 << j) - 1));
            let after = s & !(1 << j);
            for i in 0..m {
                if after & (1 << i) != 0 || h[(i, j)] == 0.0 {
                    continue;
                }
                let sign_i = parity(after & ((1 << i) - 1));
                let target = after | (1 << i);
                let row = index[target as usize];
                out[(row, col)] += Complex64::new(sign_i * sign_j * h[(i, j)], 0.0);
            }
        }
        out[(col, col)] -= Complex64::new(mu * s.count_ones() as f64, 0.0);
    }
    Ok(out)
}

fn parity(bits: u32) -> f64 {
    if bits.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Sudden many-body quench `H_i → H_i + V`. At zero temperature the `N`
/// sector is used; at finite `β` the whole Fock space with `μ` at the Fermi
/// energy, so the initial state is grand canonical.
pub fn fock_quench(model: &ImpurityModel, beta: Beta) -> Result<QuenchSpec> {
    let m = model.n_levels();
    let h0 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(model.levels.clone()));
    let h = model.single_particle_hamiltonian();
    let (particles, mu) = match beta {
        Beta::GroundState => (Some(model.n_particles), 0.0),
        Beta::Finite(_) => (None, model.fermi_energy()),
    };
    if m > ED_MAX_LEVELS {
        fock_hamiltonian(&h0, particles, mu)?;
    }
    let initial = eigendecompose(fock_hamiltonian(&h0, particles, mu)?)?;
    let final_ = eigendecompose(fock_hamiltonian(&h, particles, mu)?)?;
    QuenchSpec::sudden(initial, final_, beta)
}

/// `ν(t) = Tr[ρ e^{iH_i t} e^{-iH_f t}]`, the conjugate of the many-body
/// characteristic function.
pub fn ed_persistence(model: &ImpurityModel, t_grid: &[f64], beta: Beta) -> Result<Vec<Complex64>> {
    let q = fock_quench(model, beta)?;
    Ok(characteristic_function_trace(&q, t_grid)?
        .into_iter()
        .map(|z| z.conj())
        .collect())
}

pub fn ed_work_distribution(model: &ImpurityModel, beta: Beta) -> Result<WorkDistribution> {
    tpm_distribution(&fock_quench(model, beta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermi_impurity::model::{build_impurity_model, Dispersion};

    #[test]
    fn one_body_sector_reproduces_single_particle_matrix() {
        let model = build_impurity_model(5, 1, Dispersion::Box { scale: 0.4 }, 1.7).unwrap();
        let h = model.single_particle_hamiltonian();
        let f = fock_hamiltonian(&h, Some(1), 0.0).unwrap();
        // Sector states 1<<i are ordered by i.
        for i in 0..5 {
            for j in 0..5 {
                assert!((f[(i, j)].re - h[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn many_body_spectrum_is_sum_of_orbitals() {
        let model = build_impurity_model(6, 3, Dispersion::Linear { spacing: 1.0 }, 2.2).unwrap();
        let q = fock_quench(&model, Beta::GroundState).unwrap();
        assert_eq!(q.dim(), 20);
        let e0: f64 = model.perturbed_levels[..3].iter().sum();
        assert!((q.final_.ground_energy() - e0).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let model = build_impurity_model(12, 6, Dispersion::Linear { spacing: 1.0 }, 1.0).unwrap();
        assert!(matches!(
            fock_quench(&model, Beta::GroundState),
            Err(Error::DimensionCap { .. })
        ));
    }
}
