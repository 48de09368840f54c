//! Brute-force spin-chain oracle for the periodic transverse-field Ising
//! chain, with bit `j` set meaning spin `j` points down (`σᶻ = -1`).
//!
//! The pre-quench ground state lives in the even-parity, zero-momentum
//! sector (the Hamiltonian is stoquastic, so its ground state has positive
//! amplitudes), and `H_f` conserves both quantum numbers. The oracle
//! therefore diagonalizes that sector only, which keeps `L = 12` at a
//! dimension of about 180. A full `2^L` dense builder is kept for small
//! chains and for cross-checking the sector reduction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quench_ground::vacuum_persistence;
use crate::spectral_core::{CMatrix, HamiltonianFamily};

pub const ED_MAX_LENGTH: usize = 12;
pub const DENSE_MAX_LENGTH: usize = 10;
const SECTOR_MAX_LENGTH: usize = 16;

fn check_length(length: usize, cap: usize) -> Result<()> {
    if length < 2 {
        return Err(Error::invalid(format!("chain length must be at least 2, got {length}")));
    }
    if length > cap {
        return Err(Error::DimensionCap {
            dim: 1usize << length.min(usize::BITS as usize - 1),
            cap: 1usize << cap,
        });
    }
    Ok(())
}

fn down_count(state: usize) -> i64 {
    state.count_ones() as i64
}

/// Both coupling matrices on the full `2^L` space: `A = -Σ σˣσˣ`,
/// `B = -Σ σᶻ`, so that `H(λ) = A + λB`.
pub fn ising_dense_family(length: usize) -> Result<HamiltonianFamily> {
    check_length(length, DENSE_MAX_LENGTH)?;
    let dim = 1usize << length;
    let mut a = CMatrix::zeros(dim, dim);
    let mut b = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        b[(s, s)] = Complex64::new(-((length as i64 - 2 * down_count(s)) as f64), 0.0);
        for j in 0..length {
            let t = s ^ (1 << j) ^ (1 << ((j + 1) % length));
            a[(t, s)] -= Complex64::new(1.0, 0.0);
        }
    }
    HamiltonianFamily::new(a, b)
}

/// Translation orbits of even-parity basis states.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub length: usize,
    pub representatives: Vec<usize>,
    pub orbit_sizes: Vec<usize>,
    lookup: Vec<usize>,
}

impl SectorBasis {
    pub fn even_zero_momentum(length: usize) -> Result<Self> {
        check_length(length, SECTOR_MAX_LENGTH)?;
        let dim = 1usize << length;
        let mask = dim - 1;
        let rotate = |s: usize| ((s << 1) | (s >> (length - 1))) & mask;
        let mut lookup = vec![usize::MAX; dim];
        let mut representatives = Vec::new();
        let mut orbit_sizes = Vec::new();
        for s in 0..dim {
            if s.count_ones() % 2 != 0 || lookup[s] != usize::MAX {
                continue;
            }
            let idx = representatives.len();
            let mut t = s;
            let mut size = 0;
            loop {
                if lookup[t] == idx {
                    break;
                }
                lookup[t] = idx;
                size += 1;
                t = rotate(t);
            }
            representatives.push(s);
            orbit_sizes.push(size);
        }
        Ok(Self {
            length,
            representatives,
            orbit_sizes,
            lookup,
        })
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    /// Coupling matrices projected on the symmetric orbit states
    /// `|ã⟩ = |a|^{-1/2} Σ_{s ∈ a} |s⟩`.
    pub fn family(&self) -> Result<HamiltonianFamily> {
        let n = self.dim();
        let l = self.length;
        let mut a = CMatrix::zeros(n, n);
        let mut b = CMatrix::zeros(n, n);
        for (col, &rep) in self.representatives.iter().enumerate() {
            b[(col, col)] = Complex64::new(-((l as i64 - 2 * down_count(rep)) as f64), 0.0);
            for j in 0..l {
                let t = rep ^ (1 << j) ^ (1 << ((j + 1) % l));
                let row = self.lookup[t];
                let scale = (self.orbit_sizes[col] as f64 / self.orbit_sizes[row] as f64).sqrt();
                a[(row, col)] -= Complex64::new(scale, 0.0);
            }
        }
        HamiltonianFamily::new(a, b)
    }
}

pub fn ising_sector_family(length: usize) -> Result<HamiltonianFamily> {
    SectorBasis::even_zero_momentum(length)?.family()
}

/// Vacuum persistence amplitude of the spin chain by exact diagonalization
/// of the even-parity zero-momentum sector.
pub fn ed_oracle_g(length: usize, lambda0: f64, lambda_f: f64, u_grid: &[f64]) -> Result<Vec<Complex64>> {
    check_length(length, ED_MAX_LENGTH)?;
    let fam = ising_sector_family(length)?;
    Ok(vacuum_persistence(&fam.at(lambda0)?, &fam.at(lambda_f)?, u_grid)?.g)
}

/// Same quantity on the full `2^L` space.
pub fn ed_dense_g(length: usize, lambda0: f64, lambda_f: f64, u_grid: &[f64]) -> Result<Vec<Complex64>> {
    let fam = ising_dense_family(length)?;
    Ok(vacuum_persistence(&fam.at(lambda0)?, &fam.at(lambda_f)?, u_grid)?.g)
}

/// Ground energy of the chain at field `λ` from the symmetric sector.
pub fn ed_ground_energy(length: usize, lambda: f64) -> Result<f64> {
    check_length(length, ED_MAX_LENGTH)?;
    Ok(ising_sector_family(length)?.at(lambda)?.ground_energy())
}
