use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral_core::{tpm_distribution, Beta, HermitianOperator, QuenchSpec, DEFAULT_DIMENSION_CAP};

const GAP_FLOOR: f64 = 1e-12;
const ATOM_IDENTITY_TOL: f64 = 1e-10;

pub(crate) fn require_unique_ground(h: &HermitianOperator) -> Result<()> {
    let gap = h.gap();
    if h.dim() > 1 && gap <= GAP_FLOOR {
        return Err(Error::DegenerateGround { gap });
    }
    Ok(())
}

/// `|⟨ε'_m|ε₀⟩|²` for every eigenvector of `hf`.
pub(crate) fn ground_overlaps(h0: &HermitianOperator, hf: &HermitianOperator) -> Vec<f64> {
    let psi0 = h0.ground_state();
    let vf = hf.eigenvectors();
    (0..hf.dim())
        .map(|m| {
            vf.column(m)
                .iter()
                .zip(&psi0)
                .map(|(a, b)| a.conj() * b)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect()
}

/// `F = |⟨ε₀|ε'₀⟩|`, cross-checked against the adiabatic atom of the
/// ground-state TPM distribution.
pub fn ground_fidelity(h0: &HermitianOperator, hf: &HermitianOperator) -> Result<f64> {
    require_unique_ground(h0)?;
    require_unique_ground(hf)?;
    let f2 = ground_overlaps(h0, hf)[0];
    if h0.dim() <= DEFAULT_DIMENSION_CAP {
        let q = QuenchSpec::sudden(h0.clone(), hf.clone(), Beta::GroundState)?;
        let atom = tpm_distribution(&q)?.adiabatic_weight();
        if (atom - f2).abs() > ATOM_IDENTITY_TOL {
            return Err(Error::IdentityMismatch {
                quantity: "adiabatic atom vs fidelity squared",
                first: atom,
                second: f2,
            });
        }
    }
    Ok(f2.sqrt())
}

/// Vacuum persistence amplitude and survival probability.
#[derive(Debug, Clone)]
pub struct VacuumPersistence {
    pub u_grid: Vec<f64>,
    /// `g(u) = Σ_m e^{i(ε'_m - ε₀)u} |⟨ε'_m|ε₀⟩|²`.
    pub g: Vec<Complex64>,
    /// `L(u) = |g(u)|²`.
    pub survival: Vec<f64>,
}

pub fn vacuum_persistence(
    h0: &HermitianOperator,
    hf: &HermitianOperator,
    u_grid: &[f64],
) -> Result<VacuumPersistence> {
    require_unique_ground(h0)?;
    let weights = ground_overlaps(h0, hf);
    let e0 = h0.ground_energy();
    let g: Vec<Complex64> = u_grid
        .iter()
        .map(|&u| {
            hf.eigenvalues()
                .iter()
                .zip(&weights)
                .map(|(e, w)| Complex64::from_polar(*w, (e - e0) * u))
                .sum()
        })
        .collect();
    let survival = g.iter().map(|z| z.norm_sqr()).collect();
    Ok(VacuumPersistence {
        u_grid: u_grid.to_vec(),
        g,
        survival,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::characteristic_function;

    fn pair() -> (HermitianOperator, HermitianOperator) {
        let h0 = HermitianOperator::from_real_diagonal(&[-1.0, 1.0]).unwrap();
        let hf = HermitianOperator::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        (h0, hf)
    }

    #[test]
    fn pair_fidelity() {
        let (h0, hf) = pair();
        assert!((ground_fidelity(&h0, &hf).unwrap() - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((ground_fidelity(&h0, &h0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pair_persistence_matches_distribution() {
        let (h0, hf) = pair();
        let us: Vec<f64> = (0..30).map(|i| 0.2 * i as f64).collect();
        let vp = vacuum_persistence(&h0, &hf, &us).unwrap();
        let d = tpm_distribution(&QuenchSpec::sudden(h0, hf, Beta::GroundState).unwrap()).unwrap();
        let g2 = characteristic_function(&d, &us);
        for (i, &u) in us.iter().enumerate() {
            let closed = Complex64::from_polar(1.0, 2.0 * u) * (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, -2.0 * u)) / 2.0;
            assert!((vp.g[i] - closed).norm() < 1e-14);
            assert!((vp.g[i] - g2[i]).norm() < 1e-14);
            assert!(vp.survival[i] <= 1.0 + 1e-14);
        }
    }

    #[test]
    fn null_quench_persistence_is_one() {
        let (h0, _) = pair();
        let vp = vacuum_persistence(&h0, &h0, &[0.0, 1.0, 7.5]).unwrap();
        assert!(vp.g.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn degenerate_ground_is_rejected() {
        let h0 = HermitianOperator::from_real_diagonal(&[0.0, 0.0, 1.0]).unwrap();
        let hf = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(ground_fidelity(&h0, &hf), Err(Error::DegenerateGround { .. })));
        assert!(matches!(vacuum_persistence(&h0, &hf, &[0.0]), Err(Error::DegenerateGround { .. })));
    }
}
