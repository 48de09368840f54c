//! Seeded random test matrices.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::operator::CMatrix;

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// GUE-like Hermitian matrix `scale·(X + X†)/2` with complex Gaussian `X`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> CMatrix {
    let x = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    (&x + x.adjoint()) * Complex64::new(0.5 * scale, 0.0)
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phases of
/// `diag(R)` divided out.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let x = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = x.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::operator::unitarity_deviation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in 1..=6 {
            let u = random_unitary(dim, &mut rng);
            assert!(unitarity_deviation(&u) < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_matrix() {
        let a = random_hermitian(4, 1.0, &mut ChaCha8Rng::seed_from_u64(5));
        let b = random_hermitian(4, 1.0, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }
}
