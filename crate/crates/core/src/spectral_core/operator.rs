use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const HERMITICITY_TOL: f64 = 1e-12;

/// Dense Hermitian matrix together with its ascending eigendecomposition.
///
/// Eigenvectors are stored as columns with a fixed phase: the
/// largest-magnitude component of each column is real and positive.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    entries: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

/// Decompose a Hermitian matrix.
///
/// The input must equal its conjugate transpose to within `1e-12` of its
/// largest entry; it is symmetrized before the solver runs.
pub fn eigendecompose(matrix: CMatrix) -> Result<HermitianOperator> {
    if !matrix.is_square() {
        return Err(Error::invalid(format!(
            "matrix must be square, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    let dim = matrix.nrows();
    if dim == 0 {
        return Err(Error::invalid("matrix must have positive dimension"));
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let scale = matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let deviation = hermiticity_deviation(&matrix);
    let tolerance = HERMITICITY_TOL * scale.max(f64::MIN_POSITIVE);
    if deviation > tolerance {
        return Err(Error::NonHermitian {
            deviation,
            tolerance,
        });
    }
    let entries = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);

    let eig = entries
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100_000)
        .ok_or(Error::DecompositionFailure { dim })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMatrix::zeros(dim, dim);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let norm = v.norm();
        v /= Complex64::new(norm, 0.0);
        let phase = dominant_phase(v.as_slice());
        v *= phase.conj();
        eigenvectors.set_column(col, &v);
    }

    Ok(HermitianOperator {
        entries,
        eigenvalues,
        eigenvectors,
    })
}

/// Unit-modulus phase of the first component whose magnitude is maximal.
fn dominant_phase(v: &[Complex64]) -> Complex64 {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let threshold = max * (1.0 - 1e-9);
    let lead = v
        .iter()
        .find(|z| z.norm() >= threshold)
        .copied()
        .unwrap_or(Complex64::new(1.0, 0.0));
    if lead.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        lead / lead.norm()
    }
}

pub(crate) fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Max |U†U - 1| entry.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    let n = prod.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

impl HermitianOperator {
    pub fn from_real_diagonal(diagonal: &[f64]) -> Result<Self> {
        let n = diagonal.len();
        let m = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diagonal[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        eigendecompose(m)
    }

    /// Real symmetric input given row by row.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("rows must form a square matrix"));
        }
        eigendecompose(CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j], 0.0)
        }))
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are eigenvectors, ordered like [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> Vec<Complex64> {
        self.eigenvectors.column(0).iter().copied().collect()
    }

    /// `ε_1 - ε_0`, or `+inf` for a one-dimensional space.
    pub fn gap(&self) -> f64 {
        if self.dim() < 2 {
            f64::INFINITY
        } else {
            self.eigenvalues[1] - self.eigenvalues[0]
        }
    }

    pub fn spectral_span(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply_function<F: Fn(f64) -> Complex64>(&self, f: F) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, &e) in self.eigenvalues.iter().enumerate() {
            let fe = f(e);
            for i in 0..n {
                scaled[(i, j)] *= fe;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `Σ_n c_n |ε_n⟩⟨ε_n|` for real coefficients aligned with the eigenvalues.
    pub fn spectral_matrix(&self, coefficients: &[f64]) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, c) in coefficients.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= Complex64::new(*c, 0.0);
            }
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `e^{i t H}`.
    pub fn exp_i(&self, t: f64) -> CMatrix {
        self.apply_function(|e| Complex64::from_polar(1.0, e * t))
    }

    /// Largest entry of `V Λ V† - H`, relative to the largest entry of `H`.
    pub fn reconstruction_error(&self) -> f64 {
        let rebuilt = self.apply_function(|e| Complex64::new(e, 0.0));
        let scale = self
            .entries
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        (&rebuilt - &self.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_deviation(&self.eigenvectors)
    }
}

/// Linear family `H(λ) = base + λ·coupling`.
#[derive(Debug, Clone)]
pub struct HamiltonianFamily {
    base: CMatrix,
    coupling: CMatrix,
}

impl HamiltonianFamily {
    pub fn new(base: CMatrix, coupling: CMatrix) -> Result<Self> {
        if base.shape() != coupling.shape() || !base.is_square() {
            return Err(Error::invalid(format!(
                "base {:?} and coupling {:?} must be square with equal dimension",
                base.shape(),
                coupling.shape()
            )));
        }
        for m in [&base, &coupling] {
            let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let deviation = hermiticity_deviation(m);
            let tolerance = HERMITICITY_TOL * scale.max(f64::MIN_POSITIVE);
            if deviation > tolerance {
                return Err(Error::NonHermitian {
                    deviation,
                    tolerance,
                });
            }
        }
        Ok(Self { base, coupling })
    }

    /// Recover `(A, B)` from samples `H(λ_i)`; every sample beyond the first
    /// two must lie on the line through them.
    pub fn from_samples(samples: &[(f64, CMatrix)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("need at least two (lambda, H) samples"));
        }
        let (l0, h0) = &samples[0];
        let (l1, h1) = &samples[1];
        if l0 == l1 {
            return Err(Error::invalid("first two samples share a lambda value"));
        }
        if h0.shape() != h1.shape() {
            return Err(Error::invalid("sample dimensions differ"));
        }
        let coupling = (h1 - h0) / Complex64::new(l1 - l0, 0.0);
        let base = h0 - &coupling * Complex64::new(*l0, 0.0);
        let scale = samples
            .iter()
            .flat_map(|(_, h)| h.iter().map(|z| z.norm()))
            .fold(1.0, f64::max);
        for (l, h) in &samples[2..] {
            if h.shape() != h0.shape() {
                return Err(Error::invalid("sample dimensions differ"));
            }
            let predicted = &base + &coupling * Complex64::new(*l, 0.0);
            let dev = (&predicted - h).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if dev > 1e-10 * scale {
                return Err(Error::NonlinearFamily);
            }
        }
        Self::new(base, coupling)
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    pub fn base(&self) -> &CMatrix {
        &self.base
    }

    pub fn coupling(&self) -> &CMatrix {
        &self.coupling
    }

    pub fn matrix_at(&self, lambda: f64) -> CMatrix {
        &self.base + &self.coupling * Complex64::new(lambda, 0.0)
    }

    pub fn at(&self, lambda: f64) -> Result<HermitianOperator> {
        eigendecompose(self.matrix_at(lambda))
    }
}

/// JSON interchange form `{"dim": n, "re": [[...]], "im": [[...]]}`.
/// `im` may be omitted for real matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        let check = |rows: &Vec<Vec<f64>>, part: &str| -> Result<()> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::invalid(format!(
                    "matrix field '{part}' must be {n}x{n}"
                )));
            }
            Ok(())
        };
        check(&self.re, "re")?;
        if let Some(im) = &self.im {
            check(im, "im")?;
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(self.re[i][j], im)
        }))
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        let has_im = im.iter().flatten().any(|v| *v != 0.0);
        Self {
            dim: n,
            re,
            im: has_im.then_some(im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_matrix_is_already_decomposed() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, -1.0]).unwrap();
        assert_eq!(h.eigenvalues(), &[-1.0, 1.0]);
        assert_eq!(h.eigenvectors()[(1, 0)], c(1.0));
        assert_eq!(h.eigenvectors()[(0, 1)], c(1.0));
        assert_eq!(h.eigenvectors()[(0, 0)], c(0.0));
    }

    #[test]
    fn sigma_x_hand_diagonalization() {
        let h = HermitianOperator::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((h.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((h.eigenvalues()[1] - 1.0).abs() < 1e-14);
        // Phase convention: first maximal component real positive.
        let v0 = h.eigenvectors().column(0);
        assert!((v0[0] - c(s)).norm() < 1e-14);
        assert!((v0[1] - c(-s)).norm() < 1e-14);
        let v1 = h.eigenvectors().column(1);
        assert!((v1[0] - c(s)).norm() < 1e-14);
        assert!((v1[1] - c(s)).norm() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_hermitian(6, 1.0, &mut rng);
        let h = eigendecompose(m).unwrap();
        assert!(h.reconstruction_error() < 1e-10);
        assert!(h.unitarity_error() < 1e-10);
        assert!(h.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn decomposition_is_bit_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_hermitian(5, 1.0, &mut rng);
        let a = eigendecompose(m.clone()).unwrap();
        let b = eigendecompose(m).unwrap();
        assert_eq!(a.eigenvalues(), b.eigenvalues());
        assert_eq!(a.eigenvectors(), b.eigenvectors());
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.5), c(0.0)]);
        assert!(matches!(eigendecompose(m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn family_from_samples_detects_curvature() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let at = |l: f64| &a + &b * c(l);
        let fam = HamiltonianFamily::from_samples(&[(0.0, at(0.0)), (1.0, at(1.0)), (2.5, at(2.5))])
            .unwrap();
        assert!((fam.coupling() - &b).norm() < 1e-14);
        let bent = &at(2.0) + &b * c(0.1);
        assert!(matches!(
            HamiltonianFamily::from_samples(&[(0.0, at(0.0)), (1.0, at(1.0)), (2.0, bent)]),
            Err(Error::NonlinearFamily)
        ));
    }

    #[test]
    fn matrix_json_roundtrip() {
        let json = r#"{"dim": 2, "re": [[0, 1], [1, 0]], "im": [[0, -0.5], [0.5, 0]]}"#;
        let parsed: MatrixJson = serde_json::from_str(json).unwrap();
        let m = parsed.to_matrix().unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(1.0, -0.5));
        assert_eq!(MatrixJson::from_matrix(&m), parsed);
        let bad = r#"{"dim": 2, "re": [[0, 1]]}"#;
        let parsed: MatrixJson = serde_json::from_str(bad).unwrap();
        assert!(parsed.to_matrix().is_err());
    }
}
