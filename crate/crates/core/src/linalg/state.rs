use num_complex::Complex64;

use super::eig::hermitian_eigen;
use super::matrix::ComplexMatrix;
use crate::{tol, Error, Result};

/// Normalized pure state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Validates 2-norm 1 within the structural tolerance.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol::STRUCTURAL {
            return Err(Error::InvalidState(format!(
                "pure state norm {norm} is not 1 within {:.1e}",
                tol::STRUCTURAL
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes the given vector (must be nonzero).
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-12) {
            return Err(Error::InvalidState("cannot normalize a (near-)zero vector".into()));
        }
        for z in amplitudes.iter_mut() {
            *z /= norm;
        }
        Self::new(amplitudes)
    }

    /// Computational basis state |index⟩.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |self⟩ ⊗ |other⟩.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                out.push(a * b);
            }
        }
        PureState { amplitudes: out }
    }

    /// Rank-one projector |self⟩⟨self|.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m.entries[r * n + c] = self.amplitudes[r] * self.amplitudes[c].conj();
            }
        }
        m
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
        }
    }
}

/// Density matrix: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Full validation: hermiticity and trace at the structural tolerance,
    /// eigenvalues >= -1e-9.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows,
                cols: matrix.cols,
            });
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        if !matrix.is_hermitian(tol::STRUCTURAL) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol::STRUCTURAL || tr.im.abs() > tol::STRUCTURAL {
            return Err(Error::InvalidState(format!("density matrix trace {tr} is not 1")));
        }
        let (vals, _) = hermitian_eigen(&matrix)?;
        if let Some(&min) = vals.last() {
            if min < -1e-9 {
                return Err(Error::InvalidState(format!(
                    "density matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { matrix })
    }

    /// Skips the eigenvalue check; for outputs of operations that preserve
    /// positivity by construction (Kraus sums, partial traces of PSD inputs).
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_hermitian(1e-8));
        debug_assert!((matrix.trace().re - 1.0).abs() < 1e-8);
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Smallest eigenvalue; handy for PSD assertions in tests.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (vals, _) = hermitian_eigen(&self.matrix)?;
        Ok(vals.last().copied().unwrap_or(0.0))
    }

    /// ⟨ψ|ρ|ψ⟩ as a real number.
    pub fn expectation(&self, psi: &PureState) -> f64 {
        assert_eq!(self.dim(), psi.dim());
        let v = self.matrix.matvec(psi.amplitudes());
        psi.amplitudes()
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}
