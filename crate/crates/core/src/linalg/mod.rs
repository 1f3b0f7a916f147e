//! Dense complex linear algebra: the self-contained numeric substrate for
//! the channel, distance and certification layers.

mod eig;
mod matrix;
mod random;
mod state;

pub use eig::hermitian_eigen;
pub use matrix::ComplexMatrix;
pub use random::{haar_isometry, haar_state_vector, haar_unitary};
pub use state::{DensityMatrix, PureState};

use num_complex::Complex64;

use crate::{Error, Result};

/// Kronecker product a ⊗ b, with the left factor as the slow (most
/// significant) index: `(a⊗b)[(i*rb + k), (j*cb + l)] = a[i][j] * b[k][l]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.get(i, j);
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.entries[(i * b.rows + k) * cols + (j * b.cols + l)] = aij * b.get(k, l);
                }
            }
        }
    }
    out
}

/// Partial trace of a square matrix on a tensor product of subsystems.
///
/// `dims` are the subsystem dimensions (leftmost = most significant index,
/// matching [`tensor`]); `keep` lists the subsystem indices to retain, and
/// everything else is traced out. The kept subsystems stay in their original
/// order. Trace is preserved: tr(result) = tr(m).
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let total: usize = dims.iter().product();
    if total != m.rows || dims.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dims {dims:?} do not factor a {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&s| s >= dims.len()) {
        return Err(Error::InvalidParameter(format!(
            "keep set {keep:?} out of range for {} subsystems",
            dims.len()
        )));
    }

    let kept_dim: usize = keep.iter().map(|&s| dims[s]).product();
    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);

    // Subsystem strides in the flattened index.
    let n_sub = dims.len();
    let mut stride = vec![1usize; n_sub];
    for s in (0..n_sub.saturating_sub(1)).rev() {
        stride[s] = stride[s + 1] * dims[s + 1];
    }
    let decode = |mut idx: usize| -> Vec<usize> {
        let mut parts = vec![0usize; n_sub];
        for s in 0..n_sub {
            parts[s] = idx / stride[s];
            idx %= stride[s];
        }
        parts
    };
    let kept_index = |parts: &[usize]| -> usize {
        let mut idx = 0;
        for &s in &keep {
            idx = idx * dims[s] + parts[s];
        }
        idx
    };

    for row in 0..total {
        let rp = decode(row);
        for col in 0..total {
            let cp = decode(col);
            // Off-diagonal in any traced subsystem contributes nothing.
            if (0..n_sub).any(|s| !keep.contains(&s) && rp[s] != cp[s]) {
                continue;
            }
            let (kr, kc) = (kept_index(&rp), kept_index(&cp));
            out.entries[kr * kept_dim + kc] += m.get(row, col);
        }
    }
    Ok(out)
}

/// Trace norm: the sum of singular values.
///
/// Hermitian inputs (the common case here: differences of density or Choi
/// matrices) use their eigenvalues directly; anything else goes through the
/// Hermitian eigendecomposition of m†m.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if m.is_hermitian(crate::tol::STRUCTURAL) {
        let (vals, _) = hermitian_eigen(m)?;
        Ok(vals.iter().map(|l| l.abs()).sum())
    } else {
        let gram = m.adjoint().matmul(m);
        let (vals, _) = hermitian_eigen(&gram)?;
        Ok(vals.iter().map(|l| l.max(0.0).sqrt()).sum())
    }
}

/// Maximally entangled state (1/√d) Σ_i |i⟩|i⟩ on dimension d².
pub fn max_entangled_state(d: usize) -> PureState {
    assert!(d >= 1);
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = amp;
    }
    PureState::new(v).expect("maximally entangled state is normalized by construction")
}
