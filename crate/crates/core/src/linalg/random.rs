//! Haar-distributed unitaries and isometries from Ginibre matrices.

use num_complex::Complex64;
use rand::Rng;

use super::matrix::ComplexMatrix;

/// Standard complex Gaussian entry (variance 1: 1/2 per component).
fn ginibre_entry(rng: &mut impl Rng) -> Complex64 {
    // Box-Muller; two uniforms give one complex normal.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let r = (-u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// Haar-random d x d unitary.
///
/// QR of a complex Ginibre matrix. Modified Gram-Schmidt produces the unique
/// R with positive real diagonal, so Q is already Haar-distributed and no
/// further phase fix on the R diagonal is required.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    haar_isometry(d, d, rng)
}

/// Haar-random isometry with `cols` orthonormal columns of length `rows`
/// (`rows >= cols`): the first `cols` columns of a Haar unitary.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(rows >= cols && cols >= 1, "isometry needs rows >= cols >= 1");
    let mut g = ComplexMatrix::zeros(rows, cols);
    for e in g.entries.iter_mut() {
        *e = ginibre_entry(rng);
    }
    orthonormalize_columns(&mut g);
    g
}

/// Haar-random unit vector in C^n.
pub fn haar_state_vector(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n).map(|_| ginibre_entry(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

/// In-place modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Ginibre inputs are almost surely well conditioned; the second pass keeps
/// the orthogonality defect at roundoff level even for the larger blocks.
pub(crate) fn orthonormalize_columns(m: &mut ComplexMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let col = |m: &ComplexMatrix, j: usize| -> Vec<Complex64> {
        (0..rows).map(|r| m.get(r, j)).collect()
    };
    for j in 0..cols {
        let mut v = col(m, j);
        for _pass in 0..2 {
            for i in 0..j {
                let qi = col(m, i);
                let overlap: Complex64 = qi.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for r in 0..rows {
                    v[r] -= overlap * qi[r];
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm > 1e-12, "rank-deficient column in Gram-Schmidt");
        for r in 0..rows {
            m.set(r, j, v[r] / norm);
        }
    }
}
