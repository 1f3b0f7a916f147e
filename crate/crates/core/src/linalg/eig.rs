//! Hermitian eigendecomposition via cyclic complex Jacobi rotations.
//!
//! This is the only matrix decomposition the crate needs: trace norms of
//! Hermitian differences, Choi PSD checks, and Kraus compression all reduce
//! to it. Matrices here are at most a few hundred square, where Jacobi is
//! plenty fast and very accurate.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues sorted in
/// descending order and eigenvectors as the corresponding columns, so that
/// `m == V diag(λ) V†` and `V†V == I`. The input is symmetrized as
/// `(m + m†)/2` before iterating, which absorbs roundoff-level hermiticity
/// drift from upstream products.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }

    // Symmetrized working copy.
    let mut a = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            a.entries[r * n + c] = (m.get(r, c) + m.get(c, r).conj()) * 0.5;
        }
    }
    let mut v = ComplexMatrix::identity(n);

    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    // Stop when the off-diagonal mass is at roundoff level.
    let off_target = (1e-14 * scale) * (1e-14 * scale);

    for sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).norm_sqr();
            }
        }
        if off <= off_target {
            break;
        }

        // Rotation threshold schedule: skip small elements in the first
        // sweeps, and in late sweeps hard-zero elements that can no longer
        // affect the diagonal at double precision.
        let threshold = if sweep < 3 {
            0.2 * off / ((n * n) as f64)
        } else {
            0.0
        };
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let mag = apq.norm();
                if sweep >= 4
                    && 100.0 * mag <= f64::EPSILON * (a.get(p, p).re.abs() + a.get(q, q).re.abs())
                {
                    a.set(p, q, Complex64::new(0.0, 0.0));
                    a.set(q, p, Complex64::new(0.0, 0.0));
                    continue;
                }
                if mag * mag > threshold {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors.entries[r * n + new_col] = v.get(r, old_col);
        }
    }
    Ok((eigenvalues, vectors))
}

/// One complex Jacobi rotation zeroing the (p, q) entry.
///
/// For the 2x2 Hermitian block [[α, β], [β̄, γ]] with β = |β|·e^{iφ}, the
/// rotation R = [[c, -s·e^{iφ}], [s·e^{-iφ}, c]] with tan chosen from
/// τ = (α-γ)/(2|β|) makes (R† A R)[p][q] = 0.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.rows;
    let apq = a.get(p, q);
    let beta_abs = apq.norm();
    if beta_abs < 1e-300 {
        a.set(p, q, Complex64::new(0.0, 0.0));
        a.set(q, p, Complex64::new(0.0, 0.0));
        return;
    }
    let phase = apq / beta_abs;
    let alpha = a.get(p, p).re;
    let gamma = a.get(q, q).re;
    let tau = (alpha - gamma) / (2.0 * beta_abs);
    let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
    let t = sign / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let s_ph = phase * s; // s·e^{iφ}
    let s_ph_conj = phase.conj() * s; // s·e^{-iφ}

    // A <- R† A R: column update (A·R) then row update (R†·A).
    for i in 0..n {
        let aip = a.entries[i * n + p];
        let aiq = a.entries[i * n + q];
        a.entries[i * n + p] = aip * c + aiq * s_ph_conj;
        a.entries[i * n + q] = aiq * c - aip * s_ph;
    }
    for j in 0..n {
        let apj = a.entries[p * n + j];
        let aqj = a.entries[q * n + j];
        a.entries[p * n + j] = apj * c + aqj * s_ph;
        a.entries[q * n + j] = aqj * c - apj * s_ph_conj;
    }
    // Clean the pair we just zeroed; keep the diagonal exactly real.
    a.entries[p * n + q] = Complex64::new(0.0, 0.0);
    a.entries[q * n + p] = Complex64::new(0.0, 0.0);
    a.entries[p * n + p] = Complex64::new(a.entries[p * n + p].re, 0.0);
    a.entries[q * n + q] = Complex64::new(a.entries[q * n + q].re, 0.0);

    // V <- V R.
    for i in 0..n {
        let vip = v.entries[i * n + p];
        let viq = v.entries[i * n + q];
        v.entries[i * n + p] = vip * c + viq * s_ph_conj;
        v.entries[i * n + q] = viq * c - vip * s_ph;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::haar_unitary;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let mut g = ComplexMatrix::zeros(n, n);
        for e in g.entries.iter_mut() {
            *e = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let gt = g.adjoint();
        g.add_matrix(&gt).scale(Complex64::new(0.5, 0.0))
    }

    #[test]
    fn reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[1usize, 2, 3, 5, 9, 16] {
            let h = random_hermitian(n, &mut rng);
            let (vals, vecs) = hermitian_eigen(&h).unwrap();
            let lambda =
                ComplexMatrix::diagonal(&vals.iter().map(|&l| Complex64::new(l, 0.0)).collect::<Vec<_>>());
            let rebuilt = vecs.matmul(&lambda).matmul(&vecs.adjoint());
            assert!(rebuilt.max_abs_diff(&h) < 1e-11, "n={n}");
            assert!(vecs.isometry_deviation() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn diagonal_matrix_eigenvalues_sorted() {
        let d = ComplexMatrix::diagonal(&[
            Complex64::new(-1.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.5, 0.0),
        ]);
        let (vals, _) = hermitian_eigen(&d).unwrap();
        assert_eq!(vals.len(), 3);
        assert!((vals[0] - 3.0).abs() < 1e-14);
        assert!((vals[1] - 0.5).abs() < 1e-14);
        assert!((vals[2] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn unitary_conjugation_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(6, &mut rng);
        let u = haar_unitary(6, &mut rng);
        let hu = u.matmul(&h).matmul(&u.adjoint());
        let (a, _) = hermitian_eigen(&h).unwrap();
        let (b, _) = hermitian_eigen(&hu).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn rejects_non_square() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(hermitian_eigen(&m).is_err());
    }
}
