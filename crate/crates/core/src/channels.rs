//! Quantum channel algebra on Kraus families.
//!
//! A channel E with Kraus operators {A_k} acts as E(ρ) = Σ_k A_k ρ A_k† and
//! satisfies Σ_k A_k†A_k = I. The unnormalized Choi matrix used throughout is
//! C_E = Σ_{ij} E(|i⟩⟨j|) ⊗ |i⟩⟨j|, which is PSD with trace d, so that the
//! entanglement fidelity against a unitary channel is exactly
//! (1/d²) tr(C_U · C_E).

use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{
    haar_isometry, hermitian_eigen, max_entangled_state, partial_trace, tensor, ComplexMatrix,
    DensityMatrix,
};
use crate::{tol, Error, Result};

/// Eigenvalues below this are dropped when rebuilding Kraus operators from a
/// Choi matrix.
const CHOI_EIGENVALUE_CUTOFF: f64 = 1e-12;

/// Fidelities within this distance of 0 or 1 snap to the boundary.
///
/// The entanglement fidelity is mathematically confined to [0, 1] and equals
/// 1 exactly iff the channels coincide; roundoff in the trace sums is below
/// 1e-13 at the dimensions used here, so snapping keeps the E = U case at
/// probability exactly 1 without masking any resolvable difference.
const FIDELITY_SNAP: f64 = 1e-11;

/// CPTP map on a d-dimensional system, stored as a finite Kraus family.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

/// Unitary channel ρ ↦ UρU†.
#[derive(Debug, Clone)]
pub struct UnitaryChannel {
    u: ComplexMatrix,
}

impl QuantumChannel {
    /// Validated construction from a Kraus family; rejects families that are
    /// not trace preserving within the derived tolerance. Families larger
    /// than d² are compressed.
    pub fn from_kraus(ops: Vec<ComplexMatrix>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidParameter("empty Kraus family".into()));
        }
        let dim = ops[0].rows;
        for op in &ops {
            if !op.is_square() {
                return Err(Error::NotSquare {
                    rows: op.rows,
                    cols: op.cols,
                });
            }
            if op.rows != dim {
                return Err(Error::DimensionMismatch(
                    "Kraus operators have mixed dimensions".into(),
                ));
            }
            if !op.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for op in &ops {
            sum = sum.add_matrix(&op.adjoint().matmul(op));
        }
        let deviation = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if deviation > tol::DERIVED {
            return Err(Error::NotTracePreserving {
                deviation,
                tolerance: tol::DERIVED,
            });
        }
        let ch = Self { dim, kraus: ops };
        if ch.kraus.len() > dim * dim {
            ch.compressed()
        } else {
            Ok(ch)
        }
    }

    /// The identity channel on dimension d.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// E(ρ) = Σ_k A_k ρ A_k†.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "channel dim {} vs state dim {}",
                self.dim,
                rho.dim()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for a in &self.kraus {
            out = out.add_matrix(&a.matmul(rho.matrix()).matmul(&a.adjoint()));
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// (E ⊗ I)(ρ) on a system extended by an ancilla; the ancilla dimension
    /// is inferred from the state.
    pub fn apply_extended(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() % self.dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "state dim {} is not a multiple of channel dim {}",
                rho.dim(),
                self.dim
            )));
        }
        let anc = rho.dim() / self.dim;
        let id = ComplexMatrix::identity(anc);
        let mut out = ComplexMatrix::zeros(rho.dim(), rho.dim());
        for a in &self.kraus {
            let ext = tensor(a, &id);
            out = out.add_matrix(&ext.matmul(rho.matrix()).matmul(&ext.adjoint()));
        }
        Ok(DensityMatrix::from_matrix_unchecked(out))
    }

    /// Unnormalized Choi matrix C_E = Σ_k |v_k⟩⟨v_k| with |v_k⟩ the row-major
    /// flattening of A_k. PSD with trace d.
    pub fn choi(&self) -> ComplexMatrix {
        let n = self.dim * self.dim;
        let mut c = ComplexMatrix::zeros(n, n);
        for a in &self.kraus {
            let v = &a.entries;
            for r in 0..n {
                if v[r].re == 0.0 && v[r].im == 0.0 {
                    continue;
                }
                for s in 0..n {
                    c.entries[r * n + s] += v[r] * v[s].conj();
                }
            }
        }
        c
    }

    /// n-fold composition of the channel with itself, with Kraus compression
    /// applied whenever an intermediate family exceeds d² operators.
    /// Computed by repeated squaring.
    pub fn power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("channel power requires n >= 1".into()));
        }
        let mut result: Option<QuantumChannel> = None;
        let mut base = self.clone();
        let mut remaining = n;
        loop {
            if remaining & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(acc) => compose(&base, &acc)?,
                });
            }
            remaining >>= 1;
            if remaining == 0 {
                break;
            }
            base = compose(&base, &base)?;
        }
        Ok(result.expect("n >= 1"))
    }

    /// Stinespring dilation isometry V = Σ_k A_k ⊗ |k⟩ from C^d to
    /// C^d ⊗ C^K (K = number of Kraus operators), so that
    /// tr_anc(V ρ V†) = E(ρ).
    pub fn stinespring(&self) -> ComplexMatrix {
        let k_count = self.kraus.len();
        let mut v = ComplexMatrix::zeros(self.dim * k_count, self.dim);
        for (k, a) in self.kraus.iter().enumerate() {
            for r in 0..self.dim {
                for c in 0..self.dim {
                    v.entries[(r * k_count + k) * self.dim + c] = a.get(r, c);
                }
            }
        }
        v
    }

    /// Rebuild the Kraus family from the Choi eigendecomposition, keeping
    /// eigenvectors above the cutoff. The represented map is unchanged
    /// within the derived tolerance and the family size drops to at most d².
    fn compressed(&self) -> Result<Self> {
        let d = self.dim;
        let (vals, vecs) = hermitian_eigen(&self.choi())?;
        let n = d * d;
        let mut kraus = Vec::new();
        for (m, &lambda) in vals.iter().enumerate() {
            if lambda <= CHOI_EIGENVALUE_CUTOFF {
                break; // sorted descending
            }
            let scale = lambda.sqrt();
            let mut a = ComplexMatrix::zeros(d, d);
            for idx in 0..n {
                a.entries[idx] = vecs.get(idx, m) * scale;
            }
            kraus.push(a);
        }
        if kraus.is_empty() {
            return Err(Error::InvalidState("Choi matrix has no positive spectrum".into()));
        }
        Ok(Self { dim: d, kraus })
    }
}

impl UnitaryChannel {
    /// Validates unitarity at the structural tolerance.
    pub fn new(u: ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                rows: u.rows,
                cols: u.cols,
            });
        }
        let deviation = u.isometry_deviation();
        if deviation > tol::STRUCTURAL {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: tol::STRUCTURAL,
            });
        }
        Ok(Self { u })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            u: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.u.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.u
    }

    /// The inverse channel, ρ ↦ U†ρU.
    pub fn inverse(&self) -> UnitaryChannel {
        UnitaryChannel {
            u: self.u.adjoint(),
        }
    }

    /// View as a single-Kraus CPTP map.
    pub fn to_channel(&self) -> QuantumChannel {
        QuantumChannel {
            dim: self.dim(),
            kraus: vec![self.u.clone()],
        }
    }
}

/// Validated single-Kraus channel from a unitary matrix.
pub fn unitary_channel(u: ComplexMatrix) -> Result<QuantumChannel> {
    Ok(UnitaryChannel::new(u)?.to_channel())
}

/// Sequential composition f ∘ e (apply `e` first): Kraus family {B_j A_k},
/// compressed back to at most d² operators when the product family is larger.
pub fn compose(f: &QuantumChannel, e: &QuantumChannel) -> Result<QuantumChannel> {
    if f.dim != e.dim {
        return Err(Error::DimensionMismatch(format!(
            "compose: dims {} vs {}",
            f.dim, e.dim
        )));
    }
    let mut kraus = Vec::with_capacity(f.kraus.len() * e.kraus.len());
    for b in &f.kraus {
        for a in &e.kraus {
            kraus.push(b.matmul(a));
        }
    }
    let ch = QuantumChannel { dim: f.dim, kraus };
    if ch.kraus.len() > ch.dim * ch.dim {
        ch.compressed()
    } else {
        Ok(ch)
    }
}

/// Entanglement fidelity F_ent(E, U) between a channel and a unitary channel.
///
/// Computed as (1/d²) Σ_k |tr(U†A_k)|², which coincides with the Choi overlap
/// (1/d²) tr(C_U · C_E) and with ⟨Φ|((U⁻¹∘E)⊗I)(|Φ⟩⟨Φ|)|Φ⟩. The result is
/// clamped to [0, 1] and snapped to the boundary within `FIDELITY_SNAP`.
pub fn entanglement_fidelity(e: &QuantumChannel, u: &UnitaryChannel) -> Result<f64> {
    if e.dim != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity: dims {} vs {}",
            e.dim,
            u.dim()
        )));
    }
    let d = e.dim;
    let mut sum = 0.0;
    for a in &e.kraus {
        // tr(U†A) = Σ_{rc} conj(U[r][c]) A[r][c]
        let mut tr = Complex64::new(0.0, 0.0);
        for (ua, aa) in u.matrix().entries.iter().zip(a.entries.iter()) {
            tr += ua.conj() * aa;
        }
        sum += tr.norm_sqr();
    }
    let mut f = sum / ((d * d) as f64);
    if f > 1.0 - FIDELITY_SNAP {
        f = f.min(1.0);
        if f > 1.0 - FIDELITY_SNAP {
            f = 1.0;
        }
    } else if f < FIDELITY_SNAP {
        f = f.max(0.0);
        if f < FIDELITY_SNAP {
            f = 0.0;
        }
    }
    Ok(f)
}

/// Reflection about |k⟩: O_k = I - 2|k⟩⟨k|.
pub fn grover_reflection(d: usize, k: usize) -> Result<ComplexMatrix> {
    if k >= d {
        return Err(Error::InvalidParameter(format!(
            "marked index {k} out of range for dimension {d}"
        )));
    }
    let mut o = ComplexMatrix::identity(d);
    o.set(k, k, Complex64::new(-1.0, 0.0));
    Ok(o)
}

/// p-faulty Grover channel E_k(ρ) = pρ + (1-p) O_k ρ O_k†, the hard instance
/// family. Kraus family {√p·I, √(1-p)·O_k} (degenerate p ∈ {0, 1} collapse
/// to a single operator). Its diamond distance to the identity is 2(1-p).
pub fn faulty_grover(d: usize, k: usize, p: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability p={p} outside [0,1]")));
    }
    let o = grover_reflection(d, k)?;
    let mut kraus = Vec::new();
    if p > 0.0 {
        kraus.push(ComplexMatrix::identity(d).scale(Complex64::new(p.sqrt(), 0.0)));
    }
    if p < 1.0 {
        kraus.push(o.scale(Complex64::new((1.0 - p).sqrt(), 0.0)));
    }
    Ok(QuantumChannel { dim: d, kraus })
}

/// Channel drawn from a Haar-random Stinespring isometry C^d → C^d ⊗ C^env.
/// `env_dim = 1` reduces to a Haar-random unitary channel.
pub fn random_channel(d: usize, env_dim: usize, rng: &mut impl Rng) -> Result<QuantumChannel> {
    if d < 1 || env_dim < 1 {
        return Err(Error::InvalidParameter("dimensions must be >= 1".into()));
    }
    let iso = haar_isometry(d * env_dim, d, rng);
    let mut kraus = Vec::with_capacity(env_dim);
    for b in 0..env_dim {
        let mut a = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                a.entries[r * d + c] = iso.get(r * env_dim + b, c);
            }
        }
        kraus.push(a);
    }
    Ok(QuantumChannel { dim: d, kraus })
}

/// Unitary dilation ("source code") W on system ⊗ environment with
/// W(|ψ⟩ ⊗ |0⟩_B) realizing the channel: tr_B(W(ρ ⊗ |0⟩⟨0|)W†) = E(ρ).
#[derive(Debug, Clone)]
pub struct SourceCode {
    sys_dim: usize,
    env_dim: usize,
    w: ComplexMatrix,
}

impl SourceCode {
    /// Wrap an explicit dilation unitary; validates unitarity only (the
    /// induced channel is whatever the dilation defines).
    pub fn from_unitary(w: ComplexMatrix, sys_dim: usize, env_dim: usize) -> Result<Self> {
        if w.rows != sys_dim * env_dim || !w.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "dilation must be square of size {}, got {}x{}",
                sys_dim * env_dim,
                w.rows,
                w.cols
            )));
        }
        let deviation = w.isometry_deviation();
        if deviation > tol::STRUCTURAL {
            return Err(Error::NotUnitary {
                deviation,
                tolerance: tol::STRUCTURAL,
            });
        }
        Ok(Self { sys_dim, env_dim, w })
    }

    /// Minimal dilation of a channel: the environment dimension equals the
    /// Kraus count, the isometry columns are fixed by V = Σ_k A_k ⊗ |k⟩, and
    /// the remaining columns are completed deterministically by Gram-Schmidt
    /// over the standard basis vectors in lexicographic order.
    pub fn from_channel(e: &QuantumChannel) -> Result<Self> {
        let d = e.dim();
        let env = e.kraus().len();
        let total = d * env;
        let v = e.stinespring();

        let mut w = ComplexMatrix::zeros(total, total);
        let mut assigned: Vec<Vec<Complex64>> = Vec::with_capacity(total);
        // Isometry columns go to the |env = 0⟩ input sector.
        for j in 0..d {
            let col: Vec<Complex64> = (0..total).map(|r| v.get(r, j)).collect();
            for (r, &z) in col.iter().enumerate() {
                w.entries[r * total + j * env] = z;
            }
            assigned.push(col);
        }

        // Free slots in lexicographic (system, env) order.
        let free_slots: Vec<usize> = (0..d)
            .flat_map(|j| (1..env).map(move |b| j * env + b))
            .collect();
        let mut slot_iter = free_slots.into_iter();
        'candidates: for m in 0..total {
            let Some(slot) = slot_iter.next() else { break };
            // Find the next basis vector independent of everything assigned.
            let mut found = None;
            for cand in m..total {
                let mut vcol = vec![Complex64::new(0.0, 0.0); total];
                vcol[cand] = Complex64::new(1.0, 0.0);
                for _pass in 0..2 {
                    for q in &assigned {
                        let overlap: Complex64 =
                            q.iter().zip(vcol.iter()).map(|(a, b)| a.conj() * b).sum();
                        for r in 0..total {
                            vcol[r] -= overlap * q[r];
                        }
                    }
                }
                let norm = vcol.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1e-8 {
                    for z in vcol.iter_mut() {
                        *z /= norm;
                    }
                    found = Some(vcol);
                    break;
                }
            }
            match found {
                Some(col) => {
                    for (r, &z) in col.iter().enumerate() {
                        w.entries[r * total + slot] = z;
                    }
                    assigned.push(col);
                }
                None => break 'candidates,
            }
        }
        debug_assert_eq!(assigned.len(), total);
        Self::from_unitary(w, d, env)
    }

    pub fn sys_dim(&self) -> usize {
        self.sys_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.w
    }

    /// The channel tr_B(W(ρ ⊗ |0⟩⟨0|)W†): Kraus operators are the blocks
    /// A_b[r][c] = W[(r, b), (c, 0)].
    pub fn induced_channel(&self) -> Result<QuantumChannel> {
        let (d, env, total) = (self.sys_dim, self.env_dim, self.sys_dim * self.env_dim);
        let mut kraus = Vec::with_capacity(env);
        for b in 0..env {
            let mut a = ComplexMatrix::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    a.entries[r * d + c] = self.w.entries[(r * env + b) * total + c * env];
                }
            }
            kraus.push(a);
        }
        QuantumChannel::from_kraus(kraus)
    }

    /// Apply the dilation to ρ ⊗ |0⟩⟨0| and trace out the environment.
    pub fn apply_via_dilation(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.sys_dim {
            return Err(Error::DimensionMismatch(format!(
                "source code sys dim {} vs state dim {}",
                self.sys_dim,
                rho.dim()
            )));
        }
        let mut env0 = ComplexMatrix::zeros(self.env_dim, self.env_dim);
        env0.set(0, 0, Complex64::new(1.0, 0.0));
        let joint = tensor(rho.matrix(), &env0);
        let evolved = self.w.matmul(&joint).matmul(&self.w.adjoint());
        let reduced = partial_trace(&evolved, &[self.sys_dim, self.env_dim], &[0])?;
        Ok(DensityMatrix::from_matrix_unchecked(reduced))
    }
}

/// Source code for the p-faulty Grover channel: the minimal dilation
/// W(|ψ⟩ ⊗ |0⟩) = √p |ψ⟩|0⟩ + √(1-p) O_k|ψ⟩|1⟩ completed to a unitary.
pub fn faulty_grover_source(d: usize, k: usize, p: f64) -> Result<SourceCode> {
    SourceCode::from_channel(&faulty_grover(d, k, p)?)
}

/// Overlap fidelity between the Choi state of `e` and the projector route:
/// test helper for the identity F_ent = ⟨Φ|((U⁻¹∘E)⊗I)(ΦΦ)|Φ⟩.
pub fn fidelity_via_extended_state(e: &QuantumChannel, u: &UnitaryChannel) -> Result<f64> {
    let d = e.dim();
    let f = compose(&u.inverse().to_channel(), e)?;
    let phi = max_entangled_state(d);
    let out = f.apply_extended(&phi.to_density())?;
    Ok(out.expectation(&phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::PureState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_state() -> PureState {
        PureState::normalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    fn minus_state() -> PureState {
        PureState::normalized(vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap()
    }

    #[test]
    fn from_kraus_identity_and_violation() {
        let ok = QuantumChannel::from_kraus(vec![ComplexMatrix::identity(2)]);
        assert!(ok.is_ok());
        let bad = QuantumChannel::from_kraus(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::identity(2),
        ]);
        assert!(matches!(bad, Err(Error::NotTracePreserving { .. })));
    }

    #[test]
    fn from_kraus_accepts_faulty_grover_family() {
        let p: f64 = 0.75;
        let ops = vec![
            ComplexMatrix::identity(2).scale(c(p.sqrt(), 0.0)),
            grover_reflection(2, 0).unwrap().scale(c((1.0 - p).sqrt(), 0.0)),
        ];
        let e = QuantumChannel::from_kraus(ops).unwrap();
        assert_eq!(e.kraus().len(), 2);
    }

    #[test]
    fn unitary_channel_validation_and_reflection() {
        assert!(unitary_channel(ComplexMatrix::identity(3)).is_ok());
        let o0 = grover_reflection(2, 0).unwrap();
        let e = unitary_channel(o0).unwrap();
        assert!((e.kraus()[0].get(0, 0) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((e.kraus()[0].get(1, 1) - c(1.0, 0.0)).norm() < 1e-15);

        let mut not_unitary = ComplexMatrix::identity(2);
        not_unitary.set(0, 0, c(2.0, 0.0));
        assert!(unitary_channel(not_unitary).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u = crate::linalg::haar_unitary(4, &mut rng);
        assert!(unitary_channel(u).is_ok());
    }

    #[test]
    fn apply_identity_fixes_state() {
        let rho = DensityMatrix::maximally_mixed(3);
        let out = QuantumChannel::identity(3).apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn apply_faulty_grover_on_plus_state() {
        // O_0|+⟩ = -|−⟩, so E(|+⟩⟨+|) = (3/4)|+⟩⟨+| + (1/4)|−⟩⟨−|.
        let e = faulty_grover(2, 0, 0.75).unwrap();
        let out = e.apply(&plus_state().to_density()).unwrap();
        let expected = plus_state()
            .projector()
            .scale(c(0.75, 0.0))
            .add_matrix(&minus_state().projector().scale(c(0.25, 0.0)));
        assert!(out.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn apply_preserves_trace_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let e = random_channel(3, 3, &mut rng).unwrap();
            let psi = PureState::new(crate::linalg::haar_state_vector(3, &mut rng)).unwrap();
            let out = e.apply(&psi.to_density()).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
            assert!(out.min_eigenvalue().unwrap() > -1e-9);
        }
    }

    #[test]
    fn apply_extended_identity_fixes_phi() {
        let phi = max_entangled_state(2);
        let out = QuantumChannel::identity(2)
            .apply_extended(&phi.to_density())
            .unwrap();
        assert!(out.matrix().max_abs_diff(&phi.projector()) < 1e-14);
    }

    #[test]
    fn apply_extended_overlap_equals_fidelity() {
        let e = faulty_grover(2, 0, 0.6).unwrap();
        let u = UnitaryChannel::identity(2);
        let phi = max_entangled_state(2);
        let out = e.apply_extended(&phi.to_density()).unwrap();
        let overlap = out.expectation(&phi);
        let fid = entanglement_fidelity(&e, &u).unwrap();
        assert!((overlap - fid).abs() < 1e-12);
    }

    #[test]
    fn apply_extended_output_is_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let e = random_channel(2, 2, &mut rng).unwrap();
        let psi = PureState::new(crate::linalg::haar_state_vector(4, &mut rng)).unwrap();
        let out = e.apply_extended(&psi.to_density()).unwrap();
        assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
        assert!(out.min_eigenvalue().unwrap() > -1e-9);
    }

    #[test]
    fn compose_with_identity_is_identity_on_choi() {
        let e = faulty_grover(2, 1, 0.8).unwrap();
        let composed = compose(&QuantumChannel::identity(2), &e).unwrap();
        assert!(composed.choi().max_abs_diff(&e.choi()) < 1e-10);
    }

    #[test]
    fn compose_inverse_gives_identity_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let u = UnitaryChannel::new(crate::linalg::haar_unitary(3, &mut rng)).unwrap();
        let composed = compose(&u.inverse().to_channel(), &u.to_channel()).unwrap();
        let id = QuantumChannel::identity(3);
        assert!(composed.choi().max_abs_diff(&id.choi()) < 1e-12);
    }

    #[test]
    fn compose_faulty_grover_collapses_binomially() {
        // E_k² = q₂ρ + (1-q₂) O_k ρ O_k with q₂ = (1 + (2p-1)²)/2, via O_k² = I.
        let p = 0.7;
        let e = faulty_grover(2, 0, p).unwrap();
        let squared = compose(&e, &e).unwrap();
        let q2 = (1.0 + (2.0 * p - 1.0).powi(2)) / 2.0;
        let expected = faulty_grover(2, 0, q2).unwrap();
        assert!(squared.choi().max_abs_diff(&expected.choi()) < 1e-12);
    }

    #[test]
    fn power_one_and_identity_powers() {
        let e = faulty_grover(2, 0, 0.9).unwrap();
        assert!(e.power(1).unwrap().choi().max_abs_diff(&e.choi()) < 1e-15);
        let id = QuantumChannel::identity(3);
        assert!(id.power(7).unwrap().choi().max_abs_diff(&id.choi()) < 1e-12);
    }

    #[test]
    fn power_matches_closed_form_mixture() {
        // E_k^n = q_n ρ + (1-q_n) O_k ρ O_k with q_n = (1 + (2p-1)^n)/2.
        let (p, n) = (0.9, 3);
        let e = faulty_grover(2, 0, p).unwrap();
        let powered = e.power(n).unwrap();
        let qn = (1.0 + (2.0 * p - 1.0).powi(n as i32)) / 2.0;
        let expected = faulty_grover(2, 0, qn).unwrap();
        assert!(powered.choi().max_abs_diff(&expected.choi()) < 1e-12);

        // Oracle: repeated explicit composition.
        let mut acc = e.clone();
        for _ in 1..n {
            acc = compose(&e, &acc).unwrap();
        }
        assert!(powered.choi().max_abs_diff(&acc.choi()) < 1e-11);
    }

    #[test]
    fn power_is_additive_in_exponent() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let e = random_channel(2, 2, &mut rng).unwrap();
        let lhs = e.power(5).unwrap().choi();
        let rhs = compose(&e.power(2).unwrap(), &e.power(3).unwrap()).unwrap().choi();
        assert!(lhs.max_abs_diff(&rhs) < 1e-7);
    }

    #[test]
    fn choi_of_identity_is_phi_projector_scaled() {
        let cc = QuantumChannel::identity(2).choi();
        let expected = max_entangled_state(2).projector().scale(c(2.0, 0.0));
        assert!(cc.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn choi_is_psd_with_trace_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for d in 2..=4 {
            let e = random_channel(d, d, &mut rng).unwrap();
            let cc = e.choi();
            assert!((cc.trace().re - d as f64).abs() < 1e-9);
            let (vals, _) = hermitian_eigen(&cc).unwrap();
            assert!(vals.last().copied().unwrap() > -1e-10);
        }
    }

    #[test]
    fn choi_is_linear_in_the_mixture() {
        let (d, k, p) = (3, 1, 0.65);
        let ek = faulty_grover(d, k, p).unwrap();
        let id_choi = QuantumChannel::identity(d).choi();
        let o_chan = unitary_channel(grover_reflection(d, k).unwrap()).unwrap();
        let expected = id_choi
            .scale(c(p, 0.0))
            .add_matrix(&o_chan.choi().scale(c(1.0 - p, 0.0)));
        assert!(ek.choi().max_abs_diff(&expected) < 1e-13);
    }

    #[test]
    fn fidelity_of_unitary_with_itself_is_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let u = UnitaryChannel::new(crate::linalg::haar_unitary(4, &mut rng)).unwrap();
        let f = entanglement_fidelity(&u.to_channel(), &u).unwrap();
        assert_eq!(f, 1.0);
    }

    #[test]
    fn fidelity_faulty_grover_closed_form() {
        // F_ent(E_k, I) = p + (1-p)(d-2)²/d².
        let f = entanglement_fidelity(
            &faulty_grover(2, 0, 0.75).unwrap(),
            &UnitaryChannel::identity(2),
        )
        .unwrap();
        assert!((f - 0.75).abs() < 1e-14);
        let d = 4usize;
        let p = 0.6;
        let f4 = entanglement_fidelity(
            &faulty_grover(d, 2, p).unwrap(),
            &UnitaryChannel::identity(d),
        )
        .unwrap();
        let closed = p + (1.0 - p) * ((d as f64 - 2.0) / d as f64).powi(2);
        assert!((f4 - closed).abs() < 1e-14);
    }

    #[test]
    fn fidelity_three_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for _ in 0..5 {
            let d = 3;
            let e = random_channel(d, d, &mut rng).unwrap();
            let u = UnitaryChannel::new(crate::linalg::haar_unitary(d, &mut rng)).unwrap();

            let via_kraus = entanglement_fidelity(&e, &u).unwrap();

            // Choi overlap route: (1/d²) tr(C_U C_E).
            let overlap = u
                .to_channel()
                .choi()
                .matmul(&e.choi())
                .trace()
                .re
                / ((d * d) as f64);

            // Extended-state projector route.
            let via_state = fidelity_via_extended_state(&e, &u).unwrap();

            assert!((via_kraus - overlap).abs() < 1e-8);
            assert!((via_kraus - via_state).abs() < 1e-8);
            assert!((0.0..=1.0).contains(&via_kraus));
        }
    }

    #[test]
    fn fidelity_one_iff_choi_matches_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let u = UnitaryChannel::new(crate::linalg::haar_unitary(3, &mut rng)).unwrap();

        // Forward: E = U gives fidelity 1 and tiny Choi distance of U⁻¹∘E to I.
        let e = u.to_channel();
        assert_eq!(entanglement_fidelity(&e, &u).unwrap(), 1.0);
        let back = compose(&u.inverse().to_channel(), &e).unwrap();
        let diff = back.choi().sub_matrix(&QuantumChannel::identity(3).choi());
        assert!(crate::linalg::trace_norm(&diff).unwrap() < 1e-7);

        // Converse: a faulty-Grover channel with p < 1 has fidelity < 1 and a
        // Choi distance bounded away from zero.
        let ek = faulty_grover(3, 0, 0.9).unwrap();
        let f = entanglement_fidelity(&ek, &UnitaryChannel::identity(3)).unwrap();
        assert!(f < 1.0);
        let diff_k = ek.choi().sub_matrix(&QuantumChannel::identity(3).choi());
        assert!(crate::linalg::trace_norm(&diff_k).unwrap() >= 1e-7);
    }

    #[test]
    fn stinespring_of_unitary_is_the_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let u = crate::linalg::haar_unitary(3, &mut rng);
        let ch = unitary_channel(u.clone()).unwrap();
        let v = ch.stinespring();
        assert_eq!((v.rows, v.cols), (3, 3));
        assert!(v.max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn stinespring_is_isometry_and_reproduces_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(111);
        let e = random_channel(3, 2, &mut rng).unwrap();
        let v = e.stinespring();
        assert!(v.isometry_deviation() < 1e-8);

        let e2 = faulty_grover(2, 0, 0.6).unwrap();
        let v2 = e2.stinespring();
        let rho = plus_state().to_density();
        let lifted = v2.matmul(rho.matrix()).matmul(&v2.adjoint());
        let reduced = partial_trace(&lifted, &[2, 2], &[0]).unwrap();
        let direct = e2.apply(&rho).unwrap();
        assert!(reduced.max_abs_diff(direct.matrix()) < 1e-12);
    }

    #[test]
    fn faulty_grover_p1_is_identity() {
        let e = faulty_grover(4, 2, 1.0).unwrap();
        assert!(e.choi().max_abs_diff(&QuantumChannel::identity(4).choi()) < 1e-15);
        assert!(faulty_grover(4, 7, 0.5).is_err());
    }

    #[test]
    fn faulty_grover_source_matches_channel_on_basis() {
        let (d, k, p) = (3, 1, 0.7);
        let code = faulty_grover_source(d, k, p).unwrap();
        assert_eq!(code.env_dim(), 2);
        assert!(code.unitary().isometry_deviation() < 1e-10);
        let induced = code.induced_channel().unwrap();
        let direct = faulty_grover(d, k, p).unwrap();
        assert!(induced.choi().max_abs_diff(&direct.choi()) < 1e-10);

        // Dilation route agrees with the Kraus action on a test state.
        let psi = PureState::basis(d, k).unwrap().to_density();
        let via_w = code.apply_via_dilation(&psi).unwrap();
        let via_kraus = direct.apply(&psi).unwrap();
        assert!(via_w.matrix().max_abs_diff(via_kraus.matrix()) < 1e-12);
    }

    #[test]
    fn faulty_grover_source_p1_identity_sector() {
        let code = faulty_grover_source(3, 0, 1.0).unwrap();
        assert_eq!(code.env_dim(), 1);
        assert!(code.unitary().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn faulty_grover_source_unitary_d4() {
        let code = faulty_grover_source(4, 3, 0.8).unwrap();
        assert!(code.unitary().isometry_deviation() < 1e-10);
    }

    #[test]
    fn random_channel_env1_is_unitary_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(121);
        let e = random_channel(4, 1, &mut rng).unwrap();
        assert_eq!(e.kraus().len(), 1);
        assert!(e.kraus()[0].is_unitary(1e-10));
    }

    #[test]
    fn random_channel_cptp_and_fidelity_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(131);
        let e = random_channel(3, 4, &mut rng).unwrap();
        let mut sum = ComplexMatrix::zeros(3, 3);
        for a in e.kraus() {
            sum = sum.add_matrix(&a.adjoint().matmul(a));
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-8);
        let f = entanglement_fidelity(&e, &UnitaryChannel::identity(3)).unwrap();
        assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn compression_preserves_choi() {
        // Cube of a 4-Kraus channel on d=2 forces 64 > d² products.
        let mut rng = ChaCha8Rng::seed_from_u64(141);
        let e = random_channel(2, 4, &mut rng).unwrap();
        let via_powers = e.power(3).unwrap();
        assert!(via_powers.kraus().len() <= 4);
        let mut slow = e.clone();
        for _ in 1..3 {
            // compose() compresses internally; the Choi matrix must survive.
            slow = compose(&e, &slow).unwrap();
        }
        assert!(via_powers.choi().max_abs_diff(&slow.choi()) < 1e-8);
    }
}
