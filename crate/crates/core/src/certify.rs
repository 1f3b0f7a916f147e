//! The three certification testers with exact query accounting.
//!
//! All three decide between E = U and ‖E − U‖⋄ ≥ ε with failure probability
//! at most δ:
//!
//! - [`incoh_cert`] — incoherent access. Each round prepares the maximally
//!   entangled state, applies (U⁻¹∘E) ⊗ I and measures the projector onto
//!   |Φ⟩; the outcome is Bernoulli with success probability exactly
//!   F_ent(E, U), so rounds are sampled from that probability directly
//!   instead of materializing d²×d² states. Accepts iff all n outcomes are 0
//!   with n = ⌈8d ln(1/δ)/ε²⌉.
//! - [`coh_cert`] — coherent access. Dyadic bootstrapping: runs the
//!   incoherent tester at constant precision 1/8 on channel powers
//!   (U⁻¹∘E)^{2^j} with failure budgets δ_j = δ·2^{j−T−1}. Each inner round
//!   on the 2^j-th power costs 2^j channel queries.
//! - [`sourcecode_cert`] — source-code access. Estimates
//!   √(1 − F_ent(E, U)) by amplitude estimation against the dilation
//!   unitary and thresholds at ε/(4√d). The estimation is simulated through
//!   the exact phase-estimation outcome law, which depends only on the true
//!   amplitude.

use rand::Rng;

use crate::channels::{compose, entanglement_fidelity, QuantumChannel, SourceCode, UnitaryChannel};
use crate::{Error, Result};

/// Exact counts of oracle uses by kind. Additive across stages.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryLedger {
    /// Uses of the unknown channel E (one per application of any power of it,
    /// counted with the power's multiplicity).
    pub channel_queries: u64,
    /// Uses of controlled-W.
    pub forward_code_queries: u64,
    /// Uses of controlled-W†.
    pub inverse_code_queries: u64,
}

impl QueryLedger {
    pub fn total(&self) -> u64 {
        self.channel_queries + self.forward_code_queries + self.inverse_code_queries
    }
}

impl std::ops::Add for QueryLedger {
    type Output = QueryLedger;
    fn add(self, other: QueryLedger) -> QueryLedger {
        QueryLedger {
            channel_queries: self.channel_queries + other.channel_queries,
            forward_code_queries: self.forward_code_queries + other.forward_code_queries,
            inverse_code_queries: self.inverse_code_queries + other.inverse_code_queries,
        }
    }
}

impl std::ops::AddAssign for QueryLedger {
    fn add_assign(&mut self, other: QueryLedger) {
        *self = *self + other;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Decision::Accept => write!(f, "accept"),
            Decision::Reject => write!(f, "reject"),
        }
    }
}

/// One stage of the coherent tester.
#[derive(Debug, Clone)]
pub struct CohStage {
    pub j: u32,
    /// Channel power 2^j used by this stage.
    pub power: u64,
    /// Failure budget δ_j of the inner call.
    pub fail_prob: f64,
    /// Rounds n_j the inner call performed.
    pub rounds: u64,
    /// How many inner outcomes were 1.
    pub ones: u64,
    pub decision: Decision,
}

/// Per-algorithm trace of what the tester observed.
#[derive(Debug, Clone)]
pub enum VerdictDetail {
    /// Round outcomes x_i of the incoherent tester.
    Incoherent { outcomes: Vec<bool> },
    /// Sub-verdicts b_j of the coherent tester, in execution order.
    Coherent { stages: Vec<CohStage> },
    /// Amplitude estimate and the accept threshold ε/(4√d).
    SourceCode { estimate: f64, threshold: f64 },
}

/// Accept/reject decision with exact query accounting and a per-stage trace.
#[derive(Debug, Clone)]
pub struct CertVerdict {
    pub decision: Decision,
    pub ledger: QueryLedger,
    pub detail: VerdictDetail,
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "eps {eps} outside (0, 2] (channel pairs satisfy diamond distance <= 2)"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1)")));
    }
    Ok(())
}

/// Sample one POVM outcome: 0 with probability exactly `fidelity`.
/// Degenerate probabilities skip the draw so the outcome law is exact.
fn sample_round(fidelity: f64, rng: &mut impl Rng) -> bool {
    if fidelity >= 1.0 {
        false
    } else if fidelity <= 0.0 {
        true
    } else {
        rng.gen::<f64>() >= fidelity
    }
}

/// One incoherent round: apply (U⁻¹∘E) ⊗ I to |Φ⟩ and measure
/// {|Φ⟩⟨Φ|, I − |Φ⟩⟨Φ|}. Returns the outcome bit (0 on the projector).
pub fn incoh_round(e: &QuantumChannel, u: &UnitaryChannel, rng: &mut impl Rng) -> Result<u8> {
    let fidelity = entanglement_fidelity(e, u)?;
    Ok(sample_round(fidelity, rng) as u8)
}

/// Number of rounds the incoherent tester uses.
pub fn incoh_round_count(d: usize, eps: f64, delta: f64) -> u64 {
    (8.0 * d as f64 * (1.0 / delta).ln() / (eps * eps)).ceil() as u64
}

/// Incoherent certification: n = ⌈8d ln(1/δ)/ε²⌉ rounds, accept iff every
/// outcome is 0. One-sided: when E = U the acceptance probability is 1.
/// The ledger always records exactly n channel queries.
pub fn incoh_cert(
    eps: f64,
    delta: f64,
    e: &QuantumChannel,
    u: &UnitaryChannel,
    rng: &mut impl Rng,
) -> Result<CertVerdict> {
    check_eps_delta(eps, delta)?;
    if e.dim() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "incoh_cert: channel dim {} vs unitary dim {}",
            e.dim(),
            u.dim()
        )));
    }
    let n = incoh_round_count(e.dim(), eps, delta);
    let fidelity = entanglement_fidelity(e, u)?;

    let mut outcomes = Vec::with_capacity(n as usize);
    let mut any_one = false;
    for _ in 0..n {
        let x = sample_round(fidelity, rng);
        any_one |= x;
        outcomes.push(x);
    }
    Ok(CertVerdict {
        decision: if any_one { Decision::Reject } else { Decision::Accept },
        ledger: QueryLedger {
            channel_queries: n,
            ..Default::default()
        },
        detail: VerdictDetail::Incoherent { outcomes },
    })
}

/// Row of the coherent tester's dyadic schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohRow {
    pub j: u32,
    /// p_j = 2^j.
    pub p_j: u64,
    /// δ_j = δ·2^{j−T−1}.
    pub delta_j: f64,
}

/// Dyadic amplification schedule: T = ⌈log₂(1/ε)⌉ + 1 and one row per
/// j = 0..=T. The failure budgets form a geometric series with
/// Σ_j δ_j = δ(1 − 2^{−T−1}) < δ.
#[derive(Debug, Clone, PartialEq)]
pub struct CohSchedule {
    pub t: u32,
    pub rows: Vec<CohRow>,
}

/// Build the schedule. Logs are base 2, matching the dyadic bracketing in
/// the soundness analysis; ε = 1 gives T = 1.
pub fn coh_schedule(eps: f64, delta: f64) -> Result<CohSchedule> {
    check_eps_delta(eps, delta)?;
    let t = (1.0 / eps).log2().ceil().max(0.0) as u32 + 1;
    let rows = (0..=t)
        .map(|j| CohRow {
            j,
            p_j: 1u64 << j,
            // Exact: scaling by a power of two.
            delta_j: delta * (2f64).powi(j as i32 - t as i32 - 1),
        })
        .collect();
    Ok(CohSchedule { t, rows })
}

/// Inner precision of every incoherent call made by the coherent tester.
pub const COH_INNER_EPS: f64 = 0.125;

/// Coherent certification by stepwise amplification.
///
/// For j = 0..=T runs IncohCert(1/8, δ_j, (U⁻¹∘E)^{2^j}, I), rejecting at
/// the first inner reject. Each inner round consumes 2^j channel queries,
/// so the ledger records Σ over executed stages of 2^j · n_j.
pub fn coh_cert(
    eps: f64,
    delta: f64,
    e: &QuantumChannel,
    u: &UnitaryChannel,
    rng: &mut impl Rng,
) -> Result<CertVerdict> {
    check_eps_delta(eps, delta)?;
    if e.dim() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "coh_cert: channel dim {} vs unitary dim {}",
            e.dim(),
            u.dim()
        )));
    }
    let schedule = coh_schedule(eps, delta)?;
    let base = compose(&u.inverse().to_channel(), e)?;
    let identity_target = UnitaryChannel::identity(e.dim());

    let mut ledger = QueryLedger::default();
    let mut stages = Vec::with_capacity(schedule.rows.len());
    // Running power: doubles once per stage, so stage j holds (U⁻¹∘E)^{2^j}.
    let mut powered = base;
    for row in &schedule.rows {
        if row.j > 0 {
            powered = compose(&powered, &powered)?;
        }
        let inner = incoh_cert(COH_INNER_EPS, row.delta_j, &powered, &identity_target, rng)?;
        let rounds = inner.ledger.channel_queries;
        ledger.channel_queries += row.p_j * rounds;
        let ones = match &inner.detail {
            VerdictDetail::Incoherent { outcomes } => outcomes.iter().filter(|&&x| x).count() as u64,
            _ => unreachable!("inner tester is incoherent"),
        };
        stages.push(CohStage {
            j: row.j,
            power: row.p_j,
            fail_prob: row.delta_j,
            rounds,
            ones,
            decision: inner.decision,
        });
        if inner.decision == Decision::Reject {
            return Ok(CertVerdict {
                decision: Decision::Reject,
                ledger,
                detail: VerdictDetail::Coherent { stages },
            });
        }
    }
    Ok(CertVerdict {
        decision: Decision::Accept,
        ledger,
        detail: VerdictDetail::Coherent { stages },
    })
}

/// Realization parameters for the simulated amplitude estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AeConfig {
    /// Number of phase-estimation grid points M.
    pub grid_size: usize,
    /// Median repetitions R (odd).
    pub repetitions: usize,
    /// Oracle cost convention: one Grover iteration = 1 controlled-W plus
    /// 1 controlled-W†.
    pub queries_per_iteration: u64,
}

impl AeConfig {
    /// M = ⌈π/ε'⌉ + 1 makes the per-sample grid error π/M at most ε';
    /// R = 2⌈6 ln(1/δ)⌉ + 1 drives the median failure probability below δ
    /// (per-sample success ≥ 8/π² by the phase-estimation guarantee).
    pub fn new(eps_prime: f64, delta: f64) -> Result<Self> {
        if !(eps_prime > 0.0 && eps_prime < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_prime {eps_prime} outside (0, 1)"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta {delta} outside (0, 1)")));
        }
        let grid_size = (std::f64::consts::PI / eps_prime).ceil() as usize + 1;
        let repetitions = 2 * (6.0 * (1.0 / delta).ln()).ceil() as usize + 1;
        Ok(Self {
            grid_size,
            repetitions,
            queries_per_iteration: 2,
        })
    }

    /// Explicit parameters (tests, demos). `repetitions` must be odd.
    pub fn explicit(grid_size: usize, repetitions: usize) -> Result<Self> {
        if grid_size < 2 {
            return Err(Error::InvalidParameter("grid_size must be >= 2".into()));
        }
        if repetitions == 0 || repetitions % 2 == 0 {
            return Err(Error::InvalidParameter("repetitions must be odd".into()));
        }
        Ok(Self {
            grid_size,
            repetitions,
            queries_per_iteration: 2,
        })
    }

    /// Queries consumed by one run: (M−1) Grover iterations per repetition,
    /// each costing one W and one W†. Returned as (forward, inverse).
    pub fn query_cost(&self) -> (u64, u64) {
        let per_kind = (self.grid_size as u64 - 1) * self.repetitions as u64;
        (per_kind, per_kind)
    }
}

/// Squared Dirichlet kernel |S_M(Δ)|² = sin²(MπΔ)/(M² sin²(πΔ)), the
/// probability weight of one phase-estimation branch. Periodic in Δ with
/// period 1; the removable singularity at integer Δ evaluates to 1.
fn phase_kernel(delta: f64, m: usize) -> f64 {
    let r = delta - delta.round();
    if r.abs() < 1e-15 {
        return 1.0;
    }
    let mf = m as f64;
    let num = (mf * std::f64::consts::PI * r).sin();
    let den = mf * (std::f64::consts::PI * r).sin();
    (num / den).powi(2)
}

/// Exact outcome law of M-point phase estimation applied to the Grover
/// rotation with angle 2πθ, θ ∈ [0, 1/2].
///
/// The initial state splits evenly over the two rotation eigenvectors with
/// eigenphases ±θ; the branches are orthogonal, so
/// Pr[y] = ½|S_M(θ − y/M)|² + ½|S_M(−θ − y/M)|². Sums to 1.
pub fn qpe_outcome_distribution(theta: f64, m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::InvalidParameter("phase grid needs M >= 2".into()));
    }
    if !(0.0..=0.5 + 1e-12).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "theta {theta} outside [0, 1/2]"
        )));
    }
    let mut probs = Vec::with_capacity(m);
    for y in 0..m {
        let frac = y as f64 / m as f64;
        let p = 0.5 * phase_kernel(theta - frac, m) + 0.5 * phase_kernel(-theta - frac, m);
        probs.push(p);
    }
    debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    Ok(probs)
}

fn sample_from(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Simulated SqrtAmplEst: estimates √a_true within `eps_prime` with
/// probability ≥ 1 − δ.
///
/// Realized as M-point phase estimation on the Grover rotation with
/// θ = arcsin(√a_true)/π: each repetition draws an outcome y from the exact
/// law, maps it to sin(π·min(y, M−y)/M), and the median over R repetitions
/// is returned together with the (M−1)·R forward and inverse query counts.
pub fn sqrt_ampl_est(
    eps_prime: f64,
    delta: f64,
    a_true: f64,
    rng: &mut impl Rng,
) -> Result<(f64, QueryLedger)> {
    let config = AeConfig::new(eps_prime, delta)?;
    sqrt_ampl_est_with(&config, a_true, rng)
}

/// [`sqrt_ampl_est`] with explicit grid/repetition parameters.
pub fn sqrt_ampl_est_with(
    config: &AeConfig,
    a_true: f64,
    rng: &mut impl Rng,
) -> Result<(f64, QueryLedger)> {
    if !(0.0..=1.0).contains(&a_true) {
        return Err(Error::InvalidParameter(format!("amplitude {a_true} outside [0, 1]")));
    }
    let m = config.grid_size;
    let theta = a_true.sqrt().asin() / std::f64::consts::PI;
    let probs = qpe_outcome_distribution(theta, m)?;

    let mut estimates = Vec::with_capacity(config.repetitions);
    for _ in 0..config.repetitions {
        let y = sample_from(&probs, rng);
        let folded = y.min(m - y);
        estimates.push((std::f64::consts::PI * folded as f64 / m as f64).sin());
    }
    estimates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = estimates[estimates.len() / 2];

    let (fwd, inv) = config.query_cost();
    Ok((
        median,
        QueryLedger {
            channel_queries: 0,
            forward_code_queries: fwd,
            inverse_code_queries: inv,
        },
    ))
}

/// Source-code certification.
///
/// The dilation circuit V built from U_Φ, U† and W satisfies
/// |⟨0|V|0⟩|² = F_ent(E, U), so the amplitude a = 1 − F_ent(E, U) is
/// computed from the induced channel and fed to the simulated amplitude
/// estimation at precision ε/(16√d); accept iff the estimate of √a is
/// below ε/(4√d).
pub fn sourcecode_cert(
    eps: f64,
    delta: f64,
    code: &SourceCode,
    u: &UnitaryChannel,
    rng: &mut impl Rng,
) -> Result<CertVerdict> {
    check_eps_delta(eps, delta)?;
    if code.sys_dim() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "sourcecode_cert: code system dim {} vs unitary dim {}",
            code.sys_dim(),
            u.dim()
        )));
    }
    let d = u.dim() as f64;
    let induced = code.induced_channel()?;
    let a_true = (1.0 - entanglement_fidelity(&induced, u)?).clamp(0.0, 1.0);

    let eps_prime = eps / (16.0 * d.sqrt());
    let threshold = eps / (4.0 * d.sqrt());
    let (estimate, ledger) = sqrt_ampl_est(eps_prime, delta, a_true, rng)?;

    Ok(CertVerdict {
        decision: if estimate < threshold {
            Decision::Accept
        } else {
            Decision::Reject
        },
        ledger,
        detail: VerdictDetail::SourceCode { estimate, threshold },
    })
}
