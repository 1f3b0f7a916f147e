//! The four experiment drivers behind the CLI subcommands.
//!
//! Trials execute in parallel on a worker pool, but every trial derives its
//! own RNG stream from (master_seed, cell, trial), so outputs are identical
//! regardless of worker count or completion order. Rows are emitted in
//! (cell, trial) order.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use chancert::certify::{coh_cert, incoh_cert, sourcecode_cert, sqrt_ampl_est, Decision};
use chancert::channels::{
    entanglement_fidelity, faulty_grover, random_channel, unitary_channel, QuantumChannel,
    SourceCode, UnitaryChannel,
};
use chancert::distances::{
    choi_state_lower_bound, diamond_lower_bound, faulty_grover_diamond_exact,
    faulty_grover_witness, fidelity_diamond_check, power_amplification_check, CheckOutcome,
    DiamondEstimate,
};
use chancert::linalg::haar_unitary;

use crate::config::{Access, ExperimentConfig, Family};
use crate::report::{fmt_f64, write_csv, TrialReport};
use crate::seed::{derive_seed, STREAM_FAMILY};

/// A fully instantiated test case for one grid cell.
struct Instance {
    target: UnitaryChannel,
    channel: QuantumChannel,
    code: Option<SourceCode>,
    diamond_lb: f64,
    f_ent: f64,
}

fn build_instance(config: &ExperimentConfig, d: usize, cell: u64) -> Result<Instance> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, cell, STREAM_FAMILY));
    let (target, channel, diamond_lb) = match config.family {
        Family::Identity => {
            let u = UnitaryChannel::new(haar_unitary(d, &mut rng))?;
            let e = u.to_channel();
            (u, e, 0.0)
        }
        Family::FaultyGrover => {
            if config.k >= d {
                bail!("marked index k={} out of range for d={d}", config.k);
            }
            let e = faulty_grover(d, config.k, config.p)?;
            // Exact for every p: the witness attains 2(1-p) and convexity
            // matches it from above.
            (UnitaryChannel::identity(d), e, 2.0 * (1.0 - config.p))
        }
        Family::RandomChannel => {
            let u = UnitaryChannel::new(haar_unitary(d, &mut rng))?;
            let env = config.env_dim.unwrap_or(d);
            let e = random_channel(d, env, &mut rng)?;
            let lb = choi_state_lower_bound(&e, &u.to_channel())?.lower_bound();
            (u, e, lb)
        }
        Family::RandomUnitary => {
            let u = UnitaryChannel::new(haar_unitary(d, &mut rng))?;
            let e = unitary_channel(haar_unitary(d, &mut rng))?;
            let lb = choi_state_lower_bound(&e, &u.to_channel())?.lower_bound();
            (u, e, lb)
        }
    };
    let code = match config.access {
        Access::SourceCode => Some(SourceCode::from_channel(&channel)?),
        _ => None,
    };
    let f_ent = entanglement_fidelity(&channel, &target)?;
    Ok(Instance {
        target,
        channel,
        code,
        diamond_lb,
        f_ent,
    })
}

fn run_trial(
    config: &ExperimentConfig,
    instance: &Instance,
    d: usize,
    eps: f64,
    cell: usize,
    trial: usize,
) -> Result<TrialReport> {
    let seed = derive_seed(config.master_seed, cell as u64, trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let verdict = match config.access {
        Access::Incoherent => {
            incoh_cert(eps, config.delta, &instance.channel, &instance.target, &mut rng)?
        }
        Access::Coherent => {
            coh_cert(eps, config.delta, &instance.channel, &instance.target, &mut rng)?
        }
        Access::SourceCode => {
            let code = instance.code.as_ref().expect("source code built for this access model");
            sourcecode_cert(eps, config.delta, code, &instance.target, &mut rng)?
        }
    };
    Ok(TrialReport {
        access: config.access,
        family: config.family,
        d,
        eps,
        delta: config.delta,
        trial_index: trial,
        seed,
        decision: verdict.decision,
        channel_queries: verdict.ledger.channel_queries,
        code_queries_fwd: verdict.ledger.forward_code_queries,
        code_queries_inv: verdict.ledger.inverse_code_queries,
        true_diamond_lb: instance.diamond_lb,
        f_ent: instance.f_ent,
        wall_time_ms: start.elapsed().as_millis() as u64,
    })
}

/// Per-cell aggregate of the trial rows.
#[derive(Debug, Clone)]
pub struct CellSummary {
    pub cell_index: usize,
    pub d: usize,
    pub eps: f64,
    pub trials: usize,
    pub accepts: usize,
    pub accept_rate: f64,
    /// Normal-approximation 95% half-width of the accept rate.
    pub ci95: f64,
    pub mean_queries: f64,
}

impl CellSummary {
    fn from_rows(cell_index: usize, d: usize, eps: f64, rows: &[TrialReport]) -> Self {
        let trials = rows.len();
        let accepts = rows.iter().filter(|r| r.decision == Decision::Accept).count();
        let rate = accepts as f64 / trials as f64;
        let ci95 = 1.96 * (rate * (1.0 - rate) / trials as f64).sqrt();
        let mean_queries =
            rows.iter().map(|r| r.total_queries() as f64).sum::<f64>() / trials as f64;
        Self {
            cell_index,
            d,
            eps,
            trials,
            accepts,
            accept_rate: rate,
            ci95,
            mean_queries,
        }
    }

    pub fn summary_line(&self, config: &ExperimentConfig) -> String {
        format!(
            "cell={} access={} family={} d={} eps={} delta={}: trials={} accepts={} accept_rate={:.6} ci95=±{:.6} mean_queries={:.1}",
            self.cell_index,
            config.access,
            config.family,
            self.d,
            self.eps,
            config.delta,
            self.trials,
            self.accepts,
            self.accept_rate,
            self.ci95,
            self.mean_queries,
        )
    }
}

#[derive(Debug)]
pub struct CertifyOutput {
    pub rows: Vec<TrialReport>,
    pub cells: Vec<CellSummary>,
}

impl CertifyOutput {
    /// Mean of the decision column across all rows.
    pub fn accept_rate(&self) -> f64 {
        let accepts = self.rows.iter().filter(|r| r.decision == Decision::Accept).count();
        accepts as f64 / self.rows.len() as f64
    }
}

/// Monte Carlo certification trials over the (d, eps) grid.
pub fn run_certify(config: &ExperimentConfig) -> Result<CertifyOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .context("building worker pool")?;
    let mut rows = Vec::with_capacity(config.d.len() * config.eps.len() * config.trials);
    let mut cells = Vec::new();
    let mut cell_index = 0usize;
    for &d in &config.d {
        for &eps in &config.eps {
            let instance = build_instance(config, d, cell_index as u64)?;
            let cell_rows: Result<Vec<TrialReport>> = pool.install(|| {
                (0..config.trials)
                    .into_par_iter()
                    .map(|t| run_trial(config, &instance, d, eps, cell_index, t))
                    .collect()
            });
            let cell_rows = cell_rows?;
            cells.push(CellSummary::from_rows(cell_index, d, eps, &cell_rows));
            rows.extend(cell_rows);
            cell_index += 1;
        }
    }
    Ok(CertifyOutput { rows, cells })
}

/// Least-squares exponents of mean queries against d and eps.
#[derive(Debug, Clone, Copy)]
pub struct FitSummary {
    /// Slope of ln(queries) vs ln(d); `None` when d does not vary.
    pub d_exponent: Option<f64>,
    /// Slope of ln(queries) vs ln(eps); `None` when eps does not vary.
    pub eps_exponent: Option<f64>,
}

impl FitSummary {
    pub fn summary_line(&self) -> String {
        let fmt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.4}"),
            None => "n/a".to_string(),
        };
        format!(
            "fit: d_exponent={} eps_exponent={}",
            fmt(self.d_exponent),
            fmt(self.eps_exponent)
        )
    }
}

fn fit_exponents(cells: &[CellSummary]) -> FitSummary {
    let pts: Vec<(f64, f64, f64)> = cells
        .iter()
        .map(|c| ((c.d as f64).ln(), c.eps.ln(), c.mean_queries.ln()))
        .collect();
    let n = pts.len() as f64;
    let mean = |f: &dyn Fn(&(f64, f64, f64)) -> f64| pts.iter().map(f).sum::<f64>() / n;
    let (m1, m2, my) = (mean(&|p| p.0), mean(&|p| p.1), mean(&|p| p.2));
    let (mut s11, mut s22, mut s12, mut s1y, mut s2y) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x1, x2, y) in &pts {
        let (a, b, c) = (x1 - m1, x2 - m2, y - my);
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
        s1y += a * c;
        s2y += b * c;
    }
    const VAR_FLOOR: f64 = 1e-12;
    match (s11 > VAR_FLOOR, s22 > VAR_FLOOR) {
        (false, false) => FitSummary {
            d_exponent: None,
            eps_exponent: None,
        },
        (true, false) => FitSummary {
            d_exponent: Some(s1y / s11),
            eps_exponent: None,
        },
        (false, true) => FitSummary {
            d_exponent: None,
            eps_exponent: Some(s2y / s22),
        },
        (true, true) => {
            let det = s11 * s22 - s12 * s12;
            if det.abs() < 1e-12 * s11 * s22 {
                // Collinear grid; marginal slopes are the best we can report.
                FitSummary {
                    d_exponent: Some(s1y / s11),
                    eps_exponent: Some(s2y / s22),
                }
            } else {
                FitSummary {
                    d_exponent: Some((s22 * s1y - s12 * s2y) / det),
                    eps_exponent: Some((s11 * s2y - s12 * s1y) / det),
                }
            }
        }
    }
}

#[derive(Debug)]
pub struct SweepOutput {
    pub certify: CertifyOutput,
    pub fit: FitSummary,
}

/// Grid sweep plus scaling-exponent fit.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    let certify = run_certify(config)?;
    let fit = fit_exponents(&certify.cells);
    Ok(SweepOutput { certify, fit })
}

pub const LEMMA_CSV_HEADER: &str = "suite,instance,d,lhs,rhs,outcome";

#[derive(Debug, Clone)]
pub struct LemmaRow {
    pub suite: &'static str,
    pub instance: String,
    pub d: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub outcome: &'static str,
}

impl LemmaRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.suite,
            self.instance,
            self.d,
            fmt_f64(self.lhs),
            fmt_f64(self.rhs),
            self.outcome
        )
    }
}

#[derive(Debug)]
pub struct LemmaOutput {
    pub rows: Vec<LemmaRow>,
    pub fidelity_checked: usize,
    pub fidelity_violations: usize,
    pub amp_checked: usize,
    pub amp_violations: usize,
    pub amp_inconclusive: usize,
}

impl LemmaOutput {
    pub fn violations(&self) -> usize {
        self.fidelity_violations + self.amp_violations
    }

    pub fn summary_lines(&self) -> Vec<String> {
        vec![
            format!(
                "fidelity-diamond: {} instances, {} violations",
                self.fidelity_checked, self.fidelity_violations
            ),
            format!(
                "power-amplification: {} checks, {} violations, {} inconclusive",
                self.amp_checked, self.amp_violations, self.amp_inconclusive
            ),
            format!("total violations: {}", self.violations()),
        ]
    }
}

/// Number of faulty-Grover instances appended to the fidelity suite.
const FAULTY_FIDELITY_INSTANCES: usize = 50;
/// Cell-index bases keeping the suites on disjoint RNG streams.
const CELL_BASE_FAULTY: u64 = 1 << 20;
const CELL_BASE_PHASE: u64 = 1 << 21;

/// Verify both channel inequalities numerically.
///
/// Suite 1 checks √F_ent(E,U) ≤ 1 − D²/(8d) on `trials` random channels
/// (diamond lower bounds from the witness search) plus a faulty-Grover grid
/// with exact distances. Suite 2 checks ‖E^n − I‖⋄ > nε/2 on the analytic
/// faulty-Grover grid for every legal n, and on phase channels through the
/// witness search.
pub fn run_verify_lemmas(config: &ExperimentConfig) -> Result<LemmaOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .context("building worker pool")?;
    let mut rows = Vec::new();
    let mut fidelity_violations = 0usize;

    // Random-channel fidelity suite, parallel over instances.
    let random_rows: Result<Vec<(LemmaRow, bool)>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| -> Result<(LemmaRow, bool)> {
                let d = config.d[i % config.d.len()];
                let env = config.env_dim.unwrap_or(d);
                let mut inst_rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    config.master_seed,
                    i as u64,
                    STREAM_FAMILY,
                ));
                let u = UnitaryChannel::new(haar_unitary(d, &mut inst_rng))?;
                let e = random_channel(d, env, &mut inst_rng)?;
                let mut search_rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, i as u64, 0));
                let dlb =
                    diamond_lower_bound(&e, &u.to_channel(), config.restarts, &mut search_rng)?;
                let rep = fidelity_diamond_check(&e, &u, &dlb)?;
                Ok((
                    LemmaRow {
                        suite: "fidelity-diamond",
                        instance: format!("random-channel-{i}"),
                        d,
                        lhs: rep.lhs,
                        rhs: rep.rhs,
                        outcome: if rep.holds { "holds" } else { "violated" },
                    },
                    rep.holds,
                ))
            })
            .collect()
    });
    for (row, holds) in random_rows? {
        if !holds {
            fidelity_violations += 1;
        }
        rows.push(row);
    }

    // Faulty-Grover fidelity suite with exact diamond distances.
    for i in 0..FAULTY_FIDELITY_INSTANCES {
        let mut d = config.d[i % config.d.len()];
        if d < 2 {
            d = 2;
        }
        let frac = i as f64 / (FAULTY_FIDELITY_INSTANCES - 1) as f64;
        let p = 0.55 + 0.44 * frac;
        let k = i % d;
        let e = faulty_grover(d, k, p)?;
        let u = UnitaryChannel::identity(d);
        let exact = faulty_grover_diamond_exact(p, 1)?;
        let dlb = DiamondEstimate::analytic(exact, Some(faulty_grover_witness(d, k)?))?;
        let rep = fidelity_diamond_check(&e, &u, &dlb)?;
        if !rep.holds {
            fidelity_violations += 1;
        }
        rows.push(LemmaRow {
            suite: "fidelity-diamond",
            instance: format!("faulty-grover-p{p:.4}-k{k}"),
            d,
            lhs: rep.lhs,
            rhs: rep.rhs,
            outcome: if rep.holds { "holds" } else { "violated" },
        });
    }
    let fidelity_checked = rows.len();

    // Power-amplification suite: analytic faulty-Grover grid, all legal n.
    let mut amp_checked = 0usize;
    let mut amp_violations = 0usize;
    let mut amp_inconclusive = 0usize;
    let d_amp = config.d.first().copied().unwrap_or(2).max(2);
    for (gi, &p) in [0.99f64, 0.95, 0.9, 0.8].iter().enumerate() {
        let eps = 2.0 * (1.0 - p);
        let n_max = (1.0 / (2.0 * eps) + 1e-9).floor() as usize;
        let e = faulty_grover(d_amp, 0, p)?;
        for n in 1..=n_max {
            let exact = faulty_grover_diamond_exact(p, n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.master_seed,
                CELL_BASE_FAULTY + gi as u64,
                n as u64,
            ));
            let rep = power_amplification_check(&e, n, eps, Some(exact), config.restarts, &mut rng)?;
            amp_checked += 1;
            let outcome = match rep.outcome {
                CheckOutcome::Holds => "holds",
                CheckOutcome::Violated => {
                    amp_violations += 1;
                    "violated"
                }
                CheckOutcome::Inconclusive => {
                    amp_inconclusive += 1;
                    "inconclusive"
                }
            };
            rows.push(LemmaRow {
                suite: "power-amplification",
                instance: format!("faulty-grover-p{p}-n{n}"),
                d: d_amp,
                lhs: rep.lhs_lb,
                rhs: rep.rhs,
                outcome,
            });
        }
    }

    // Phase-channel spot checks via the witness search: eps = 2|sin(θ/2)|.
    for (ti, &theta) in [0.2f64, 0.35].iter().enumerate() {
        let eps = 2.0 * (theta / 2.0).sin();
        let u = chancert::linalg::ComplexMatrix::diagonal(&[
            chancert::Complex64::new(1.0, 0.0),
            chancert::Complex64::from_polar(1.0, theta),
        ]);
        let e = unitary_channel(u)?;
        let n_max = ((1.0 / (2.0 * eps) + 1e-9).floor() as usize).min(3);
        for n in 1..=n_max {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.master_seed,
                CELL_BASE_PHASE + ti as u64,
                n as u64,
            ));
            let rep = power_amplification_check(&e, n, eps, None, config.restarts, &mut rng)?;
            amp_checked += 1;
            let outcome = match rep.outcome {
                CheckOutcome::Holds => "holds",
                CheckOutcome::Violated => {
                    amp_violations += 1;
                    "violated"
                }
                CheckOutcome::Inconclusive => {
                    amp_inconclusive += 1;
                    "inconclusive"
                }
            };
            rows.push(LemmaRow {
                suite: "power-amplification",
                instance: format!("phase-theta{theta}-n{n}"),
                d: 2,
                lhs: rep.lhs_lb,
                rhs: rep.rhs,
                outcome,
            });
        }
    }

    Ok(LemmaOutput {
        rows,
        fidelity_checked,
        fidelity_violations,
        amp_checked,
        amp_violations,
        amp_inconclusive,
    })
}

pub const AE_CSV_HEADER: &str =
    "a_true,trial_index,seed,sqrt_a_true,estimate,abs_error,code_queries_fwd,code_queries_inv";

#[derive(Debug, Clone)]
pub struct AeRow {
    pub a_true: f64,
    pub trial_index: usize,
    pub seed: u64,
    pub sqrt_a_true: f64,
    pub estimate: f64,
    pub abs_error: f64,
    pub code_queries_fwd: u64,
    pub code_queries_inv: u64,
}

impl AeRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            fmt_f64(self.a_true),
            self.trial_index,
            self.seed,
            fmt_f64(self.sqrt_a_true),
            fmt_f64(self.estimate),
            fmt_f64(self.abs_error),
            self.code_queries_fwd,
            self.code_queries_inv
        )
    }
}

/// Per-grid-point error profile.
#[derive(Debug, Clone)]
pub struct AePoint {
    pub a_true: f64,
    pub trials: usize,
    /// Fraction of runs with |estimate − √a| ≤ ε'.
    pub success_rate: f64,
    pub p50_error: f64,
    pub p95_error: f64,
    pub max_error: f64,
}

#[derive(Debug)]
pub struct AeDemoOutput {
    pub eps_prime: f64,
    pub rows: Vec<AeRow>,
    pub points: Vec<AePoint>,
}

impl AeDemoOutput {
    pub fn summary_lines(&self) -> Vec<String> {
        self.points
            .iter()
            .map(|pt| {
                format!(
                    "a_true={:.2}: trials={} success_rate={:.4} p50_err={:.3e} p95_err={:.3e} max_err={:.3e}",
                    pt.a_true, pt.trials, pt.success_rate, pt.p50_error, pt.p95_error, pt.max_error
                )
            })
            .collect()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((sorted.len() as f64) * q).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Sweep the amplitude grid and profile the estimator error against ε'.
pub fn run_ae_demo(config: &ExperimentConfig) -> Result<AeDemoOutput> {
    let eps_prime = config.eps[0];
    if !(eps_prime > 0.0 && eps_prime < 1.0) {
        bail!("ae-demo needs eps (the AE precision) in (0, 1), got {eps_prime}");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .context("building worker pool")?;

    let mut rows = Vec::with_capacity(config.a_grid.len() * config.trials);
    let mut points = Vec::with_capacity(config.a_grid.len());
    for (pi, &a_true) in config.a_grid.iter().enumerate() {
        let target = a_true.sqrt();
        let point_rows: Result<Vec<AeRow>> = pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(|t| -> Result<AeRow> {
                    let seed = derive_seed(config.master_seed, pi as u64, t as u64);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let (estimate, ledger) =
                        sqrt_ampl_est(eps_prime, config.delta, a_true, &mut rng)?;
                    Ok(AeRow {
                        a_true,
                        trial_index: t,
                        seed,
                        sqrt_a_true: target,
                        estimate,
                        abs_error: (estimate - target).abs(),
                        code_queries_fwd: ledger.forward_code_queries,
                        code_queries_inv: ledger.inverse_code_queries,
                    })
                })
                .collect()
        });
        let point_rows = point_rows?;
        let mut errors: Vec<f64> = point_rows.iter().map(|r| r.abs_error).collect();
        errors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let successes = errors.iter().filter(|&&e| e <= eps_prime).count();
        points.push(AePoint {
            a_true,
            trials: point_rows.len(),
            success_rate: successes as f64 / point_rows.len() as f64,
            p50_error: quantile(&errors, 0.50),
            p95_error: quantile(&errors, 0.95),
            max_error: *errors.last().unwrap(),
        });
        rows.extend(point_rows);
    }
    Ok(AeDemoOutput {
        eps_prime,
        rows,
        points,
    })
}

/// Write a CSV body (any row type with a `csv_row` representation).
pub fn write_rows<W: Write>(
    out: &mut W,
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> std::io::Result<()> {
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// Write trial rows to `config.out` (or stdout) and return the summary text.
pub fn emit_certify(config: &ExperimentConfig, output: &CertifyOutput) -> Result<Vec<String>> {
    match &config.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .with_context(|| format!("cannot write output path {}", path.display()))?;
            write_csv(&mut file, &output.rows)?;
        }
        None => {
            let stdout = std::io::stdout();
            write_csv(&mut stdout.lock(), &output.rows)?;
        }
    }
    let mut lines: Vec<String> = output
        .cells
        .iter()
        .map(|c| c.summary_line(config))
        .collect();
    lines.push(format!(
        "total rows={} overall_accept_rate={:.6}",
        output.rows.len(),
        output.accept_rate()
    ));
    Ok(lines)
}

pub fn emit_lemmas(config: &ExperimentConfig, output: &LemmaOutput) -> Result<Vec<String>> {
    if let Some(path) = &config.out {
        let mut file = std::fs::File::create(path)
            .with_context(|| format!("cannot write output path {}", path.display()))?;
        write_rows(
            &mut file,
            LEMMA_CSV_HEADER,
            output.rows.iter().map(|r| r.csv_row()),
        )?;
    }
    Ok(output.summary_lines())
}

pub fn emit_ae_demo(config: &ExperimentConfig, output: &AeDemoOutput) -> Result<Vec<String>> {
    match &config.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .with_context(|| format!("cannot write output path {}", path.display()))?;
            write_rows(
                &mut file,
                AE_CSV_HEADER,
                output.rows.iter().map(|r| r.csv_row()),
            )?;
        }
        None => {
            let stdout = std::io::stdout();
            write_rows(
                &mut stdout.lock(),
                AE_CSV_HEADER,
                output.rows.iter().map(|r| r.csv_row()),
            )?;
        }
    }
    Ok(output.summary_lines())
}
