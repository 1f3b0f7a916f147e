//! Trial rows and CSV emission.
//!
//! CSV columns are fixed, comma-separated, decimal point, no locale; floats
//! carry 12 significant digits so runs can serve as exact regression
//! baselines. `wall_time_ms` is the only nondeterministic column.

use chancert::certify::Decision;

use crate::config::{Access, Family};

pub const CSV_HEADER: &str = "access,family,d,eps,delta,trial_index,seed,decision,channel_queries,code_queries_fwd,code_queries_inv,true_diamond_lb,f_ent,wall_time_ms";

/// 12 significant digits, scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

/// One certification trial.
#[derive(Debug, Clone)]
pub struct TrialReport {
    pub access: Access,
    pub family: Family,
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub trial_index: usize,
    pub seed: u64,
    pub decision: Decision,
    pub channel_queries: u64,
    pub code_queries_fwd: u64,
    pub code_queries_inv: u64,
    /// Certified lower bound on the true diamond distance of the instance.
    pub true_diamond_lb: f64,
    /// Entanglement fidelity of the instance against its target.
    pub f_ent: f64,
    pub wall_time_ms: u64,
}

impl TrialReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.access,
            self.family,
            self.d,
            fmt_f64(self.eps),
            fmt_f64(self.delta),
            self.trial_index,
            self.seed,
            self.decision,
            self.channel_queries,
            self.code_queries_fwd,
            self.code_queries_inv,
            fmt_f64(self.true_diamond_lb),
            fmt_f64(self.f_ent),
            self.wall_time_ms,
        )
    }

    pub fn total_queries(&self) -> u64 {
        self.channel_queries + self.code_queries_fwd + self.code_queries_inv
    }
}

pub fn write_csv<'a, W: std::io::Write>(
    out: &mut W,
    rows: impl IntoIterator<Item = &'a TrialReport>,
) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_twelve_significant_digits() {
        assert_eq!(fmt_f64(0.2), "2.00000000000e-1");
        assert_eq!(fmt_f64(0.0), "0.00000000000e0");
        assert_eq!(fmt_f64(1.0), "1.00000000000e0");
    }

    #[test]
    fn header_matches_row_arity() {
        let row = TrialReport {
            access: Access::Incoherent,
            family: Family::Identity,
            d: 2,
            eps: 0.2,
            delta: 0.1,
            trial_index: 0,
            seed: 42,
            decision: Decision::Accept,
            channel_queries: 10,
            code_queries_fwd: 0,
            code_queries_inv: 0,
            true_diamond_lb: 0.0,
            f_ent: 1.0,
            wall_time_ms: 3,
        };
        assert_eq!(
            CSV_HEADER.split(',').count(),
            row.csv_row().split(',').count()
        );
    }
}
