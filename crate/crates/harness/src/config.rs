//! Experiment configuration: defaults, flat key=value config files, and
//! command-line overrides (a flag always wins over the file).

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Certify,
    Sweep,
    VerifyLemmas,
    AeDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Identity,
    FaultyGrover,
    RandomChannel,
    RandomUnitary,
}

impl FromStr for Family {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Family::Identity),
            "faulty-grover" => Ok(Family::FaultyGrover),
            "random-channel" => Ok(Family::RandomChannel),
            "random-unitary" => Ok(Family::RandomUnitary),
            other => bail!(
                "unknown family {other:?} (expected identity, faulty-grover, random-channel or random-unitary)"
            ),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Identity => "identity",
            Family::FaultyGrover => "faulty-grover",
            Family::RandomChannel => "random-channel",
            Family::RandomUnitary => "random-unitary",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Incoherent,
    Coherent,
    SourceCode,
}

impl FromStr for Access {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "incoherent" => Ok(Access::Incoherent),
            "coherent" => Ok(Access::Coherent),
            "source-code" => Ok(Access::SourceCode),
            other => bail!("unknown access model {other:?} (expected incoherent, coherent or source-code)"),
        }
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Access::Incoherent => "incoherent",
            Access::Coherent => "coherent",
            Access::SourceCode => "source-code",
        };
        write!(f, "{s}")
    }
}

/// Partial settings from one source (config file or command line).
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub family: Option<String>,
    pub access: Option<String>,
    pub d: Option<String>,
    pub eps: Option<String>,
    pub delta: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub p: Option<f64>,
    pub k: Option<usize>,
    pub env_dim: Option<usize>,
    pub out: Option<PathBuf>,
    pub restarts: Option<usize>,
    pub a_grid: Option<String>,
}

impl ConfigOverrides {
    /// Parse a flat key = value file ('#' starts a comment). Unknown keys are
    /// rejected so typos surface as configuration errors.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut o = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {} is not key = value: {raw:?}", lineno + 1);
            };
            let (key, value) = (key.trim(), value.trim().to_string());
            match key {
                "family" => o.family = Some(value),
                "access" => o.access = Some(value),
                "d" => o.d = Some(value),
                "eps" => o.eps = Some(value),
                "delta" => o.delta = Some(value.parse().context("bad delta")?),
                "trials" => o.trials = Some(value.parse().context("bad trials")?),
                "seed" => o.seed = Some(value.parse().context("bad seed")?),
                "workers" => o.workers = Some(value.parse().context("bad workers")?),
                "p" => o.p = Some(value.parse().context("bad p")?),
                "k" => o.k = Some(value.parse().context("bad k")?),
                "env_dim" => o.env_dim = Some(value.parse().context("bad env_dim")?),
                "out" => o.out = Some(PathBuf::from(value)),
                "restarts" => o.restarts = Some(value.parse().context("bad restarts")?),
                "a_grid" => o.a_grid = Some(value),
                other => bail!("unknown config key {other:?} on line {}", lineno + 1),
            }
        }
        Ok(o)
    }

    fn merge_from(&mut self, stronger: &ConfigOverrides) {
        macro_rules! take {
            ($field:ident) => {
                if stronger.$field.is_some() {
                    self.$field = stronger.$field.clone();
                }
            };
        }
        take!(family);
        take!(access);
        take!(d);
        take!(eps);
        take!(delta);
        take!(trials);
        take!(seed);
        take!(workers);
        take!(p);
        take!(k);
        take!(env_dim);
        take!(out);
        take!(restarts);
        take!(a_grid);
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub family: Family,
    pub access: Access,
    pub d: Vec<usize>,
    pub eps: Vec<f64>,
    pub delta: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub workers: usize,
    /// Faulty-Grover survival probability.
    pub p: f64,
    /// Faulty-Grover marked index.
    pub k: usize,
    /// Environment dimension for the random-channel family (default: d).
    pub env_dim: Option<usize>,
    pub out: Option<PathBuf>,
    /// Random restarts of the diamond-norm witness search.
    pub restarts: usize,
    /// Amplitude grid for the AE demo.
    pub a_grid: Vec<f64>,
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|e| anyhow::anyhow!("bad {what} entry {tok:?}: {e}"))
        })
        .collect()
}

impl ExperimentConfig {
    /// Defaults, then config file, then flags.
    pub fn resolve(
        command: Command,
        file: Option<ConfigOverrides>,
        flags: ConfigOverrides,
    ) -> Result<Self> {
        let mut merged = file.unwrap_or_default();
        merged.merge_from(&flags);

        // Per-command defaults where the generic ones would be unhelpful.
        let default_d = match command {
            Command::VerifyLemmas => vec![2, 3, 4],
            _ => vec![2],
        };
        let default_trials = match command {
            Command::VerifyLemmas => 200,
            Command::AeDemo => 2000,
            _ => 100,
        };
        let (default_eps, default_delta) = match command {
            Command::AeDemo => (vec![0.02], 0.05),
            _ => (vec![0.2], 0.1),
        };

        let config = Self {
            command,
            family: merged
                .family
                .as_deref()
                .map(Family::from_str)
                .transpose()?
                .unwrap_or(Family::Identity),
            access: merged
                .access
                .as_deref()
                .map(Access::from_str)
                .transpose()?
                .unwrap_or(Access::Incoherent),
            d: merged
                .d
                .as_deref()
                .map(|s| parse_list::<usize>(s, "d"))
                .transpose()?
                .unwrap_or(default_d),
            eps: merged
                .eps
                .as_deref()
                .map(|s| parse_list::<f64>(s, "eps"))
                .transpose()?
                .unwrap_or(default_eps),
            delta: merged.delta.unwrap_or(default_delta),
            trials: merged.trials.unwrap_or(default_trials),
            master_seed: merged.seed.unwrap_or(1),
            workers: merged.workers.unwrap_or_else(|| {
                std::thread::available_parallelism().map(usize::from).unwrap_or(1)
            }),
            p: merged.p.unwrap_or(0.9),
            k: merged.k.unwrap_or(0),
            env_dim: merged.env_dim,
            out: merged.out,
            restarts: merged.restarts.unwrap_or(32),
            a_grid: merged
                .a_grid
                .as_deref()
                .map(|s| parse_list::<f64>(s, "a_grid"))
                .transpose()?
                .unwrap_or_else(|| (0..=10).map(|i| i as f64 / 10.0).collect()),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            bail!("trials must be >= 1");
        }
        if self.d.is_empty() || self.d.iter().any(|&d| d < 1) {
            bail!("d list must be non-empty with entries >= 1");
        }
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e <= 2.0)) {
            bail!("eps list must be non-empty with entries in (0, 2]");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bail!("delta must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.p) {
            bail!("p must lie in [0, 1]");
        }
        if self.workers < 1 {
            bail!("workers must be >= 1");
        }
        if self.restarts < 1 {
            bail!("restarts must be >= 1");
        }
        if self.a_grid.is_empty() || self.a_grid.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
            bail!("a_grid must be non-empty with entries in [0, 1]");
        }
        if self.family == Family::FaultyGrover {
            if let Some(&d) = self.d.iter().find(|&&d| self.k >= d) {
                bail!("marked index k={} out of range for d={d}", self.k);
            }
        }
        if self.command == Command::Sweep && self.d.len() < 2 && self.eps.len() < 2 {
            bail!("sweep needs at least one of d, eps to be a list");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = ExperimentConfig::resolve(Command::Certify, None, ConfigOverrides::default()).unwrap();
        assert_eq!(c.family, Family::Identity);
        assert_eq!(c.access, Access::Incoherent);
        assert_eq!(c.d, vec![2]);
        assert_eq!(c.trials, 100);
    }

    #[test]
    fn file_then_flag_precedence() {
        let dir = std::env::temp_dir().join(format!("chancert-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.conf");
        std::fs::write(
            &path,
            "# example\nfamily = faulty-grover\nd = 4,8\neps = 0.2\np = 0.8\ntrials = 7\n",
        )
        .unwrap();
        let file = ConfigOverrides::from_file(&path).unwrap();
        let flags = ConfigOverrides {
            p: Some(0.95),
            ..Default::default()
        };
        let c = ExperimentConfig::resolve(Command::Certify, Some(file), flags).unwrap();
        assert_eq!(c.family, Family::FaultyGrover);
        assert_eq!(c.d, vec![4, 8]);
        assert_eq!(c.trials, 7);
        assert_eq!(c.p, 0.95); // flag wins
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn unknown_key_rejected() {
        let dir = std::env::temp_dir().join(format!("chancert-config-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.conf");
        std::fs::write(&path, "familly = identity\n").unwrap();
        assert!(ConfigOverrides::from_file(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn validation_catches_bad_ranges() {
        let mut flags = ConfigOverrides::default();
        flags.eps = Some("2.5".into());
        assert!(ExperimentConfig::resolve(Command::Certify, None, flags).is_err());

        let mut flags = ConfigOverrides::default();
        flags.family = Some("faulty-grover".into());
        flags.k = Some(5);
        flags.d = Some("2".into());
        assert!(ExperimentConfig::resolve(Command::Certify, None, flags).is_err());

        let flags = ConfigOverrides::default();
        assert!(ExperimentConfig::resolve(Command::Sweep, None, flags).is_err());
    }
}
