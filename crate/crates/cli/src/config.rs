//! Experiment configuration: JSON config file plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mech_eff_core::{DistributionSpec, ALPHA};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    /// Reserve price of a distribution.
    Reserve,
    /// Analytic Gain, Loss and their difference per k.
    Gainloss,
    /// Upper and lower extra-bidder bounds per k.
    Bounds,
    /// Single-item upper bound, simulated.
    Thm1,
    /// Single-item lower bound, simulated.
    Thm2,
    /// Multi-item upper bound, analytic and simulated.
    Thm3,
    /// Regular-distribution counterexample search.
    RegularCx,
    /// Efficiency and revenue ratios with equal bidder counts.
    Ratio,
    /// Revenue of VCG with one extra bidder vs. Myerson.
    Bk,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Reserve => "reserve",
            Experiment::Gainloss => "gainloss",
            Experiment::Bounds => "bounds",
            Experiment::Thm1 => "thm1",
            Experiment::Thm2 => "thm2",
            Experiment::Thm3 => "thm3",
            Experiment::RegularCx => "regular_cx",
            Experiment::Ratio => "ratio",
            Experiment::Bk => "bk",
        }
    }

    fn default_distribution(self) -> DistributionSpec {
        match self {
            Experiment::Thm2 => DistributionSpec::G { phi: ALPHA, r: 1.0, eps: Some(1e-6) },
            Experiment::RegularCx => DistributionSpec::P { eps: 0.1, r: 1.0 },
            _ => DistributionSpec::Exponential { rate: 1.0 },
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of `k` values: a single integer, an inclusive range `a..b` / `a..=b`,
/// or a comma-separated list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "KValue", into = "Vec<u32>")]
pub struct KSpec(Vec<u32>);

#[derive(Deserialize)]
#[serde(untagged)]
enum KValue {
    One(u32),
    Many(Vec<u32>),
    Text(String),
}

impl TryFrom<KValue> for KSpec {
    type Error = CliError;

    fn try_from(v: KValue) -> Result<Self, CliError> {
        match v {
            KValue::One(k) => KSpec::new(vec![k]),
            KValue::Many(ks) => KSpec::new(ks),
            KValue::Text(s) => s.parse(),
        }
    }
}

impl From<KSpec> for Vec<u32> {
    fn from(k: KSpec) -> Self {
        k.0
    }
}

impl KSpec {
    pub fn new(ks: Vec<u32>) -> Result<Self, CliError> {
        if ks.is_empty() {
            return Err(CliError::Config("k range is empty".into()));
        }
        if ks.contains(&0) {
            return Err(CliError::Config("k must be at least 1".into()));
        }
        Ok(KSpec(ks))
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }
}

impl FromStr for KSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = |p: &str| CliError::Config(format!("bad k value {p:?}"));
        let num = |p: &str| p.trim().parse::<u32>().map_err(|_| bad(p));
        let s = s.trim();
        if let Some((a, b)) = s.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (num(a)?, num(b)?);
            return KSpec::new((a..=b).collect());
        }
        KSpec::new(s.split(',').map(num).collect::<Result<_, _>>()?)
    }
}

/// Number of extra bidders: a fixed count or resolved per experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "MValue", into = "MValue")]
pub enum MSpec {
    #[default]
    Auto,
    Fixed(u32),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MValue {
    Fixed(u32),
    Text(String),
}

impl TryFrom<MValue> for MSpec {
    type Error = CliError;

    fn try_from(v: MValue) -> Result<Self, CliError> {
        match v {
            MValue::Fixed(m) => Ok(MSpec::Fixed(m)),
            MValue::Text(s) => s.parse(),
        }
    }
}

impl From<MSpec> for MValue {
    fn from(m: MSpec) -> Self {
        match m {
            MSpec::Auto => MValue::Text("auto".into()),
            MSpec::Fixed(m) => MValue::Fixed(m),
        }
    }
}

impl FromStr for MSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "auto" => Ok(MSpec::Auto),
            other => other
                .parse()
                .map(MSpec::Fixed)
                .map_err(|_| CliError::Config(format!("m must be an integer or \"auto\", got {other:?}"))),
        }
    }
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub distribution: DistributionSpec,
    pub k: KSpec,
    pub t: u32,
    pub m: MSpec,
    pub n_trials: u64,
    pub seed: u64,
    pub output_path: PathBuf,
    /// Slack in the multi-item extra-bidder count.
    pub epsilon_slack: f64,
}

/// Partially specified configuration, as read from a file or the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub experiment: Option<Experiment>,
    pub distribution: Option<DistributionSpec>,
    pub k: Option<KSpec>,
    pub t: Option<u32>,
    pub m: Option<MSpec>,
    pub n_trials: Option<u64>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
    pub epsilon_slack: Option<f64>,
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` win.
    pub fn overlay(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            experiment: other.experiment.or(self.experiment),
            distribution: other.distribution.or(self.distribution),
            k: other.k.or(self.k),
            t: other.t.or(self.t),
            m: other.m.or(self.m),
            n_trials: other.n_trials.or(self.n_trials),
            seed: other.seed.or(self.seed),
            output_path: other.output_path.or(self.output_path),
            epsilon_slack: other.epsilon_slack.or(self.epsilon_slack),
        }
    }

    pub fn resolve(self) -> Result<ExperimentConfig, CliError> {
        let experiment = self
            .experiment
            .ok_or_else(|| CliError::Config("no experiment given".into()))?;
        let default_k = if experiment == Experiment::Bounds { "1..100" } else { "1..10" };
        let config = ExperimentConfig {
            experiment,
            distribution: self.distribution.unwrap_or_else(|| experiment.default_distribution()),
            k: match self.k {
                Some(k) => k,
                None => default_k.parse()?,
            },
            t: self.t.unwrap_or(1),
            m: self.m.unwrap_or_default(),
            n_trials: self.n_trials.unwrap_or(1_000_000),
            seed: self.seed.unwrap_or(0),
            output_path: self
                .output_path
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", experiment.name()))),
            epsilon_slack: self.epsilon_slack.unwrap_or(0.1),
        };
        config.validate()?;
        Ok(config)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.distribution.build()?;
        if self.t == 0 {
            return Err(CliError::Config("t must be at least 1".into()));
        }
        if self.n_trials == 0 {
            return Err(CliError::Config("n_trials must be at least 1".into()));
        }
        if !(self.epsilon_slack > 0.0) {
            return Err(CliError::Config("epsilon_slack must be positive".into()));
        }
        if self.k.values().is_empty() {
            return Err(CliError::Config("k range is empty".into()));
        }
        Ok(())
    }

    /// Path of the JSON summary written next to the CSV.
    pub fn summary_path(&self) -> PathBuf {
        self.output_path.with_extension("json")
    }
}
