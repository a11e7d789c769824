use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mech_eff_cli::{
    run_experiment, threads_from_env, write_report, CliError, Experiment, KSpec, MSpec, PartialConfig,
};
use mech_eff_core::DistributionSpec;

/// Reserve-price vs. efficient auction experiments.
///
/// Flags override values from the JSON config file. Set MECH_EFF_THREADS to
/// cap the number of simulation workers.
#[derive(Debug, Parser)]
#[command(name = "mech-eff", version)]
struct Args {
    /// Experiment to run (may instead come from the config file).
    experiment: Option<Experiment>,

    /// JSON config file with any of the experiment fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Value distribution, e.g. `exponential:1`, `uniform:0:1`, `g:0.5:1`,
    /// `p:0.1:1`, or a JSON record.
    #[arg(long, value_parser = parse_dist)]
    dist: Option<DistributionSpec>,

    /// Original bidder counts: `5`, `1..10`, `1..=10` or `1,2,5`.
    #[arg(long, value_parser = parse_k)]
    k: Option<KSpec>,

    /// Number of items.
    #[arg(long)]
    t: Option<u32>,

    /// Extra bidders: an integer or `auto`.
    #[arg(long, value_parser = parse_m)]
    m: Option<MSpec>,

    /// Monte Carlo trials.
    #[arg(long = "n")]
    n_trials: Option<u64>,

    #[arg(long)]
    seed: Option<u64>,

    /// CSV output path; the JSON summary goes next to it.
    #[arg(long = "out")]
    output_path: Option<PathBuf>,

    /// Slack in the multi-item extra-bidder count.
    #[arg(long = "eps-slack")]
    epsilon_slack: Option<f64>,
}

fn parse_dist(s: &str) -> Result<DistributionSpec, String> {
    s.parse().map_err(|e: mech_eff_core::Error| e.to_string())
}

fn parse_k(s: &str) -> Result<KSpec, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_m(s: &str) -> Result<MSpec, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

impl Args {
    fn into_partial(self) -> Result<PartialConfig, CliError> {
        let base = match &self.config {
            Some(path) => PartialConfig::from_file(path)?,
            None => PartialConfig::default(),
        };
        Ok(base.overlay(PartialConfig {
            experiment: self.experiment,
            distribution: self.dist,
            k: self.k,
            t: self.t,
            m: self.m,
            n_trials: self.n_trials,
            seed: self.seed,
            output_path: self.output_path,
            epsilon_slack: self.epsilon_slack,
        }))
    }
}

fn run(args: Args) -> Result<bool, CliError> {
    let threads = threads_from_env()?;
    let config = args.into_partial()?.resolve()?;
    let report = run_experiment(&config, threads)?;
    write_report(&config, &report)?;
    if let Some(line) = &report.headline {
        println!("{line}");
    }
    if !report.pass {
        eprintln!("{}: check failed, see {}", config.experiment, config.output_path.display());
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("mech-eff: {e}");
            ExitCode::from(2)
        }
    }
}
