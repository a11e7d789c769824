//! The named experiments and their report tables.
//!
//! CSV columns per experiment (stable order):
//!
//! | experiment   | columns |
//! |--------------|---------|
//! | `reserve`    | `family,reserve,cdf_at_reserve,mhr,reserve_cdf_ok,pass` |
//! | `gainloss`   | `k,m,phi,r,gain,loss_extremal,diff_extremal,loss_numeric,pass` |
//! | `bounds`     | `k,m_upper,m_lower` |
//! | `thm1`/`thm2`| `k,m,t,diff_mean,diff_std_err,eff_ema,eff_ema_std_err,eff_rma,eff_rma_std_err,analytic_diff,pass` |
//! | `thm3`       | `k,t,m,s,extra,diff_mean,diff_std_err,eff_ema,eff_ema_std_err,eff_rma,eff_rma_std_err,analytic_min_slack,pass` |
//! | `regular_cx` | `k,m,r,eps_star,loss,gain,margin,regular,mhr,pass` |
//! | `ratio`      | `k,eff_ratio,eff_ratio_std_err,eff_bound,rev_ratio,rev_ratio_std_err,rev_bound,pass` |
//! | `bk`         | `k,diff_mean,diff_std_err,rev_ema,rev_ema_std_err,rev_rma,rev_rma_std_err,pass` |

use mech_eff_core::analysis::{
    gain, gain_minus_loss_g, loss_closed_form_g, loss_numeric, lower_bound_m, multi_gain_exact,
    multi_item_s, regular_counterexample_search, upper_bound_m,
};
use mech_eff_core::distributions::{
    lemma1_check, mhr_check, regularity_check, reserve_price, ValueDistribution,
};
use mech_eff_core::simulate::{efficiency_ratio, paired_compare, revenue_compare_bk};
use mech_eff_core::{Error as CoreError, PFamily, SimConfig, ALPHA};
use serde_json::{json, Map, Value};

use crate::config::{Experiment, ExperimentConfig, MSpec};
use crate::format::g17;
use crate::CliError;

/// Standard errors of slack allowed in the simulated checks.
pub const SIGMAS: f64 = 3.0;
/// Grid used by the monotonicity checks.
pub const CHECK_GRID: usize = 1024;
/// Absolute tolerance of the analytic inequalities, per unit of reserve.
pub const ANALYTIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => g17(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(v) => json!(v),
        }
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

/// One table of results plus the overall verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: Experiment,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    pub pass: bool,
    /// Short result printed to standard output, if the experiment has one.
    pub headline: Option<String>,
}

impl Report {
    fn new(experiment: Experiment, columns: &'static [&'static str]) -> Self {
        Report { experiment, columns, rows: Vec::new(), pass: true, headline: None }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        if let Some(Cell::Bool(false)) = self.column(&row, "pass") {
            self.pass = false;
        }
        self.rows.push(row);
    }

    fn column<'a>(&self, row: &'a [Cell], name: &str) -> Option<&'a Cell> {
        self.columns.iter().position(|c| *c == name).map(|i| &row[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self, config: &ExperimentConfig) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        json!({
            "experiment": self.experiment.name(),
            "pass": self.pass,
            "config": config,
            "rows": rows,
        })
    }
}

/// Runs the configured experiment. `threads` caps the simulation workers.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<Report, CliError> {
    config.validate()?;
    let dist = config.distribution.build()?;
    let sim = SimConfig::new(config.n_trials, config.seed).with_threads(threads);
    match config.experiment {
        Experiment::Reserve => reserve(config, dist.as_ref()),
        Experiment::Gainloss => gainloss(config, dist.as_ref()),
        Experiment::Bounds => Ok(bounds(config)),
        Experiment::Thm1 | Experiment::Thm2 => single_item(config, dist.as_ref(), &sim),
        Experiment::Thm3 => multi_item(config, dist.as_ref(), &sim),
        Experiment::RegularCx => regular_cx(config, dist.as_ref()),
        Experiment::Ratio => ratio(config, dist.as_ref(), &sim),
        Experiment::Bk => bk(config, dist.as_ref(), &sim),
    }
}

fn resolve_m(config: &ExperimentConfig, k: u32) -> u32 {
    match config.m {
        MSpec::Fixed(m) => m,
        MSpec::Auto if config.experiment == Experiment::Thm2 => lower_bound_m(k),
        MSpec::Auto => upper_bound_m(k),
    }
}

/// `(phi, r)` of the extremal distribution sharing `dist`'s reserve and
/// cdf there.
fn extremal_params(dist: &dyn ValueDistribution) -> Result<(f64, f64), CliError> {
    let r = reserve_price(dist)?;
    let phi = dist.cdf(r);
    if phi > ALPHA + 1e-9 {
        return Err(CliError::Config(format!(
            "cdf at the reserve is {phi}, above 1 - 1/e; the distribution is not MHR"
        )));
    }
    Ok((phi.min(ALPHA), r))
}

fn reserve(config: &ExperimentConfig, dist: &dyn ValueDistribution) -> Result<Report, CliError> {
    let mut report = Report::new(
        Experiment::Reserve,
        &["family", "reserve", "cdf_at_reserve", "mhr", "reserve_cdf_ok", "pass"],
    );
    let r = reserve_price(dist)?;
    let mhr = mhr_check(dist, CHECK_GRID).is_mhr;
    let cdf_ok = lemma1_check(dist)?;
    report.push(vec![
        config.distribution.family().into(),
        r.into(),
        dist.cdf(r).into(),
        mhr.into(),
        cdf_ok.into(),
        (cdf_ok || !mhr).into(),
    ]);
    report.headline = Some(format!("{r:?}"));
    Ok(report)
}

fn gainloss(config: &ExperimentConfig, dist: &dyn ValueDistribution) -> Result<Report, CliError> {
    let mut report = Report::new(
        Experiment::Gainloss,
        &["k", "m", "phi", "r", "gain", "loss_extremal", "diff_extremal", "loss_numeric", "pass"],
    );
    let (phi, r) = extremal_params(dist)?;
    for &k in config.k.values() {
        let m = resolve_m(config, k);
        let loss_x = loss_closed_form_g(phi, r, k)?;
        let diff = gain_minus_loss_g(phi, r, k, m)?;
        let loss_n = match loss_numeric(dist, k) {
            Ok(v) => v,
            Err(CoreError::DegenerateConditioning { .. }) => 0.0,
            Err(e) => return Err(e.into()),
        };
        let pass = diff >= -ANALYTIC_TOL * r && loss_n <= loss_x + 1e-9 * r;
        report.push(vec![
            k.into(),
            m.into(),
            phi.into(),
            r.into(),
            gain(phi, r, m).into(),
            loss_x.into(),
            diff.into(),
            loss_n.into(),
            pass.into(),
        ]);
    }
    Ok(report)
}

fn bounds(config: &ExperimentConfig) -> Report {
    let mut report = Report::new(Experiment::Bounds, &["k", "m_upper", "m_lower"]);
    for &k in config.k.values() {
        report.push(vec![k.into(), upper_bound_m(k).into(), lower_bound_m(k).into()]);
    }
    report
}

fn single_item(
    config: &ExperimentConfig,
    dist: &dyn ValueDistribution,
    sim: &SimConfig,
) -> Result<Report, CliError> {
    if config.t != 1 {
        return Err(CliError::Config(format!(
            "{} is a single-item experiment; use thm3 for t = {}",
            config.experiment, config.t
        )));
    }
    let mut report = Report::new(
        config.experiment,
        &[
            "k", "m", "t", "diff_mean", "diff_std_err", "eff_ema", "eff_ema_std_err", "eff_rma",
            "eff_rma_std_err", "analytic_diff", "pass",
        ],
    );
    let (phi, r) = extremal_params(dist)?;
    for &k in config.k.values() {
        let m = resolve_m(config, k);
        let est = paired_compare(dist, k, m, 1, sim)?;
        let pass = if config.experiment == Experiment::Thm1 {
            est.diff_mean >= -SIGMAS * est.diff_std_err
        } else {
            est.diff_mean < 0.0 && est.diff_mean.abs() > SIGMAS * est.diff_std_err
        };
        report.push(vec![
            k.into(),
            m.into(),
            1u32.into(),
            est.diff_mean.into(),
            est.diff_std_err.into(),
            est.eff_ema.mean.into(),
            est.eff_ema.std_err.into(),
            est.eff_rma.mean.into(),
            est.eff_rma.std_err.into(),
            gain_minus_loss_g(phi, r, k, m)?.into(),
            pass.into(),
        ]);
    }
    Ok(report)
}

/// Smallest `multi_gain_exact(alpha, 1, m, s, t') - t' (1 - alpha^m)` over
/// `t' = 1..=t`.
pub fn multi_item_min_slack(t: u32, m: u32, s: u32) -> Result<f64, CliError> {
    let floor = 1.0 - ALPHA.powi(m as i32);
    let mut min = f64::INFINITY;
    for tr in 1..=t {
        min = min.min(multi_gain_exact(ALPHA, 1.0, m, s, tr)? - tr as f64 * floor);
    }
    Ok(min)
}

fn multi_item(
    config: &ExperimentConfig,
    dist: &dyn ValueDistribution,
    sim: &SimConfig,
) -> Result<Report, CliError> {
    let mut report = Report::new(
        Experiment::Thm3,
        &[
            "k", "t", "m", "s", "extra", "diff_mean", "diff_std_err", "eff_ema", "eff_ema_std_err",
            "eff_rma", "eff_rma_std_err", "analytic_min_slack", "pass",
        ],
    );
    let t = config.t;
    for &k in config.k.values() {
        let m = resolve_m(config, k);
        let s = multi_item_s(t, m, config.epsilon_slack)?;
        let extra = m + s;
        let slack = multi_item_min_slack(t, m, s)?;
        let est = paired_compare(dist, k, extra, t, sim)?;
        let pass = slack >= -ANALYTIC_TOL && est.diff_mean >= -SIGMAS * est.diff_std_err;
        report.push(vec![
            k.into(),
            t.into(),
            m.into(),
            s.into(),
            extra.into(),
            est.diff_mean.into(),
            est.diff_std_err.into(),
            est.eff_ema.mean.into(),
            est.eff_ema.std_err.into(),
            est.eff_rma.mean.into(),
            est.eff_rma.std_err.into(),
            slack.into(),
            pass.into(),
        ]);
    }
    Ok(report)
}

fn regular_cx(config: &ExperimentConfig, dist: &dyn ValueDistribution) -> Result<Report, CliError> {
    let mut report = Report::new(
        Experiment::RegularCx,
        &["k", "m", "r", "eps_star", "loss", "gain", "margin", "regular", "mhr", "pass"],
    );
    let r = reserve_price(dist)?;
    let ms: Vec<u32> = match config.m {
        MSpec::Fixed(m) => vec![m],
        MSpec::Auto => (1..=10).collect(),
    };
    for &k in config.k.values() {
        for &m in &ms {
            let row = match regular_counterexample_search(k, m, r) {
                Ok(cx) => {
                    let p = PFamily::new(cx.eps, r)?;
                    let regular = regularity_check(&p, CHECK_GRID).is_mhr;
                    let mhr = mhr_check(&p, CHECK_GRID).is_mhr;
                    let pass = cx.margin() > 1e-6 * r && regular && !mhr;
                    vec![
                        k.into(),
                        m.into(),
                        r.into(),
                        cx.eps.into(),
                        cx.loss.into(),
                        cx.gain.into(),
                        cx.margin().into(),
                        regular.into(),
                        mhr.into(),
                        pass.into(),
                    ]
                }
                Err(CoreError::SearchExhausted { .. }) => vec![
                    k.into(),
                    m.into(),
                    r.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    f64::NAN.into(),
                    false.into(),
                    false.into(),
                    false.into(),
                ],
                Err(e) => return Err(e.into()),
            };
            report.push(row);
        }
    }
    Ok(report)
}

fn ratio(config: &ExperimentConfig, dist: &dyn ValueDistribution, sim: &SimConfig) -> Result<Report, CliError> {
    let mut report = Report::new(
        Experiment::Ratio,
        &[
            "k", "eff_ratio", "eff_ratio_std_err", "eff_bound", "rev_ratio", "rev_ratio_std_err",
            "rev_bound", "pass",
        ],
    );
    for &k in config.k.values() {
        let rr = efficiency_ratio(dist, k, sim)?;
        let pass = rr.efficiency.holds(SIGMAS) && rr.revenue.holds(SIGMAS);
        report.push(vec![
            k.into(),
            rr.efficiency.value.into(),
            rr.efficiency.std_err.into(),
            rr.efficiency.bound.into(),
            rr.revenue.value.into(),
            rr.revenue.std_err.into(),
            rr.revenue.bound.into(),
            pass.into(),
        ]);
    }
    Ok(report)
}

fn bk(config: &ExperimentConfig, dist: &dyn ValueDistribution, sim: &SimConfig) -> Result<Report, CliError> {
    let mut report = Report::new(
        Experiment::Bk,
        &[
            "k", "diff_mean", "diff_std_err", "rev_ema", "rev_ema_std_err", "rev_rma",
            "rev_rma_std_err", "pass",
        ],
    );
    for &k in config.k.values() {
        let c = revenue_compare_bk(dist, k, sim)?;
        let pass = c.diff_mean >= -SIGMAS * c.diff_std_err;
        report.push(vec![
            k.into(),
            c.diff_mean.into(),
            c.diff_std_err.into(),
            c.rev_ema.mean.into(),
            c.rev_ema.std_err.into(),
            c.rev_rma.mean.into(),
            c.rev_rma.std_err.into(),
            pass.into(),
        ]);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PartialConfig;

    fn config(experiment: Experiment, k: &str) -> ExperimentConfig {
        PartialConfig { experiment: Some(experiment), k: Some(k.parse().unwrap()), ..Default::default() }
            .resolve()
            .unwrap()
    }

    #[test]
    fn bounds_table() {
        let report = run_experiment(&config(Experiment::Bounds, "1,8,100"), None).unwrap();
        assert!(report.pass);
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,m_upper,m_lower");
        assert_eq!(lines[1], "1,3,0");
        assert!(lines[2].starts_with("8,8,"));
        assert!(lines[3].starts_with("100,13,"));
    }

    #[test]
    fn reserve_headline() {
        let report = run_experiment(&config(Experiment::Reserve, "1"), None).unwrap();
        assert_eq!(report.headline.as_deref(), Some("1.0"));
        assert!(report.pass);
    }

    #[test]
    fn gainloss_auto_m_holds() {
        let report = run_experiment(&config(Experiment::Gainloss, "1..20"), None).unwrap();
        assert!(report.pass, "{}", report.to_csv());
    }

    #[test]
    fn gainloss_small_m_fails_on_extremal() {
        let mut cfg = config(Experiment::Gainloss, "5");
        cfg.distribution = mech_eff_core::DistributionSpec::G { phi: ALPHA, r: 1.0, eps: None };
        cfg.m = MSpec::Fixed(1);
        assert!(!run_experiment(&cfg, None).unwrap().pass);
    }

    #[test]
    fn regular_cx_default() {
        let report = run_experiment(&config(Experiment::RegularCx, "1..2"), None).unwrap();
        assert_eq!(report.rows.len(), 20);
        assert!(report.pass, "{}", report.to_csv());
    }

    #[test]
    fn single_item_rejects_multi() {
        let mut cfg = config(Experiment::Thm1, "1");
        cfg.t = 2;
        assert!(matches!(run_experiment(&cfg, None), Err(CliError::Config(_))));
    }

    #[test]
    fn small_simulations_pass() {
        for e in [Experiment::Thm1, Experiment::Ratio, Experiment::Bk] {
            let mut cfg = config(e, "1,3");
            cfg.n_trials = 20_000;
            let report = run_experiment(&cfg, Some(2)).unwrap();
            assert!(report.pass, "{e}: {}", report.to_csv());
        }
    }

    #[test]
    fn summary_embeds_resolved_parameters() {
        let mut cfg = config(Experiment::Thm3, "20");
        cfg.t = 2;
        cfg.n_trials = 5_000;
        let report = run_experiment(&cfg, None).unwrap();
        let summary = report.summary(&cfg);
        let row = &summary["rows"][0];
        assert_eq!(row["m"], json!(upper_bound_m(20)));
        assert_eq!(row["s"], json!(multi_item_s(2, upper_bound_m(20), 0.1).unwrap()));
        assert_eq!(summary["config"]["epsilon_slack"], json!(0.1));
        assert_eq!(summary["experiment"], json!("thm3"));
    }
}
