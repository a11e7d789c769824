//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary so the output is readable under
//! `cargo test`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use mech_eff_cli::{run_experiment, PartialConfig};
use mech_eff_core::analysis::{
    gain_minus_loss_g, loss_closed_form_g, loss_numeric, lower_bound_m, multi_gain_exact,
    multi_item_s, q_poly, regular_counterexample_search, upper_bound_m,
};
use mech_eff_core::distributions::{
    domination_check, lemma1_check, mhr_check, regularity_check, reserve_price,
};
use mech_eff_core::numeric::adaptive_simpson;
use mech_eff_core::simulate::{efficiency_ratio, paired_compare, revenue_compare_bk};
use mech_eff_core::{
    Exponential, GFamily, PFamily, SimConfig, Uniform, ValueDistribution, ALPHA,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn random_mhr_instances(n: usize) -> Vec<Box<dyn ValueDistribution>> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..n)
        .map(|i| -> Box<dyn ValueDistribution> {
            match i % 3 {
                0 => Box::new(Exponential::new(rng.random_range(0.05..20.0)).unwrap()),
                1 => {
                    let lo = rng.random_range(0.0..5.0);
                    Box::new(Uniform::new(lo, lo + rng.random_range(0.1..10.0)).unwrap())
                }
                _ => Box::new(
                    GFamily::with_default_eps(rng.random_range(0.0..=ALPHA), rng.random_range(0.01..50.0))
                        .unwrap(),
                ),
            }
        })
        .collect()
}

fn c1_reserve_cdf() -> Outcome {
    let inst = random_mhr_instances(200);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for d in &inst {
        let r = reserve_price(d.as_ref()).unwrap();
        worst = worst.max(d.cdf(r));
        if !lemma1_check(d.as_ref()).unwrap() {
            bad += 1;
        }
    }
    Outcome::new(bad == 0, format!("200 instances, max cdf(reserve) = {worst:.12}, bound {:.12}", ALPHA + 1e-9))
}

fn c2_domination() -> Outcome {
    let inst = random_mhr_instances(200);
    let bad = inst.iter().filter(|d| !domination_check(d.as_ref(), 1024).unwrap()).count();
    Outcome::new(bad == 0, format!("200 instances, grid 1024, {bad} violations"))
}

fn c3_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for &phi in &[0.1, 0.3, 0.5, ALPHA] {
        for &r in &[0.5, 1.0, 7.0] {
            let g = GFamily::with_default_eps(phi, r).unwrap();
            for k in 1..=20 {
                let closed = loss_closed_form_g(phi, r, k).unwrap();
                let numeric = loss_numeric(&g, k).unwrap();
                worst = worst.max(((closed - numeric) / closed).abs());
            }
        }
    }
    Outcome::new(worst <= 1e-8, format!("max relative error {worst:.3e} (tol 1e-8)"))
}

fn c4_upper_bound() -> Outcome {
    let mut worst_q = f64::NEG_INFINITY;
    let mut worst_diff = f64::INFINITY;
    for k in 1..=200 {
        let m = upper_bound_m(k);
        for i in 0..10_000 {
            let x = ALPHA * i as f64 / 9_999.0;
            worst_q = worst_q.max(q_poly(x, k, m).unwrap());
            if x > 0.0 {
                worst_diff = worst_diff.min(gain_minus_loss_g(x, 1.0, k, m).unwrap());
            }
        }
    }
    Outcome::new(
        worst_q <= 1e-12 && worst_diff >= -1e-12,
        format!("max q = {worst_q:.3e}, min gain - loss = {worst_diff:.3e}"),
    )
}

fn c5_lower_bound() -> Outcome {
    let mut min_q = f64::INFINITY;
    for k in 2..=200 {
        for m in 0..=lower_bound_m(k) {
            min_q = min_q.min(q_poly(ALPHA, k, m).unwrap());
        }
    }
    let max_gap = (1..=1_000_000u32).map(|k| upper_bound_m(k) - lower_bound_m(k)).max().unwrap();
    Outcome::new(
        min_q > 0.0 && max_gap <= 6,
        format!("min q(alpha) = {min_q:.3e}, max gap over k <= 1e6 = {max_gap}"),
    )
}

fn c6_thm1_empirical() -> Outcome {
    let dists: [(&str, Box<dyn ValueDistribution>); 3] = [
        ("exp(1)", Box::new(Exponential::new(1.0).unwrap())),
        ("U[0,1]", Box::new(Uniform::new(0.0, 1.0).unwrap())),
        ("G(alpha,1)", Box::new(GFamily::new(ALPHA, 1.0, 1e-6).unwrap())),
    ];
    let cfg = SimConfig::new(1_000_000, SEED);
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for (_, d) in &dists {
        for k in [1, 2, 5, 10] {
            let est = paired_compare(d.as_ref(), k, upper_bound_m(k), 1, &cfg).unwrap();
            let z = est.diff_mean / est.diff_std_err;
            worst = worst.min(z);
            pass &= est.diff_mean >= -3.0 * est.diff_std_err;
        }
    }
    Outcome::new(pass, format!("12 cases at n = 1e6, min diff/se = {worst:.2}"))
}

fn c7_thm2_empirical() -> Outcome {
    let g = GFamily::new(ALPHA, 1.0, 1e-6).unwrap();
    let cfg = SimConfig::new(10_000_000, 42);
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [3, 5, 8] {
        let est = paired_compare(&g, k, lower_bound_m(k), 1, &cfg).unwrap();
        let z = est.diff_mean / est.diff_std_err;
        pass &= est.diff_mean < 0.0 && z < -3.0;
        parts.push(format!("k={k}: diff/se = {z:.1}"));
    }
    Outcome::new(pass, parts.join(", "))
}

fn multi_item_ok(m: u32, t_res: u32) -> bool {
    let s = multi_item_s(t_res, m, 0.1).unwrap();
    multi_gain_exact(ALPHA, 1.0, m, s, t_res).unwrap() >= t_res as f64 * (1.0 - ALPHA.powi(m as i32))
}

fn c8_multi_item() -> Outcome {
    let mut pass = true;
    for k in [20, 50, 100] {
        for t_res in 1..=5 {
            pass &= multi_item_ok(upper_bound_m(k), t_res);
        }
    }
    // smallest k in 1..=100 from which the analytic inequality holds for all
    // t' in 1..=5 and every larger k in the range
    let holds: Vec<bool> = (1..=100).map(|k| (1..=5).all(|t| multi_item_ok(upper_bound_m(k), t))).collect();
    let smallest = (0..holds.len()).find(|&i| holds[i..].iter().all(|&h| h)).map(|i| i + 1);

    let cfg = SimConfig::new(1_000_000, SEED);
    let dists: [Box<dyn ValueDistribution>; 2] = [
        Box::new(GFamily::new(ALPHA, 1.0, 1e-6).unwrap()),
        Box::new(Exponential::new(1.0).unwrap()),
    ];
    let k = 20;
    let m = upper_bound_m(k);
    let mut worst = f64::INFINITY;
    for d in &dists {
        for t in [2, 3] {
            let s = multi_item_s(t, m, 0.1).unwrap();
            let est = paired_compare(d.as_ref(), k, m + s, t, &cfg).unwrap();
            worst = worst.min(est.diff_mean / est.diff_std_err);
            pass &= est.diff_mean >= -3.0 * est.diff_std_err;
        }
    }
    let smallest = smallest.map_or("none".to_string(), |k| k.to_string());
    Outcome::new(
        pass,
        format!("analytic holds from k = {smallest} (k <= 100), empirical min diff/se = {worst:.2}"),
    )
}

fn c9_regular_counterexample() -> Outcome {
    let mut pass = true;
    let mut min_margin = f64::INFINITY;
    for k in 1..=5 {
        for m in 1..=10 {
            match regular_counterexample_search(k, m, 1.0) {
                Ok(cx) => {
                    min_margin = min_margin.min(cx.margin());
                    let p = PFamily::new(cx.eps, 1.0).unwrap();
                    pass &= cx.margin() > 1e-6
                        && regularity_check(&p, 1024).is_mhr
                        && !mhr_check(&p, 1024).is_mhr;
                }
                Err(_) => pass = false,
            }
        }
    }
    Outcome::new(pass, format!("50 (k, m) pairs, min margin = {min_margin:.3e}"))
}

fn c10_ratios() -> Outcome {
    let e = Exponential::new(1.0).unwrap();
    let cfg = SimConfig::new(1_000_000, SEED);
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [1, 2, 5, 10] {
        let rr = efficiency_ratio(&e, k, &cfg).unwrap();
        pass &= rr.efficiency.holds(3.0) && rr.revenue.holds(3.0);
        parts.push(format!("k={k}: eff {:.4}>={:.4} rev {:.4}>={:.4}",
            rr.efficiency.value, rr.efficiency.bound, rr.revenue.value, rr.revenue.bound));
    }
    Outcome::new(pass, parts.join("; "))
}

fn c11_extra_bidder_revenue() -> Outcome {
    let cfg = SimConfig::new(1_000_000, SEED);
    let dists: [Box<dyn ValueDistribution>; 2] =
        [Box::new(Uniform::new(0.0, 1.0).unwrap()), Box::new(Exponential::new(1.0).unwrap())];
    let mut pass = true;
    for d in &dists {
        for k in [1, 3, 5] {
            let c = revenue_compare_bk(d.as_ref(), k, &cfg).unwrap();
            pass &= c.diff_mean >= -3.0 * c.diff_std_err;
        }
    }
    // second-highest of two uniforms: P(min > x) = (1 - x)^2
    let vcg2 = adaptive_simpson(|x| (1.0 - x) * (1.0 - x), 0.0, 1.0, 1e-14);
    // one bidder at the reserve: price times sale probability
    let u = Uniform::new(0.0, 1.0).unwrap();
    let r = reserve_price(&u).unwrap();
    let myerson1 = r * adaptive_simpson(|x| u.density(x), r, 1.0, 1e-14);
    let expected = vcg2 - myerson1;
    let c = revenue_compare_bk(dists[0].as_ref(), 1, &cfg).unwrap();
    let z = (c.diff_mean - expected) / c.diff_std_err;
    pass &= z.abs() <= 4.0;
    Outcome::new(
        pass,
        format!("uniform k=1: diff {:.6} vs oracle {expected:.6} ({z:+.2} se)", c.diff_mean),
    )
}

fn c12_reproducibility() -> Outcome {
    let cases: [(&str, &str, &str, u32); 5] = [
        ("thm1", "exponential:1", "1,2,5", 1),
        ("thm2", "g:0.6321205588285577:1:1e-6", "3,5", 1),
        ("thm3", "exponential:1", "20", 2),
        ("ratio", "exponential:1", "1,5", 1),
        ("bk", "uniform:0:1", "1,3", 1),
    ];
    let mut pass = true;
    for (exp, dist, k, t) in cases {
        let cfg = PartialConfig {
            experiment: Some(serde_json::from_value(serde_json::json!(exp)).unwrap()),
            distribution: Some(dist.parse().unwrap()),
            k: Some(k.parse().unwrap()),
            t: Some(t),
            n_trials: Some(300_000),
            seed: Some(SEED),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        let csvs: Vec<String> = [Some(1), Some(4), None]
            .into_iter()
            .map(|threads| run_experiment(&cfg, threads).unwrap().to_csv())
            .collect();
        pass &= csvs.windows(2).all(|w| w[0].as_bytes() == w[1].as_bytes());
    }
    Outcome::new(pass, "5 experiments, thread caps 1, 4 and default")
}

type Criterion = (u32, &'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: [Criterion; 12] = [
        (1, "reserve cdf at most 1 - 1/e", secs(1), c1_reserve_cdf),
        (2, "extremal distribution dominated", secs(5), c2_domination),
        (3, "closed-form loss vs quadrature", secs(10), c3_closed_form),
        (4, "upper bound, analytic", secs(30), c4_upper_bound),
        (5, "lower bound, analytic", secs(60), c5_lower_bound),
        (6, "upper bound, simulated", None, c6_thm1_empirical),
        (7, "lower bound, simulated", None, c7_thm2_empirical),
        (8, "multi-item extra bidders", None, c8_multi_item),
        (9, "regular counterexample", secs(30), c9_regular_counterexample),
        (10, "efficiency and revenue ratios", None, c10_ratios),
        (11, "one extra bidder beats the reserve", None, c11_extra_bidder_revenue),
        (12, "thread-count reproducibility", None, c12_reproducibility),
    ];
    let mut failures = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = outcome.pass && in_time;
        if !pass {
            failures += 1;
        }
        let timing = match limit {
            Some(l) => format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", elapsed.as_secs_f64()),
        };
        println!(
            "criterion {id:>2} {:<4} {name} [{timing}]: {}",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
