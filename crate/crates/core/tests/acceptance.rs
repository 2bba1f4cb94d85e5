//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL` line with the measured extremes, then asserts.
//!
//! Run with `cargo test -p nshard --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use std::time::{Duration, Instant};

use nshard::algorithms::{run, AlgorithmSpec};
use nshard::embed::{HardInstance, STATIONARITY_C};
use nshard::rng::{derive, Stream};
use nshard::schedule::AngleSchedule;
use nshard::verify::flow::{local_decrease_certificate, DEFAULT_BALL_SAMPLES};
use nshard::verify::suite::{
    instances, interval_checks, lipschitz_check, nonnegativity_check, profile_checks, profile_checks_mixed,
    regularity_check, schedule_bounds, separation_checks, stationarity_checks,
};
use nshard::verify::{concentration_check, invariant_suite, mc_hitting, Check, HittingParams, SuiteParams};
use nshard::Quad;

const SEED: u64 = 20_241_014;

fn verdict(n: usize, passed: bool, elapsed: Duration, budget: Duration, detail: &str) {
    let on_time = elapsed <= budget;
    let ok = passed && on_time;
    println!(
        "criterion {n}: {} ({:.2}s of {}s budget) {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(passed, "criterion {n} property failed: {detail}");
    assert!(on_time, "criterion {n} exceeded its time budget");
}

fn summarize(checks: &[Check]) -> String {
    checks
        .iter()
        .map(|c| format!("{}={:.3e}{}", c.name, c.measured, if c.passed { "" } else { "!" }))
        .collect::<Vec<_>>()
        .join(" ")
}

fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn embedded(n_instances: usize, depth: usize) -> Vec<HardInstance<f64>> {
    instances(&[2, 5, 10], &[1e-3, 1e-8], n_instances, depth, SEED).unwrap()
}

#[test]
fn criterion_01_schedule_constants() {
    let t = Instant::now();
    let checks = vec![schedule_bounds::<f64>(60), schedule_bounds::<Quad>(60)];
    verdict(1, all_passed(&checks), t.elapsed(), Duration::from_secs(1), &summarize(&checks));
}

#[test]
fn criterion_02_profile_structure() {
    let t = Instant::now();
    let depths: Vec<usize> = (1..=10).collect();
    let checks: Vec<Check> = profile_checks_mixed(&depths, 20, 0, SEED, false)
        .unwrap()
        .into_iter()
        .filter(|c| !c.name.starts_with("representation"))
        .collect();
    let profiles: u64 = checks.iter().filter(|c| c.name.starts_with("profile_continuity")).map(|c| c.samples).sum();
    assert_eq!(profiles, 200);
    verdict(2, all_passed(&checks), t.elapsed(), Duration::from_secs(10), &summarize(&checks));
}

#[test]
fn criterion_03_interval_combinatorics() {
    let t = Instant::now();
    let mut checks = interval_checks(8);
    checks.extend(separation_checks(4, 5, 256.0, 100, SEED));
    verdict(3, all_passed(&checks), t.elapsed(), Duration::from_secs(30), &summarize(&checks));
}

#[test]
fn criterion_04_representation_agreement() {
    let t = Instant::now();
    let checks: Vec<Check> = profile_checks::<f64>(&[4, 5, 6, 7, 8], 10, 10_000, SEED, false)
        .unwrap()
        .into_iter()
        .filter(|c| c.name.starts_with("representation"))
        .collect();
    assert_eq!(checks[0].samples, 500_000);
    verdict(4, all_passed(&checks), t.elapsed(), Duration::from_secs(10), &summarize(&checks));
}

#[test]
fn criterion_05_lipschitz_and_nonnegative() {
    let t = Instant::now();
    let insts = embedded(2, 7);
    let checks = vec![lipschitz_check(&insts, 100_000, SEED), nonnegativity_check(&insts, 100_000, SEED)];
    verdict(5, all_passed(&checks), t.elapsed(), Duration::from_secs(60), &summarize(&checks));
}

#[test]
fn criterion_06_stationarity_sweep() {
    let t = Instant::now();
    let insts = embedded(2, 7);
    let checks = stationarity_checks(&insts, 100_000, SEED);
    let required: Vec<Check> = checks.iter().filter(|c| c.name != "stationarity_margin").cloned().collect();
    let margin = checks.iter().find(|c| c.name == "stationarity_margin").unwrap();
    let detail = format!("{} (expected margin 1/50 {})", summarize(&checks), if margin.passed { "met" } else { "missed" });
    verdict(6, all_passed(&required), t.elapsed(), Duration::from_secs(60), &detail);
}

#[test]
fn criterion_07_finite_difference_regularity() {
    let t = Instant::now();
    let insts = instances(&[2, 5, 10], &[1e-3, 1e-8], 1, 3, SEED).unwrap();
    let checks = vec![regularity_check(&insts, 100, 30, 20, SEED)];
    assert_eq!(checks[0].samples, 130 * 20);
    verdict(7, all_passed(&checks), t.elapsed(), Duration::from_secs(30), &summarize(&checks));
}

#[test]
fn criterion_08_progress_process() {
    let t = Instant::now();
    let params = HittingParams { t: 50, k: 6, n: 7, ln_inv_rho: (1e8f64).ln() };
    let mut ok = true;
    let mut detail = String::new();
    for spec in [AlgorithmSpec::RandomSearch { radius: 1.0 }, AlgorithmSpec::Pgd { eta: 0.1, noise: 0.01 }] {
        let r = mc_hitting::<f64>(&spec, params, 2000, SEED, 6).unwrap();
        let deep = r.reach_depth[5];
        let capped = r.depth_bound.min(1.0);
        let jumps_ok = r.jumps.iter().all(|j| j.passed);
        let this = r.paths_valid && jumps_ok && r.reach_k.below(capped) && deep.hi < 0.01;
        ok &= this;
        let jumps: Vec<String> = r
            .jumps
            .iter()
            .map(|j| format!("m{}:{:.2e}/{:.2e}", j.m, j.at_least.estimate, j.bound))
            .collect();
        detail.push_str(&format!(
            "[{} jumps {} Pr[Z_T>=6]={:.4} (cap {:.2}) wilson_hi={:.2e}] ",
            spec.id(),
            jumps.join(","),
            r.reach_k.estimate,
            capped,
            deep.hi
        ));
    }
    verdict(8, ok, t.elapsed(), Duration::from_secs(300), detail.trim_end());
}

#[test]
fn criterion_09_concentration() {
    let t = Instant::now();
    let r = concentration_check::<f64>(500, 50, 200, SEED, &AlgorithmSpec::Pgd { eta: 0.1, noise: 0.01 }, 7).unwrap();
    let ok = r.exceed.successes == 0 && r.passed() && !r.vacuous;
    let detail = format!(
        "exceedances={}/{} max_alignment={:.4} bound={:.3e}",
        r.exceed.successes, r.n_runs, r.max_alignment, r.bound
    );
    verdict(9, ok, t.elapsed(), Duration::from_secs(120), &detail);
}

#[test]
fn criterion_10_local_decrease() {
    let t = Instant::now();
    let sched = AngleSchedule::<f64>::new();
    let inst = HardInstance::random(&sched, 10, 7, 1e-8, SEED).unwrap();
    let mut certified = 0usize;
    let mut required = 0usize;
    let mut worst_ratio = f64::INFINITY;
    for spec in [AlgorithmSpec::Pgd { eta: 0.1, noise: 0.01 }, AlgorithmSpec::Subgradient { eta: 0.1 }] {
        let tr = run(&spec, &inst, &[0.0; 10], 30, derive(SEED, Stream::Algorithm, 0)).unwrap();
        for (i, (x, resp)) in tr.iterates.iter().zip(&tr.responses).enumerate() {
            if resp.value < 1.0 {
                continue;
            }
            for delta in [0.1, 0.5, 1.0] {
                let cert = local_decrease_certificate(
                    &inst,
                    x,
                    delta,
                    STATIONARITY_C,
                    DEFAULT_BALL_SAMPLES,
                    derive(SEED, Stream::Sampling, i as u64),
                )
                .unwrap();
                required += 1;
                certified += cert.certified as usize;
                worst_ratio = worst_ratio.min(cert.decrease / cert.required);
            }
        }
    }
    let detail = format!("certified {certified}/{required} min decrease/(delta c) = {worst_ratio:.3}");
    verdict(10, required > 0 && certified == required, t.elapsed(), Duration::from_secs(120), &detail);
}

#[test]
fn criterion_11_determinism() {
    let t = Instant::now();
    let small = SuiteParams {
        n_instances: 1,
        points: 2000,
        profiles_per_depth: 3,
        fd_random: 20,
        fd_kinks: 8,
        separation_samples: 10,
        seed: SEED,
        ..SuiteParams::default()
    };
    let suite = invariant_suite(&small).unwrap() == invariant_suite(&small).unwrap();

    let sched = AngleSchedule::<f64>::new();
    let a = HardInstance::random(&sched, 10, 7, 1e-8, SEED).unwrap();
    let b = HardInstance::random(&sched, 10, 7, 1e-8, SEED).unwrap();
    let instance = a.to_kv() == b.to_kv();

    let spec = AlgorithmSpec::Pgd { eta: 0.1, noise: 0.01 };
    let ta = run(&spec, &a, &[0.0; 10], 30, 5).unwrap();
    let tb = run(&spec, &b, &[0.0; 10], 30, 5).unwrap();
    let bits = |tr: &nshard::algorithms::Trajectory<f64>| -> Vec<u64> {
        tr.iterates.iter().flatten().map(|v| v.to_bits()).collect()
    };
    let trajectory = bits(&ta) == bits(&tb);

    let params = HittingParams { t: 20, k: 3, n: 4, ln_inv_rho: 18.0 };
    let mc = mc_hitting::<f64>(&spec, params, 200, SEED, 4).unwrap() == mc_hitting::<f64>(&spec, params, 200, SEED, 4).unwrap();

    let ca = local_decrease_certificate(&a, &ta.iterates[3], 0.5, 0.01, 200, 1).unwrap();
    let cb = local_decrease_certificate(&b, &tb.iterates[3], 0.5, 0.01, 200, 1).unwrap();
    let certificate = ca == cb;

    let detail = format!(
        "suite={suite} instance={instance} trajectory={trajectory} mc={mc} certificate={certificate}"
    );
    verdict(
        11,
        suite && instance && trajectory && mc && certificate,
        t.elapsed(),
        Duration::from_secs(60),
        &detail,
    );
}
