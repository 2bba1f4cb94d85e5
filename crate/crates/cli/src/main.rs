//! `nshard`: build, check, run and Monte Carlo drivers for the hard instances.

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{Base, Mode, Precision, RunConfig};
use nshard::algorithms::{run, AlgorithmSpec};
use nshard::embed::{HardInstance, STATIONARITY_C};
use nshard::hard1d::{fmt_num, HardProfile, ScheduleParams};
use nshard::io::{iterate_records, write_slices_csv, write_summary_csv, write_trajectory_jsonl};
use nshard::rng::{derive, Stream};
use nshard::schedule::AngleSchedule;
use nshard::verify::flow::{certify_iterates, DEFAULT_BALL_SAMPLES};
use nshard::verify::stats::Proportion;
use nshard::verify::{concentration_check, invariant_suite, mc_hitting, progress_process, HittingParams, SuiteParams};
use nshard::{Quad, Real};

const DELTAS: [f64; 3] = [0.1, 0.5, 1.0];
const PROFILE_RANGE: (f64, f64) = (-0.25, 1.25);
const PROFILE_POINTS: usize = 1001;
const SLICE_HALF_WIDTH: f64 = 1.0;
const SLICE_POINTS: usize = 401;
const MAX_JUMP: usize = 6;
const SUITE_MAX_DEPTH: usize = 8;

#[derive(Parser)]
#[command(name = "nshard", version, about = "Hard instances for nonsmooth nonconvex optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance, its profile and axis slices.
    Build(Overrides),
    /// Run the invariant suite and write a certificate report.
    Check(Overrides),
    /// Run one algorithm on one instance and certify its iterates.
    Run(Overrides),
    /// Monte Carlo estimates of the hitting and concentration bounds.
    Mc(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    /// TOML file with any subset of the run settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Horizon (number of oracle calls).
    #[arg(long = "T")]
    t: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// sd, pgd, random or grid.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Existing directory for the outputs.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    precision: Option<Precision>,
    #[arg(long = "log-base", value_enum)]
    log_base: Option<Base>,
    /// Inject a slope fault before checking.
    #[arg(long)]
    mutate: bool,
}

impl Overrides {
    fn resolve(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(mode, t, d, gamma, k, rho, algo, runs, seed, out, precision, log_base);
        if self.eta.is_some() {
            cfg.eta = self.eta;
        }
        if self.noise.is_some() {
            cfg.noise = self.noise;
        }
        cfg.mutate |= self.mutate;
        Ok(cfg)
    }
}

/// Files are collected in memory and written only once everything succeeded.
#[derive(Default)]
struct Outputs(Vec<(&'static str, Vec<u8>)>);

impl Outputs {
    fn add(&mut self, name: &'static str, bytes: Vec<u8>) {
        self.0.push((name, bytes));
    }

    fn write(self, cfg: &RunConfig) -> Result<()> {
        let dir = cfg.out_dir()?;
        for (name, bytes) in self.0 {
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

fn rho_in<S: Real>(cfg: &RunConfig, params: &ScheduleParams) -> Result<S> {
    let rho = match cfg.mode {
        Mode::Desk => S::lit(cfg.rho),
        Mode::Theory => (-S::lit(params.ln_inv_rho)).exp(),
    };
    if !(rho > S::zero()) {
        bail!(
            "rho = exp(-{}) underflows to zero in {:?} precision; pass --precision extended",
            fmt_num(params.ln_inv_rho),
            cfg.precision
        );
    }
    Ok(rho)
}

/// Scientific notation, or `exp(ln x)` when `x` underflows a double.
fn fmt_tiny<S: Real>(x: S) -> String {
    let v = x.to_f64_lossy();
    if v == 0.0 && x > S::zero() {
        format!("exp({})", fmt_num(x.ln()))
    } else {
        format!("{v:e}")
    }
}

fn instance<S: Real>(cfg: &RunConfig, params: &ScheduleParams) -> Result<HardInstance<S>> {
    let rho = rho_in::<S>(cfg, params)?;
    let inst = HardInstance::random(&AngleSchedule::<S>::new(), cfg.d, params.n, rho, cfg.seed)?;
    if !inst.cap_resolved() {
        eprintln!(
            "warning: mu = {} is below what {:?} precision resolves; the cap is numerically a kink",
            fmt_tiny(inst.mu()),
            cfg.precision
        );
    }
    Ok(inst)
}

fn build<S: Real>(cfg: &RunConfig, params: &ScheduleParams) -> Result<ExitCode> {
    let inst = instance::<S>(cfg, params)?;
    let mut out = Outputs::default();
    out.add("instance.kv", inst.to_kv().into_bytes());

    let profile = HardProfile::hbar(&AngleSchedule::<S>::new(), inst.sigma())?;
    let mut buf = Vec::new();
    profile
        .table()
        .write_profile(&mut buf, S::lit(PROFILE_RANGE.0), S::lit(PROFILE_RANGE.1), PROFILE_POINTS)?;
    out.add("profile.csv", buf);

    let mut buf = Vec::new();
    write_slices_csv(&inst, SLICE_HALF_WIDTH, SLICE_POINTS, &mut buf)?;
    out.add("slices.csv", buf);
    out.add("config.toml", cfg.to_toml()?.into_bytes());
    out.write(cfg)?;
    eprintln!(
        "built d={} k={} N={} mu={} x_mid={}",
        cfg.d,
        params.k,
        params.n,
        fmt_tiny(inst.mu()),
        fmt_num(profile.x_mid())
    );
    Ok(ExitCode::SUCCESS)
}

fn check(cfg: &RunConfig, params: &ScheduleParams) -> Result<ExitCode> {
    let mut suite = SuiteParams {
        depth: params.n.min(SUITE_MAX_DEPTH),
        seed: cfg.seed,
        mutate: cfg.mutate,
        ..SuiteParams::default()
    };
    if !suite.dims.contains(&cfg.d) {
        suite.dims.push(cfg.d);
    }
    if cfg.mode == Mode::Desk && !suite.rhos.contains(&cfg.rho) {
        suite.rhos.push(cfg.rho);
    }
    let report = invariant_suite(&suite)?;
    let mut out = Outputs::default();
    let mut buf = Vec::new();
    report.write_jsonl(&mut buf)?;
    out.add("report.jsonl", buf);
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    out.add("report.csv", buf);
    out.add("config.toml", cfg.to_toml()?.into_bytes());
    out.write(cfg)?;

    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    eprintln!("{} checks, {} failed", report.checks.len(), failed.len());
    for name in &failed {
        eprintln!("  FAIL {name}");
    }
    Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

#[derive(Serialize)]
struct RunSummary {
    algorithm: AlgorithmSpec,
    precision: Precision,
    #[serde(rename = "T")]
    t: usize,
    d: usize,
    k: usize,
    n: usize,
    seed: u64,
    mu: f64,
    /// `ln μ`, meaningful even where `μ` underflows a double.
    ln_mu: f64,
    cap_resolved: bool,
    min_f: f64,
    /// `min_t f(x_t) ≥ 1`, so no iterate is near a stationary point.
    far_from_stationary: bool,
    z_final: usize,
    deltas: Vec<f64>,
    certified: usize,
    required: usize,
}

fn run_cmd<S: Real>(cfg: &RunConfig, params: &ScheduleParams) -> Result<ExitCode> {
    let spec = cfg.algorithm()?;
    let inst = instance::<S>(cfg, params)?;
    let x0 = vec![S::zero(); cfg.d];
    let tr = run(&spec, &inst, &x0, cfg.t, derive(cfg.seed, Stream::Algorithm, 0))?;
    let progress = progress_process(&tr, inst.base().hbar(), inst.sigma())?;
    let deltas: Vec<S> = DELTAS.iter().map(|&d| S::lit(d)).collect();
    let certs = certify_iterates(
        &inst,
        &tr.iterates,
        &deltas,
        S::lit(STATIONARITY_C),
        S::one(),
        DEFAULT_BALL_SAMPLES,
        cfg.seed,
    )?;
    let records = iterate_records(&tr, &progress);

    let mut out = Outputs::default();
    out.add("instance.kv", inst.to_kv().into_bytes());
    let mut buf = Vec::new();
    write_trajectory_jsonl(&records, &mut buf)?;
    out.add("trajectory.jsonl", buf);
    let mut buf = Vec::new();
    write_summary_csv(&records, &certs, &deltas, &mut buf)?;
    out.add("summary.csv", buf);

    let all: Vec<_> = certs.iter().flatten().flatten().collect();
    let certified = all.iter().filter(|c| c.certified).count();
    let min_f = tr.min_value().to_f64_lossy();
    let summary = RunSummary {
        algorithm: spec,
        precision: cfg.precision,
        t: cfg.t,
        d: cfg.d,
        k: params.k,
        n: params.n,
        seed: cfg.seed,
        mu: inst.mu().to_f64_lossy(),
        ln_mu: inst.mu().ln().to_f64_lossy(),
        cap_resolved: inst.cap_resolved(),
        min_f,
        far_from_stationary: min_f >= 1.0,
        z_final: progress.last(),
        deltas: DELTAS.to_vec(),
        certified,
        required: all.len(),
    };
    let mut json = serde_json::to_vec_pretty(&summary)?;
    json.push(b'\n');
    out.add("run.json", json);
    out.add("config.toml", cfg.to_toml()?.into_bytes());
    out.write(cfg)?;

    eprintln!(
        "{}: min f = {} Z_T = {} certified {certified}/{}",
        spec.id(),
        fmt_num(min_f),
        progress.last(),
        all.len()
    );
    Ok(if certified == all.len() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn csv_row(quantity: &str, p: &Proportion, bound: Option<f64>, vacuous: bool, passed: bool) -> String {
    format!(
        "{quantity},{},{},{},{},{},{},{vacuous},{passed}\n",
        p.successes,
        p.trials,
        fmt_num(p.estimate),
        fmt_num(p.lo),
        fmt_num(p.hi),
        bound.map(fmt_num).unwrap_or_default()
    )
}

fn mc<S: Real>(cfg: &RunConfig, params: &ScheduleParams) -> Result<ExitCode> {
    let spec = cfg.algorithm()?;
    rho_in::<S>(cfg, params)?;
    let hp = HittingParams { t: cfg.t, k: params.k, n: params.n, ln_inv_rho: params.ln_inv_rho };
    let hit = mc_hitting::<S>(&spec, hp, cfg.runs, cfg.seed, MAX_JUMP.min(params.n))?;
    let conc = concentration_check::<S>(cfg.d, cfg.t, cfg.runs, cfg.seed, &spec, params.n)?;

    let mut jsonl = Vec::new();
    for (kind, mut value) in [("hitting", serde_json::to_value(&hit)?), ("concentration", serde_json::to_value(&conc)?)] {
        value["kind"] = kind.into();
        serde_json::to_writer(&mut jsonl, &value)?;
        jsonl.push(b'\n');
    }

    let mut csv = String::from("quantity,successes,trials,estimate,wilson_lo,wilson_hi,bound,vacuous,passed\n");
    let radius_ok = hit.radius_bound_vacuous || hit.hit_radius.below(hit.radius_bound);
    csv += &csv_row("hit_radius", &hit.hit_radius, Some(hit.radius_bound), hit.radius_bound_vacuous, radius_ok);
    let depth_ok = hit.depth_bound_vacuous || hit.reach_k.below(hit.depth_bound);
    csv += &csv_row("reach_k", &hit.reach_k, Some(hit.depth_bound), hit.depth_bound_vacuous, depth_ok);
    for (l, p) in hit.reach_depth.iter().enumerate() {
        csv += &csv_row(&format!("reach_depth_{}", l + 1), p, None, false, true);
    }
    for j in &hit.jumps {
        csv += &csv_row(&format!("jump_ge_{}", j.m), &j.at_least, Some(j.bound), false, j.passed);
        csv += &csv_row(&format!("jump_eq_{}", j.m), &j.exactly, None, false, true);
    }
    csv += &csv_row("alignment", &conc.exceed, Some(conc.bound), conc.vacuous, conc.passed());

    let mut out = Outputs::default();
    out.add("mc.jsonl", jsonl);
    out.add("mc.csv", csv.into_bytes());
    out.add("config.toml", cfg.to_toml()?.into_bytes());
    out.write(cfg)?;

    for w in hit.warnings() {
        eprintln!("warning: {w}");
    }
    if conc.vacuous {
        eprintln!("warning: concentration bound T*exp(-d/36) = {:.4} exceeds 1 and is vacuous", conc.bound);
    }
    if !hit.paths_valid {
        eprintln!("error: a progress path was not monotone or left [0, N]");
    }
    let passed = hit.passed() && conc.passed();
    eprintln!("{}", if passed { "all non-vacuous bounds hold" } else { "a non-vacuous bound failed" });
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

macro_rules! dispatch {
    ($f:ident, $cfg:expr, $p:expr) => {
        match $cfg.precision {
            Precision::Single => $f::<f32>($cfg, $p),
            Precision::Double => $f::<f64>($cfg, $p),
            Precision::Extended => $f::<Quad>($cfg, $p),
        }
    };
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: Cli) -> Result<ExitCode> {
    let (command, overrides) = match cli.command {
        Command::Build(o) => ("build", o),
        Command::Check(o) => ("check", o),
        Command::Run(o) => ("run", o),
        Command::Mc(o) => ("mc", o),
    };
    let cfg = overrides.resolve()?;
    let params = cfg.validate()?;
    cfg.out_dir()?;
    match command {
        "build" => dispatch!(build, &cfg, &params),
        "check" => check(&cfg, &params),
        "run" => dispatch!(run_cmd, &cfg, &params),
        _ => dispatch!(mc, &cfg, &params),
    }
}
