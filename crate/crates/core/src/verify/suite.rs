//! Invariant checks on fresh random instances.
//!
//! Every function here returns [`Check`]s with the extreme value observed, so
//! the same code backs `invariant_suite`, the CLI `check` command and the
//! acceptance tests (which only pin larger sample sizes).

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::report::{CertificateReport, Check};
use crate::algorithms::uniform_in_ball;
use crate::embed::{dot, norm, HardInstance, SubgradCase, STATIONARITY_C};
use crate::error::Result;
use crate::hard1d::{HardProfile, PiecewiseAffine1D};
use crate::intervals::{chain, interval, separation_log_gaps, BitString, ExactDeltas, Interval};
use crate::rng::{derive, stream, Stream};
use crate::scalar::{Quad, Real};
use crate::schedule::AngleSchedule;

/// Merging tolerance for collinear neighbouring pieces.
pub const SLOPE_MERGE_TOL: f64 = 1e-12;
pub const CONTINUITY_TOL: f64 = 1e-9;
pub const AGREEMENT_TOL: f64 = 1e-9;
pub const LIPSCHITZ_TOL: f64 = 1e-9;
pub const FD_STEP: f64 = 1e-6;
pub const FD_TOL: f64 = 1e-4;
pub const INTERVAL_MARGIN: f64 = 1e-12;
/// Points with `f` at or below this are treated as global minimizers.
pub const POSITIVE_VALUE: f64 = 1e-6;

// Sampling-stream labels, one per check.
const L_PROFILE: u64 = 1;
const L_LIPSCHITZ: u64 = 2;
const L_NONNEG: u64 = 3;
const L_SWEEP: u64 = 4;
const L_FD: u64 = 5;
const L_MINNORM: u64 = 6;
const L_INACTIVE: u64 = 7;
const L_SEPARATION: u64 = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteParams {
    /// Instances per `(d, ρ)` pair.
    pub n_instances: usize,
    /// Depth `N` of the embedded instances.
    pub depth: usize,
    pub dims: Vec<usize>,
    pub rhos: Vec<f64>,
    /// Depths of the one-dimensional structure checks. Those above the
    /// double-precision cap run in binary128.
    pub profile_depths: Vec<usize>,
    pub profiles_per_depth: usize,
    /// Points per embedded check (and per profile for the agreement check).
    pub points: usize,
    pub fd_random: usize,
    pub fd_kinks: usize,
    pub fd_directions: usize,
    /// Depth of the finite-difference instances. From depth 4 on, the
    /// breakpoints around `x*` are closer together than `10·FD_STEP`.
    pub fd_depth: usize,
    pub schedule_levels: usize,
    pub interval_depth: usize,
    pub separation_samples: usize,
    pub seed: u64,
    /// Inject a slope fault into every profile before checking.
    pub mutate: bool,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            n_instances: 4,
            depth: 7,
            dims: vec![2, 5, 10],
            rhos: vec![1e-3, 1e-8],
            profile_depths: (1..=10).collect(),
            profiles_per_depth: 20,
            points: 10_000,
            fd_random: 100,
            fd_kinks: 30,
            fd_directions: 20,
            fd_depth: 3,
            schedule_levels: 60,
            interval_depth: 8,
            separation_samples: 100,
            seed: 0,
            mutate: false,
        }
    }
}

/// Steepens the first interior piece downward and the last one upward by
/// `1e−3`. Both sit next to a collinear tail, so convexity breaks.
pub fn inject_slope_fault<S: Real>(table: &mut PiecewiseAffine1D<S>) {
    let last = table.pieces().len() - 1;
    table.perturb_slope(1, S::lit(-1e-3));
    table.perturb_slope(last - 1, S::lit(1e-3));
}

fn suffixed<S: Real>(name: &str) -> String {
    format!("{name}/{}", S::PRECISION)
}

pub fn schedule_bounds<S: Real>(levels: usize) -> Check {
    let s = AngleSchedule::<S>::new();
    let (lo_theta, hi_theta) = (S::FRAC_PI_4(), s.theta_limit());
    let mut ok = true;
    let mut max_delta = 0.0f64;
    for i in 1..=levels {
        let e = s.entry(i).expect("index ≥ 1");
        ok &= e.delta > S::zero() && e.delta <= S::lit(7.0 / 32.0);
        ok &= e.epsilon >= S::lit(0.5) && e.epsilon < S::one();
        ok &= e.theta_base >= lo_theta && e.theta_base <= hi_theta;
        max_delta = max_delta.max(e.delta.to_f64_lossy());
    }
    Check::at_most(
        &suffixed::<S>("schedule_bounds"),
        "0 < delta_i <= 7/32, 1/2 <= epsilon_i < 1, pi/4 <= theta_base_i <= arctan 8",
        max_delta,
        7.0 / 32.0,
        0.0,
        levels as u64,
    )
    .and(ok)
}

fn strictly_increasing<S: Real>(v: &[S]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Structure of `r` and `h̄` tables plus agreement with the descent evaluator.
pub fn profile_checks<S: Real>(
    depths: &[usize],
    per_depth: usize,
    points: usize,
    seed: u64,
    mutate: bool,
) -> Result<Vec<Check>> {
    let sched = AngleSchedule::<S>::new();
    let mut continuity = 0.0f64;
    let mut min_step = f64::INFINITY;
    let mut merged_ok = true;
    let mut slope_lo = f64::INFINITY;
    let mut slope_hi = 0.0f64;
    let mut r0 = 0.0f64;
    let mut h0 = f64::NEG_INFINITY;
    let mut min_err = 0.0f64;
    let mut unique = true;
    let mut agree = 0.0f64;
    let mut profiles = 0u64;
    let mut evaluated = 0u64;
    for &n in depths {
        for j in 0..per_depth {
            let mut rng = stream(seed, Stream::Sampling, L_PROFILE << 32 | (n as u64) << 16 | j as u64);
            let sigma = BitString::random(n, &mut rng);
            let mut r = HardProfile::r(&sched, &sigma)?;
            let mut hb = HardProfile::hbar(&sched, &sigma)?;
            if mutate {
                inject_slope_fault(r.table_mut());
                inject_slope_fault(hb.table_mut());
            }
            profiles += 1;
            let t = r.table();
            continuity = continuity.max(t.continuity_defect());
            min_step = min_step.min(t.min_slope_step());
            merged_ok &= strictly_increasing(&t.merged_slopes(SLOPE_MERGE_TOL));
            let (lo, hi) = t.slope_range();
            slope_lo = slope_lo.min(lo.to_f64_lossy());
            slope_hi = slope_hi.max(hi.to_f64_lossy());
            r0 = r0.max((t.eval(S::zero()) - S::one()).abs().to_f64_lossy());

            let ht = hb.table();
            h0 = h0.max(ht.eval(S::zero()).to_f64_lossy());
            let (xm, vm) = ht.min_breakpoint();
            min_err = min_err.max((vm - S::lit(2.0)).abs().to_f64_lossy());
            let g = ht.subdiff(hb.x_mid());
            unique &= xm == hb.x_mid() && g.lo < S::zero() && g.hi > S::zero();
            unique &= ht.pieces().iter().all(|p| p.slope != S::zero());

            for _ in 0..points {
                let x = if rng.random_bool(0.5) {
                    S::lit(rng.random_range(-0.5..1.5))
                } else {
                    let iv = r.interval(rng.random_range(0..=n));
                    iv.lo + iv.width() * S::lit(rng.random_range(-0.5..1.5))
                };
                let a = r.eval(x);
                let b = t.eval(x);
                agree = agree.max(((a - b).abs() / b.abs().max(S::one())).to_f64_lossy());
                evaluated += 1;
            }
        }
    }
    Ok(vec![
        Check::at_most(
            &suffixed::<S>("profile_continuity"),
            "neighbouring pieces agree at every breakpoint (relative)",
            continuity,
            0.0,
            CONTINUITY_TOL,
            profiles,
        ),
        Check::at_least(
            &suffixed::<S>("profile_convexity"),
            "consecutive slopes never decrease; maximal pieces strictly increasing",
            min_step,
            0.0,
            SLOPE_MERGE_TOL,
            profiles,
        )
        .and(merged_ok),
        Check::at_least(
            &suffixed::<S>("profile_slope_bounds"),
            "every |slope| lies in [1/8, 1]",
            slope_lo,
            1.0 / 8.0,
            SLOPE_MERGE_TOL,
            profiles,
        )
        .and(slope_hi <= 1.0 + SLOPE_MERGE_TOL),
        Check::at_most(&suffixed::<S>("profile_r_at_zero"), "r(0) = 1", r0, 0.0, SLOPE_MERGE_TOL, profiles),
        Check::at_most(&suffixed::<S>("profile_hbar_at_zero"), "hbar(0) <= 3", h0, 3.0, 0.0, profiles),
        Check::at_most(
            &suffixed::<S>("profile_unique_minimum"),
            "min hbar = 2, attained only at x_mid",
            min_err,
            0.0,
            SLOPE_MERGE_TOL,
            profiles,
        )
        .and(unique),
        Check::at_most(
            &suffixed::<S>("representation_agreement"),
            "recursive descent matches the piece table (relative)",
            agree,
            0.0,
            AGREEMENT_TOL,
            evaluated,
        ),
    ])
}

/// Structure checks at each depth in the cheapest precision that holds it.
pub fn profile_checks_mixed(
    depths: &[usize],
    per_depth: usize,
    points: usize,
    seed: u64,
    mutate: bool,
) -> Result<Vec<Check>> {
    let cap = <f64 as Real>::depth_cap();
    let (low, high): (Vec<usize>, Vec<usize>) = depths.iter().partition(|&&n| n <= cap);
    let mut out = Vec::new();
    if !low.is_empty() {
        out.extend(profile_checks::<f64>(&low, per_depth, points, seed, mutate)?);
    }
    if !high.is_empty() {
        out.extend(profile_checks::<Quad>(&high, per_depth, points, seed, mutate)?);
    }
    Ok(out)
}

fn rational_ratio(num: &BigRational, den: &BigRational) -> f64 {
    (num / den).to_f64().unwrap_or(f64::NAN)
}

/// Nesting and pairwise disjointness of all prefixes up to `depth`, in exact
/// arithmetic on the rational images of the double-precision factors.
pub fn interval_checks(depth: usize) -> Vec<Check> {
    let exact = ExactDeltas::from_schedule(&AngleSchedule::<f64>::new(), depth);
    let mut level: Vec<(Vec<u8>, Interval<BigRational>)> =
        vec![(Vec::new(), interval(&exact, &[] as &[u8]))];
    let mut nest = f64::INFINITY;
    let mut disjoint = f64::INFINITY;
    let mut widths_exact = true;
    let mut count = 0u64;
    for _ in 1..=depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (word, parent) in &level {
            for b in 0..2u8 {
                let mut bits = word.clone();
                bits.push(b);
                let child = interval(&exact, &bits);
                nest = nest.min(rational_ratio(&child.inset_in(parent), &parent.width()));
                widths_exact &= child.width() == chain(&exact, &bits).slope;
                next.push((bits, child));
                count += 1;
            }
        }
        next.sort_by(|a, b| a.1.lo.cmp(&b.1.lo));
        for pair in next.windows(2) {
            let scale = pair[0].1.width().max(pair[1].1.width());
            disjoint = disjoint.min(rational_ratio(&pair[0].1.gap(&pair[1].1), &scale));
        }
        level = next;
    }
    vec![
        Check::at_least(
            "interval_nesting",
            "each child interval sits strictly inside its parent (margin relative to parent width)",
            nest,
            INTERVAL_MARGIN,
            0.0,
            count,
        )
        .and(widths_exact),
        Check::at_least(
            "interval_disjointness",
            "same-depth intervals are pairwise disjoint (gap relative to the wider one)",
            disjoint,
            INTERVAL_MARGIN,
            0.0,
            count,
        ),
    ]
}

/// Gaps between `I_{σ1…σk}` and `I_{σ1…σn}` against `ρ = 2^{−log2_inv_rho}`
/// and against the floor `2^{−(2k²+k+4)}`.
pub fn separation_checks(k: usize, n: usize, log2_inv_rho: f64, samples: usize, seed: u64) -> Vec<Check> {
    let sched = AngleSchedule::<f64>::new();
    let mut worst_bits = 0.0f64;
    for j in 0..samples {
        let sigma = BitString::random(n, &mut stream(seed, Stream::Sampling, L_SEPARATION << 32 | j as u64));
        let (left, right) = separation_log_gaps(&sched, &sigma, k, n);
        worst_bits = worst_bits.max(-left.min(right) / std::f64::consts::LN_2);
    }
    let kf = k as f64;
    let floor_bits = 2.0 * kf * kf + kf + 4.0;
    vec![
        Check::at_most(
            "separation_radius",
            "both gaps between the depth-k and depth-N intervals exceed rho (in bits)",
            worst_bits,
            log2_inv_rho,
            0.0,
            samples as u64,
        )
        .and(worst_bits < log2_inv_rho),
        Check::at_most(
            "separation_floor",
            "both gaps are at least 2^-(2k^2+k+4) (in bits)",
            worst_bits,
            floor_bits,
            0.0,
            samples as u64,
        ),
    ]
}

/// `n_instances` instances for every `(d, ρ)` pair.
pub fn instances(
    dims: &[usize],
    rhos: &[f64],
    n_instances: usize,
    depth: usize,
    seed: u64,
) -> Result<Vec<HardInstance<f64>>> {
    let sched = AngleSchedule::<f64>::new();
    let mut out = Vec::new();
    let mut idx = 0u64;
    for &d in dims {
        for &rho in rhos {
            for _ in 0..n_instances {
                out.push(HardInstance::random(&sched, d, depth, rho, derive(seed, Stream::Start, idx))?);
                idx += 1;
            }
        }
    }
    Ok(out)
}

fn unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&g);
        if n > 0.0 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

fn log_uniform<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

fn add(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * y).collect()
}

/// Mixture of uniform points in `B(0, 3)`, points at log-uniform distances
/// from `x*`, and points on the slice `y_d = 0` around the cap apex.
fn mixed_point<R: Rng + ?Sized>(inst: &HardInstance<f64>, rng: &mut R) -> Vec<f64> {
    let d = inst.d();
    let u: f64 = rng.random();
    if u < 0.5 {
        uniform_in_ball(d, 3.0, rng)
    } else if u < 0.8 {
        let r = log_uniform(inst.mu(), 1.0, rng);
        add(inst.x_star(), &unit(d, rng), r)
    } else {
        let mut v = unit(d - 1, rng);
        v.push(0.0);
        let r = log_uniform(inst.mu(), 1.0, rng);
        let a = rng.random_range(-2.0..2.0);
        let mut x = add(&add(inst.x_star(), inst.w(), a), &v, r);
        x[d - 1] = inst.x_star()[d - 1];
        x
    }
}

/// Points in the cone around `w̄` out to the edge of the zero region.
fn cone_point<R: Rng + ?Sized>(inst: &HardInstance<f64>, rng: &mut R) -> Vec<f64> {
    let v = unit(inst.d(), rng);
    let dir = add(&v, inst.w_bar(), rng.random_range(0.0..3.0));
    let n = norm(&dir);
    let t = rng.random_range(0.0..12.0);
    add(inst.x_star(), &dir, t / n)
}

/// Points built to land in each slice case, with the case expected.
pub fn engineered_points(inst: &HardInstance<f64>) -> Vec<(Vec<f64>, SubgradCase)> {
    let d = inst.d();
    let xs = inst.x_star().to_vec();
    let mu = inst.mu();
    let wb = inst.w_bar().to_vec();
    // x = x* + z − w for a chosen z = y + w, kept on the slice.
    let from_z = |z: &[f64]| -> Vec<f64> {
        let mut x: Vec<f64> = xs.iter().zip(z).zip(inst.w()).map(|((a, b), c)| a + b - c).collect();
        x[d - 1] = xs[d - 1];
        x
    };
    let mut out = vec![
        (xs.clone(), SubgradCase::AtMinimizer),
        (from_z(&vec![0.0; d]), SubgradCase::CapApex),
        (from_z(&wb.iter().map(|v| -0.5 * v).collect::<Vec<_>>()), SubgradCase::SliceCapInactive),
        (from_z(&wb.iter().map(|v| 0.5 * v).collect::<Vec<_>>()), SubgradCase::SliceCapLinear),
        (from_z(&wb.iter().map(|v| mu * v).collect::<Vec<_>>()), SubgradCase::SliceCapQuadraticNear),
    ];
    let mut off = xs.clone();
    off[d - 1] += 0.1;
    out.push((off, SubgradCase::OffSlice));
    if d >= 3 {
        // A unit vector orthogonal to w̄ inside e_d^⊥.
        let mut u = vec![0.0; d];
        let i = (0..d - 1).min_by(|&a, &b| wb[a].abs().total_cmp(&wb[b].abs())).unwrap();
        u[i] = 1.0;
        let c = dot(&u, &wb);
        u = add(&u, &wb, -c);
        let nu = norm(&u);
        u.iter_mut().for_each(|v| *v /= nu);
        for (r, case) in [(5.0 * mu, SubgradCase::SliceCapQuadraticNear), (50.0 * mu, SubgradCase::SliceCapQuadraticFar)] {
            let a = 0.5 + 0.5 * mu / r;
            let b = (1.0 - a * a).sqrt();
            let z: Vec<f64> = (0..d).map(|k| r * (a * wb[k] + b * u[k])).collect();
            out.push((from_z(&z), case));
        }
    }
    out
}

/// `|f(x) − f(x')| ≤ ‖x − x'‖` on pairs in `B(0, 3)`. Pair distances are
/// log-uniform in `[1e−5, 1]` so rounding of `f` stays below the tolerance.
pub fn lipschitz_check(insts: &[HardInstance<f64>], pairs: usize, seed: u64) -> Check {
    let mut rng = stream(seed, Stream::Sampling, L_LIPSCHITZ << 32);
    let mut worst = 0.0f64;
    let mut done = 0u64;
    while (done as usize) < pairs {
        let inst = &insts[done as usize % insts.len()];
        let x = mixed_point(inst, &mut rng);
        let xp = add(&x, &unit(inst.d(), &mut rng), log_uniform(1e-5, 1.0, &mut rng));
        if norm(&x) > 3.0 || norm(&xp) > 3.0 {
            continue;
        }
        let dx = norm(&add(&x, &xp, -1.0));
        worst = worst.max((inst.eval_f(&x) - inst.eval_f(&xp)).abs() / dx);
        done += 1;
    }
    Check::at_most("lipschitz", "|f(x) - f(x')| <= |x - x'| on B(0, 3)", worst, 1.0, LIPSCHITZ_TOL, done)
}

pub fn nonnegativity_check(insts: &[HardInstance<f64>], points: usize, seed: u64) -> Check {
    let mut rng = stream(seed, Stream::Sampling, L_NONNEG << 32);
    let mut worst = f64::INFINITY;
    for j in 0..points {
        let inst = &insts[j % insts.len()];
        let x = if j % 5 == 4 { cone_point(inst, &mut rng) } else { mixed_point(inst, &mut rng) };
        worst = worst.min(inst.eval_f(&x));
    }
    Check::at_least("nonnegativity", "f >= 0", worst, 0.0, 0.0, points as u64)
}

/// Minimal subgradient norm wherever `f > 1e−6`: the global floor `c`, the
/// expected margin `1/50`, and the per-case constants.
pub fn stationarity_checks(insts: &[HardInstance<f64>], points: usize, seed: u64) -> Vec<Check> {
    let mut rng = stream(seed, Stream::Sampling, L_SWEEP << 32);
    let mut worst = f64::INFINITY;
    let mut per_case: Vec<(f64, u64)> = vec![(f64::INFINITY, 0); SubgradCase::ALL.len()];
    let mut misclassified = 0u64;
    let mut engineered = 0u64;
    let mut counted = 0u64;
    let mut record = |inst: &HardInstance<f64>, x: &[f64], worst: &mut f64, counted: &mut u64| -> Option<SubgradCase> {
        if !(inst.eval_f(x) > POSITIVE_VALUE) {
            return None;
        }
        let s = inst.subgrad_f(x);
        let n = norm(&s.min_norm());
        *worst = worst.min(n);
        let slot = &mut per_case[SubgradCase::ALL.iter().position(|&c| c == s.case).unwrap()];
        slot.0 = slot.0.min(n);
        slot.1 += 1;
        *counted += 1;
        Some(s.case)
    };
    for inst in insts {
        for (x, want) in engineered_points(inst) {
            engineered += 1;
            if record(inst, &x, &mut worst, &mut counted) != Some(want) {
                misclassified += 1;
            }
        }
    }
    let mut j = 0usize;
    let mut drawn = 0usize;
    while drawn < points {
        let inst = &insts[j % insts.len()];
        j += 1;
        let x = if j % 5 == 0 { cone_point(inst, &mut rng) } else { mixed_point(inst, &mut rng) };
        if record(inst, &x, &mut worst, &mut counted).is_some() {
            drawn += 1;
        }
    }
    let c = STATIONARITY_C;
    let mut out = vec![
        Check::at_least(
            "stationarity",
            "|min-norm subgradient| >= c = 1/100 wherever f > 1e-6",
            worst,
            c,
            0.0,
            counted,
        ),
        Check::at_least(
            "stationarity_margin",
            "|min-norm subgradient| >= 1/50 wherever f > 1e-6",
            worst,
            1.0 / 50.0,
            1e-12,
            counted,
        ),
        Check::at_most(
            "case_classification",
            "engineered slice points fall in the intended case",
            misclassified as f64,
            0.0,
            0.0,
            engineered,
        ),
    ];
    for (case, &(m, k)) in SubgradCase::ALL.iter().zip(&per_case) {
        if let Some(b) = case.norm_bound() {
            out.push(
                Check::at_least(
                    &format!("case_bound/{}", case.name()),
                    "|min-norm subgradient| >= case constant (must be exercised)",
                    if k == 0 { f64::NAN } else { m },
                    b,
                    1e-12,
                    k,
                )
                .and(k > 0),
            );
        }
    }
    out
}

/// Breakpoints of the embedded profile whose neighbours are at least
/// `spacing` away.
fn isolated_breakpoints(inst: &HardInstance<f64>, spacing: f64) -> Vec<f64> {
    let b = inst.base().hbar().table().breakpoints();
    (0..b.len())
        .filter(|&i| (i == 0 || b[i] - b[i - 1] >= spacing) && (i + 1 == b.len() || b[i + 1] - b[i] >= spacing))
        .map(|i| b[i])
        .collect()
}

/// One-sided difference quotients against the support function of the
/// returned subdifferential, at random points and at engineered kinks.
pub fn regularity_check(
    insts: &[HardInstance<f64>],
    random_points: usize,
    kink_points: usize,
    directions: usize,
    seed: u64,
) -> Check {
    let h = FD_STEP;
    let mut rng = stream(seed, Stream::Sampling, L_FD << 32);
    let mut worst = 0.0f64;
    let mut pts: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    for j in 0..random_points {
        let i = j % insts.len();
        pts.push((i, uniform_in_ball(insts[i].d(), 3.0, &mut rng), 0.0));
    }
    let mut missing_kind = false;
    for j in 0..kink_points {
        let i = j % insts.len();
        let inst = &insts[i];
        let d = inst.d();
        let bps = isolated_breakpoints(inst, 10.0 * h);
        let kind = j % 4;
        let x = match kind {
            0 => {
                let mut x = vec![0.0; d];
                x[d - 1] = rng.random_range(-0.5..1.5);
                x
            }
            1 | 2 => {
                // With x_{1:d−1} = 0, the breakpoint x*_d would put x at x*, where the
                // cap curves on the scale ‖w‖ rather than kinks; kind 3 covers x*_d.
                let pool: Vec<f64> = if kind == 1 {
                    bps.clone()
                } else {
                    bps.iter().copied().filter(|&b| b != inst.x_star()[d - 1]).collect()
                };
                missing_kind |= pool.is_empty();
                let mut x = if kind == 1 { uniform_in_ball(d, 1.0, &mut rng) } else { vec![0.0; d] };
                x[d - 1] = if pool.is_empty() { 0.5 } else { pool[rng.random_range(0..pool.len())] };
                x
            }
            _ => {
                missing_kind |= !bps.contains(&inst.x_star()[d - 1]);
                inst.max_kink_point()
            }
        };
        pts.push((i, x, if kind == 3 { 1e-12 } else { 0.0 }));
    }
    let total = pts.len() as u64;
    for (i, x, tol) in pts {
        let inst = &insts[i];
        let set = inst.subgrad_f_with(&x, tol);
        let fx = inst.eval_f(&x);
        for _ in 0..directions {
            let v = unit(inst.d(), &mut rng);
            let fd = (inst.eval_f(&add(&x, &v, h)) - fx) / h;
            let e = (fd - set.support(&v)).abs();
            worst = worst.max(e);
        }
    }
    Check::at_most(
        "regularity",
        "one-sided difference quotient matches max <g, v> over the subdifferential",
        worst,
        0.0,
        FD_TOL,
        total * directions as u64,
    )
    .and(!missing_kind)
}

/// Closed-form minimal-norm element against the general hull solver in the
/// plane, where every subdifferential is a polytope.
pub fn min_norm_crosscheck(insts: &[HardInstance<f64>], points: usize, seed: u64) -> Check {
    let planar: Vec<&HardInstance<f64>> = insts.iter().filter(|i| i.d() == 2).collect();
    if planar.is_empty() {
        return Check::at_most("min_norm_crosscheck", "no planar instances", f64::NAN, 0.0, 1e-10, 0).and(false);
    }
    let mut rng = stream(seed, Stream::Sampling, L_MINNORM << 32);
    let mut worst = 0.0f64;
    let mut count = 0u64;
    let mut check = |inst: &HardInstance<f64>, x: &[f64], tol: f64| {
        let s = inst.subgrad_f_with(x, tol);
        let a = s.min_norm();
        let b = s.min_norm_by_generators(1e-15).expect("planar sets are polytopes");
        worst = worst.max(norm(&add(&a, &b, -1.0)));
        count += 1;
    };
    for inst in &planar {
        for (x, _) in engineered_points(inst) {
            check(inst, &x, 0.0);
        }
        check(inst, &inst.max_kink_point(), 1e-12);
        for &b in inst.base().hbar().table().breakpoints() {
            check(inst, &[0.0, b], 0.0);
            check(inst, &[rng.random_range(-1.0..1.0), b], 0.0);
        }
    }
    for j in 0..points {
        let inst = planar[j % planar.len()];
        let x = mixed_point(inst, &mut rng);
        check(inst, &x, 0.0);
    }
    Check::at_most(
        "min_norm_crosscheck",
        "closed-form minimal-norm subgradient equals the hull solver's in d = 2",
        worst,
        0.0,
        1e-10,
        count,
    )
}

/// Where `q(x − x*) < 0` the instance is exactly `h`, values and subgradients.
pub fn cap_inactivity_check(insts: &[HardInstance<f64>], points: usize, seed: u64) -> Check {
    let mut rng = stream(seed, Stream::Sampling, L_INACTIVE << 32);
    let mut mismatches = 0u64;
    let mut inactive = 0u64;
    for j in 0..points {
        let inst = &insts[j % insts.len()];
        let x = mixed_point(inst, &mut rng);
        if inst.q(&inst.shifted(&x)) < 0.0 {
            inactive += 1;
            let same_value = inst.eval_f(&x) == inst.eval_h(&x);
            let same_grad = inst.min_norm_subgrad(&x) == inst.base().subgrad(&x).min_norm();
            if !(same_value && same_grad) {
                mismatches += 1;
            }
        }
    }
    Check::at_most(
        "cap_inactivity",
        "f = h with identical subgradients wherever q < 0",
        mismatches as f64,
        0.0,
        0.0,
        inactive,
    )
    .and(inactive > 0)
}

/// Every invariant on fresh instances.
pub fn invariant_suite(params: &SuiteParams) -> Result<CertificateReport> {
    let mut report = CertificateReport::default();
    let seed = params.seed;
    report.push(schedule_bounds::<f64>(params.schedule_levels));
    report.push(schedule_bounds::<Quad>(params.schedule_levels));
    report.extend(interval_checks(params.interval_depth));
    report.extend(separation_checks(4, 5, 256.0, params.separation_samples, seed));
    report.extend(profile_checks_mixed(
        &params.profile_depths,
        params.profiles_per_depth,
        params.points / 10,
        seed,
        params.mutate,
    )?);

    let mut insts = instances(&params.dims, &params.rhos, params.n_instances, params.depth, seed)?;
    if params.mutate {
        for inst in &mut insts {
            inject_slope_fault(inst.base_mut().hbar_mut().table_mut());
        }
    }
    report.push(lipschitz_check(&insts, params.points, seed));
    report.push(nonnegativity_check(&insts, params.points, seed));
    report.extend(stationarity_checks(&insts, params.points, seed));
    report.push(min_norm_crosscheck(&insts, params.points / 10, seed));
    report.push(cap_inactivity_check(&insts, params.points, seed));

    let fd_insts = instances(&params.dims, &params.rhos, 1, params.fd_depth.min(params.depth), seed ^ 0x5bd1)?;
    report.push(regularity_check(&fd_insts, params.fd_random, params.fd_kinks, params.fd_directions, seed));
    Ok(report)
}
