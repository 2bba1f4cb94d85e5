//! The random one-dimensional hard function `r^N_σ` and its shift `h̄`.
//!
//! Two representations are kept side by side. The piece table lists all
//! `2N + 4` affine pieces in absolute coordinates and carries the structural
//! checks (continuity, slope monotonicity, slope bounds). The descent
//! evaluator walks down the interval nest in local coordinates, so deep levels
//! lose no precision to cancellation.

use std::io::Write;

use serde::Serialize;

use crate::error::{HardError, Result};
use crate::intervals::{phi, BitString, Interval};
use crate::scalar::Real;
use crate::schedule::AngleSchedule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece<S> {
    /// Point where `value` is attained: the left endpoint, except for the
    /// left tail which is anchored at its right endpoint.
    pub anchor: S,
    pub value: S,
    pub slope: S,
}

impl<S: Real> Piece<S> {
    #[inline]
    pub fn at(&self, x: S) -> S {
        self.value + self.slope * (x - self.anchor)
    }
}

/// `[lo_slope, hi_slope]`, the subdifferential of a convex function on the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubgradientInterval<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Real> SubgradientInterval<S> {
    pub fn singleton(s: S) -> Self {
        SubgradientInterval { lo: s, hi: s }
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= S::zero() && self.hi >= S::zero()
    }

    pub fn min_norm(&self) -> S {
        S::zero().max(self.lo).min(self.hi)
    }

    pub fn scaled(&self, a: S) -> Self {
        SubgradientInterval { lo: self.lo * a, hi: self.hi * a }
    }
}

/// Continuous piecewise-affine function with two affine tails.
#[derive(Debug, Clone)]
pub struct PiecewiseAffine1D<S> {
    breakpoints: Vec<S>,
    pieces: Vec<Piece<S>>,
}

impl<S: Real> PiecewiseAffine1D<S> {
    /// `pieces[0]` is the left tail, `pieces[j]` spans
    /// `[breakpoints[j-1], breakpoints[j]]`, the last piece is the right tail.
    pub fn new(breakpoints: Vec<S>, pieces: Vec<Piece<S>>) -> Self {
        assert_eq!(pieces.len(), breakpoints.len() + 1, "one piece per gap plus two tails");
        PiecewiseAffine1D { breakpoints, pieces }
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece<S>] {
        &self.pieces
    }

    pub fn slopes(&self) -> Vec<S> {
        self.pieces.iter().map(|p| p.slope).collect()
    }

    fn piece_index(&self, x: S) -> usize {
        self.breakpoints.partition_point(|&b| b <= x)
    }

    pub fn eval(&self, x: S) -> S {
        self.pieces[self.piece_index(x)].at(x)
    }

    /// Two-sided slope interval; a singleton off the breakpoints.
    pub fn subdiff(&self, x: S) -> SubgradientInterval<S> {
        let j = self.piece_index(x);
        if j > 0 && self.breakpoints[j - 1] == x {
            SubgradientInterval { lo: self.pieces[j - 1].slope, hi: self.pieces[j].slope }
        } else {
            SubgradientInterval::singleton(self.pieces[j].slope)
        }
    }

    /// Largest relative mismatch between neighbouring pieces at a breakpoint.
    pub fn continuity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (j, &b) in self.breakpoints.iter().enumerate() {
            let left = self.pieces[j].at(b).to_f64().unwrap();
            let right = self.pieces[j + 1].at(b).to_f64().unwrap();
            worst = worst.max((left - right).abs() / left.abs().max(right.abs()).max(1.0));
        }
        worst
    }

    /// Smallest step between consecutive raw slopes (negative means a drop).
    pub fn min_slope_step(&self) -> f64 {
        self.pieces
            .windows(2)
            .map(|w| (w[1].slope - w[0].slope).to_f64().unwrap())
            .fold(f64::INFINITY, f64::min)
    }

    /// Slopes of the maximal affine pieces: neighbours whose slopes differ by
    /// at most `tol` lie on one line and are merged.
    pub fn merged_slopes(&self, tol: f64) -> Vec<S> {
        let mut out: Vec<S> = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            match out.last() {
                Some(&s) if (p.slope - s).abs().to_f64().unwrap() <= tol => {}
                _ => out.push(p.slope),
            }
        }
        out
    }

    /// `(min |slope|, max |slope|)` over all pieces, tails included.
    pub fn slope_range(&self) -> (S, S) {
        let mut lo = S::infinity();
        let mut hi = S::zero();
        for p in &self.pieces {
            lo = lo.min(p.slope.abs());
            hi = hi.max(p.slope.abs());
        }
        (lo, hi)
    }

    /// `a·p(x) + b`.
    pub fn scaled(&self, a: S, b: S) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| Piece { anchor: p.anchor, value: a * p.value + b, slope: a * p.slope })
            .collect();
        PiecewiseAffine1D { breakpoints: self.breakpoints.clone(), pieces }
    }

    /// Adds `amount` to the slope of piece `j`, keeping its anchor value.
    /// Used by fault-injection tests.
    pub fn perturb_slope(&mut self, j: usize, amount: S) {
        self.pieces[j].slope = self.pieces[j].slope + amount;
    }

    /// Breakpoint of smallest value, with that value.
    pub fn min_breakpoint(&self) -> (S, S) {
        let mut best = (self.breakpoints[0], self.eval(self.breakpoints[0]));
        for &b in &self.breakpoints[1..] {
            let v = self.eval(b);
            if v < best.1 {
                best = (b, v);
            }
        }
        best
    }

    /// CSV rows `x,value,lo_slope,hi_slope` on a uniform grid over `[a, b]`
    /// merged with the breakpoints inside it.
    pub fn write_profile<W: Write>(&self, out: W, a: S, b: S, n: usize) -> Result<()> {
        let mut xs: Vec<S> = (0..n)
            .map(|i| a + (b - a) * S::lit(i as f64) / S::lit((n.max(2) - 1) as f64))
            .collect();
        xs.extend(self.breakpoints.iter().copied().filter(|&x| x >= a && x <= b));
        xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        xs.dedup();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value", "lo_slope", "hi_slope"])?;
        for x in xs {
            let g = self.subdiff(x);
            w.write_record([
                fmt_num(x),
                fmt_num(self.eval(x)),
                fmt_num(g.lo),
                fmt_num(g.hi),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip decimal for the double nearest to `x`.
pub fn fmt_num<S: Real>(x: S) -> String {
    format!("{:?}", x.to_f64().unwrap())
}

/// Per-level data of the construction: contraction, mid-value and the two
/// branch slopes of `g^{(i)}_{σ_i}`.
#[derive(Debug, Clone, Copy)]
struct Level<S> {
    delta: S,
    epsilon: S,
    bit: u8,
    /// Left end of the excluded open image `phi^{(i)}_{σ_i}(0, 1)`.
    hole_lo: S,
    hole_hi: S,
    left_slope: S,
    right_slope: S,
}

impl<S: Real> Level<S> {
    fn new(delta: S, epsilon: S, bit: u8) -> Self {
        let half = S::lit(0.5);
        let two = S::lit(2.0);
        let one_minus = S::one() - epsilon;
        let (left_slope, right_slope) = if bit == 1 {
            (-one_minus / (half + delta), one_minus / (half - two * delta))
        } else {
            (-one_minus / (half - two * delta), one_minus / (half + delta))
        };
        let (hole_lo, hole_hi) = phi(delta, bit).image();
        Level { delta, epsilon, bit, hole_lo, hole_hi, left_slope, right_slope }
    }

    /// `g^{(i)}_{σ_i}(u)` for `u ∈ [0, 1]` outside the hole. Both branches are
    /// anchored where they are known exactly: `g(0) = 1` and `g(hole_hi) = ε`.
    #[inline]
    fn g(&self, u: S) -> S {
        if u <= self.hole_lo {
            S::one() + self.left_slope * u
        } else {
            self.epsilon + self.right_slope * (u - self.hole_hi)
        }
    }
}

/// `r^N_σ`, optionally post-composed with `y ↦ scale·y + offset`.
#[derive(Debug, Clone)]
pub struct HardProfile<S> {
    sigma: BitString,
    levels: Vec<Level<S>>,
    /// `inf I_{σ1…σi}` and `∏_{j≤i} δ_j` for `i = 0..=N`.
    chain_lo: Vec<S>,
    chain_width: Vec<S>,
    /// `Φ^{(1)}∘…∘Φ^{(i)}(0)`; the slope of that composition is `chain_width[i]`.
    outer_offset: Vec<S>,
    mid_cot: S,
    x_mid: S,
    scale: S,
    offset: S,
    table: PiecewiseAffine1D<S>,
}

impl<S: Real> HardProfile<S> {
    /// Builds `r^N_σ` with `N = len(sigma)`.
    pub fn r(schedule: &AngleSchedule<S>, sigma: &BitString) -> Result<Self> {
        let n = sigma.len();
        if n == 0 {
            return Err(HardError::EmptyBits);
        }
        let cap = S::depth_cap();
        if n > cap {
            return Err(HardError::DepthCap { depth: n, cap, precision: S::PRECISION });
        }
        let levels: Vec<Level<S>> = (1..=n)
            .map(|i| {
                let e = schedule.entry_unchecked(i);
                Level::new(e.delta, e.epsilon, sigma.bit(i))
            })
            .collect();
        let mut chain_lo = vec![S::zero()];
        let mut chain_width = vec![S::one()];
        let mut outer_offset = vec![S::zero()];
        for (i, lv) in levels.iter().enumerate() {
            let (lo, p, a) = (chain_lo[i], chain_width[i], outer_offset[i]);
            chain_lo.push(lo + p * lv.hole_lo);
            chain_width.push(p * lv.delta);
            outer_offset.push(a + p * (lv.epsilon - lv.delta));
        }
        let mid_cot = schedule.cot_base_unchecked(n + 1);
        let x_mid = chain_lo[n] + chain_width[n] * S::lit(0.5);
        let mut profile = HardProfile {
            sigma: sigma.clone(),
            levels,
            chain_lo,
            chain_width,
            outer_offset,
            mid_cot,
            x_mid,
            scale: S::one(),
            offset: S::zero(),
            table: PiecewiseAffine1D { breakpoints: Vec::new(), pieces: Vec::new() },
        };
        profile.table = profile.build_table();
        Ok(profile)
    }

    /// `h̄ = r + 2 − r(x_mid)`.
    pub fn hbar(schedule: &AngleSchedule<S>, sigma: &BitString) -> Result<Self> {
        let r = Self::r(schedule, sigma)?;
        let shift = S::lit(2.0) - r.value_at_mid();
        Ok(r.transformed(S::one(), shift))
    }

    /// Post-composes with `y ↦ a·y + b`.
    pub fn transformed(&self, a: S, b: S) -> Self {
        let mut out = self.clone();
        out.scale = a * self.scale;
        out.offset = a * self.offset + b;
        out.table = self.table.scaled(a, b);
        out
    }

    pub fn sigma(&self) -> &BitString {
        &self.sigma
    }

    pub fn depth(&self) -> usize {
        self.sigma.len()
    }

    pub fn x_mid(&self) -> S {
        self.x_mid
    }

    pub fn table(&self) -> &PiecewiseAffine1D<S> {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut PiecewiseAffine1D<S> {
        &mut self.table
    }

    pub fn scale(&self) -> S {
        self.scale
    }

    /// `I_{σ1…σi}` for `i = 0..=N`.
    pub fn interval(&self, i: usize) -> Interval<S> {
        Interval { lo: self.chain_lo[i], hi: self.chain_lo[i] + self.chain_width[i] }
    }

    /// `cot(θ^{(N+1)}_base)`, the magnitude of the two middle slopes of `r`.
    pub fn mid_cot(&self) -> S {
        self.mid_cot
    }

    #[inline]
    fn outer(&self, i: usize, y: S) -> S {
        self.outer_offset[i] + self.chain_width[i] * y
    }

    /// `r(x_mid)` from the closed form, before the post-transform.
    fn raw_value_at_mid(&self) -> S {
        let n = self.depth();
        self.outer(n, S::one() - self.mid_cot * S::lit(0.5))
    }

    pub fn value_at_mid(&self) -> S {
        self.scale * self.raw_value_at_mid() + self.offset
    }

    fn build_table(&self) -> PiecewiseAffine1D<S> {
        let n = self.depth();
        let mut bps = Vec::with_capacity(2 * n + 3);
        let mut pieces = Vec::with_capacity(2 * n + 4);
        pieces.push(Piece { anchor: S::zero(), value: S::one(), slope: -S::one() });
        for i in 0..n {
            let x = self.chain_lo[i];
            bps.push(x);
            pieces.push(Piece { anchor: x, value: self.outer(i, S::one()), slope: self.levels[i].left_slope });
        }
        bps.push(self.chain_lo[n]);
        pieces.push(Piece { anchor: self.chain_lo[n], value: self.outer(n, S::one()), slope: -self.mid_cot });
        bps.push(self.x_mid);
        pieces.push(Piece { anchor: self.x_mid, value: self.raw_value_at_mid(), slope: self.mid_cot });
        for i in (0..n).rev() {
            let x = self.chain_lo[i + 1] + self.chain_width[i + 1];
            bps.push(x);
            pieces.push(Piece { anchor: x, value: self.outer(i + 1, S::one()), slope: self.levels[i].right_slope });
        }
        bps.push(S::one());
        pieces.push(Piece { anchor: S::one(), value: S::one(), slope: S::one() });
        PiecewiseAffine1D::new(bps, pieces).scaled(self.scale, self.offset)
    }

    /// Recursive-descent evaluation: the deepest level whose hole contains the
    /// local coordinate decides the branch.
    pub fn eval(&self, x: S) -> S {
        self.scale * self.eval_raw(x) + self.offset
    }

    fn eval_raw(&self, x: S) -> S {
        if x < S::zero() {
            return S::one() - x;
        }
        if x > S::one() {
            return x;
        }
        let mut u = x;
        for (i, lv) in self.levels.iter().enumerate() {
            if u > lv.hole_lo && u < lv.hole_hi {
                u = (u - lv.hole_lo) / lv.delta;
            } else {
                return self.outer(i, lv.g(u));
            }
        }
        let n = self.depth();
        self.outer(n, S::one() - self.mid_cot * u.min(S::one() - u))
    }

    /// Depth reached by the descent, i.e. the largest `l` with `x ∈ I_{σ1…σl}`.
    pub fn locate(&self, x: S) -> usize {
        let mut u = x;
        for (i, lv) in self.levels.iter().enumerate() {
            if u > lv.hole_lo && u < lv.hole_hi {
                u = (u - lv.hole_lo) / lv.delta;
            } else {
                return i;
            }
        }
        self.depth()
    }

    pub fn subdiff(&self, x: S) -> SubgradientInterval<S> {
        self.table.subdiff(x)
    }

    /// Total number of affine pieces of the table.
    pub fn piece_count(&self) -> usize {
        self.table.pieces.len()
    }

    #[doc(hidden)]
    pub fn level_bits(&self) -> Vec<u8> {
        self.levels.iter().map(|l| l.bit).collect()
    }
}

/// Piece table of `r^N_σ`.
pub fn build_r<S: Real>(sigma: &BitString) -> Result<PiecewiseAffine1D<S>> {
    Ok(HardProfile::r(&AngleSchedule::new(), sigma)?.table)
}

/// `r^N_σ(x)` by recursive descent.
pub fn eval_r<S: Real>(sigma: &BitString, x: S) -> Result<S> {
    Ok(HardProfile::r(&AngleSchedule::new(), sigma)?.eval(x))
}

pub fn subdiff_r<S: Real>(sigma: &BitString, x: S) -> Result<SubgradientInterval<S>> {
    Ok(HardProfile::r(&AngleSchedule::new(), sigma)?.subdiff(x))
}

/// Piece table of `h̄` and its minimizer `x_mid`.
pub fn build_hbar<S: Real>(sigma: &BitString) -> Result<(PiecewiseAffine1D<S>, S)> {
    let h = HardProfile::hbar(&AngleSchedule::new(), sigma)?;
    Ok((h.table, h.x_mid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LogBase {
    Two,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleMode {
    /// `ρ = exp(−256T²/γ²)`, with `k` read off in the given log base.
    Theory { gamma: f64, base: LogBase },
    /// Parameters chosen by hand for experiments at small scale.
    Desk { k: usize, rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleParams {
    /// `ln(1/ρ)`.
    pub ln_inv_rho: f64,
    pub log2_inv_rho: f64,
    pub k: usize,
    pub n: usize,
}

impl ScheduleParams {
    /// `ρ` itself; underflows to zero in theory mode for any sizeable `T/γ`.
    pub fn rho(&self) -> f64 {
        (-self.ln_inv_rho).exp()
    }
}

pub fn schedule_params(t: usize, mode: ScheduleMode) -> Result<ScheduleParams> {
    if t == 0 {
        return Err(HardError::NonPositive { name: "T", value: 0.0 });
    }
    match mode {
        ScheduleMode::Theory { gamma, base } => {
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(HardError::OutOfRange { name: "gamma", range: "(0, 1]", value: gamma });
            }
            let tf = t as f64;
            let ln_inv_rho = 256.0 * tf * tf / (gamma * gamma);
            let log2_inv_rho = ln_inv_rho / std::f64::consts::LN_2;
            let k = match base {
                LogBase::Two => crate::intervals::separation_depth(log2_inv_rho)?,
                LogBase::Natural => crate::intervals::separation_depth(ln_inv_rho)?,
            };
            Ok(ScheduleParams { ln_inv_rho, log2_inv_rho, k, n: k + 1 })
        }
        ScheduleMode::Desk { k, rho } => {
            if k == 0 {
                return Err(HardError::NonPositive { name: "k", value: 0.0 });
            }
            if !(rho > 0.0 && rho < 1.0) {
                return Err(HardError::OutOfRange { name: "rho", range: "(0, 1)", value: rho });
            }
            let ln_inv_rho = -rho.ln();
            Ok(ScheduleParams { ln_inv_rho, log2_inv_rho: -rho.log2(), k, n: k + 1 })
        }
    }
}
