//! Angle schedule driving every contraction factor of the construction.
//!
//! The base angle starts at `arctan(1)` and climbs toward `arctan(8)` by halving
//! shifts. Each level `i` gets a contraction factor `delta(i) ∈ (0, 7/32]` and a
//! mid-value `epsilon(i) ∈ [1/2, 1)`; the slopes of the hard function are
//! `±cot(theta_base(i))`, hence bounded in `[1/8, 1]`.

use crate::error::{HardError, Result};
use crate::scalar::Real;

/// Entries stored eagerly. Beyond this index the recursion is re-evaluated on
/// demand; at double precision the values no longer move.
pub const TABLE_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEntry<S> {
    pub theta_base: S,
    pub theta_shift: S,
    pub delta: S,
    pub epsilon: S,
}

/// Precomputed schedule. Immutable after construction, so it can be shared
/// across threads freely.
#[derive(Debug, Clone)]
pub struct AngleSchedule<S> {
    table: Vec<ScheduleEntry<S>>,
    span: S,
}

impl<S: Real> Default for AngleSchedule<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Real> AngleSchedule<S> {
    pub fn new() -> Self {
        let one = S::one();
        let start = one.atan();
        let span = S::lit(8.0).atan() - start;
        let mut table = Vec::with_capacity(TABLE_LEN);
        let mut base = start;
        for i in 1..=TABLE_LEN {
            let entry = Self::make_entry(base, span, i);
            base = entry.theta_base + entry.theta_shift;
            table.push(entry);
        }
        AngleSchedule { table, span }
    }

    fn make_entry(base: S, span: S, i: usize) -> ScheduleEntry<S> {
        let shift = span / S::lit(2.0).powi(i as i32);
        let next = base + shift;
        let tan_base = base.tan_accurate();
        let tan_next = next.tan_accurate();
        // tan(b + s) - tan(b) = sin(s) / (cos(b + s) cos(b)), free of cancellation.
        let tan_gap = shift.sin() / (next.cos() * base.cos());
        let denom = S::lit(2.0) * tan_next + tan_base;
        ScheduleEntry {
            theta_base: base,
            theta_shift: shift,
            delta: S::lit(0.5) * tan_gap / denom,
            epsilon: S::one() - S::lit(1.5) / denom,
        }
    }

    /// Full entry for level `i ≥ 1`.
    pub fn entry(&self, i: usize) -> Result<ScheduleEntry<S>> {
        if i == 0 {
            return Err(HardError::ScheduleIndex(i));
        }
        Ok(self.entry_unchecked(i))
    }

    pub(crate) fn entry_unchecked(&self, i: usize) -> ScheduleEntry<S> {
        assert!(i >= 1, "schedule index starts at 1");
        if i <= self.table.len() {
            return self.table[i - 1];
        }
        let last = self.table[self.table.len() - 1];
        let mut base = last.theta_base + last.theta_shift;
        for j in self.table.len() + 1..i {
            base = base + self.span / S::lit(2.0).powi(j as i32);
        }
        Self::make_entry(base, self.span, i)
    }

    /// `(theta_base(i), theta_shift(i))`.
    pub fn theta(&self, i: usize) -> Result<(S, S)> {
        self.entry(i).map(|e| (e.theta_base, e.theta_shift))
    }

    pub fn delta(&self, i: usize) -> Result<S> {
        self.entry(i).map(|e| e.delta)
    }

    pub fn epsilon(&self, i: usize) -> Result<S> {
        self.entry(i).map(|e| e.epsilon)
    }

    pub(crate) fn delta_unchecked(&self, i: usize) -> S {
        self.entry_unchecked(i).delta
    }

    /// `cot(theta_base(i))`, the magnitude of the level-`i` slopes.
    pub fn cot_base(&self, i: usize) -> Result<S> {
        self.entry(i).map(|e| e.theta_base.tan_accurate().recip())
    }

    pub(crate) fn cot_base_unchecked(&self, i: usize) -> S {
        let b = self.entry_unchecked(i).theta_base;
        b.cos() / b.sin()
    }

    /// Limit of the base angle, `arctan(8)`.
    pub fn theta_limit(&self) -> S {
        S::lit(8.0).atan()
    }
}
