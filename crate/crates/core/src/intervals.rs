//! Affine contractions `phi`, the nested open intervals they generate, and
//! point location within the nest.
//!
//! Everything here only needs field arithmetic, so it runs on floats and on
//! exact rationals alike. The contraction factors come from a [`Contraction`]
//! source: the angle schedule for floats, or a frozen rational table.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HardError, Result};
use crate::scalar::{Field, Real};
use crate::schedule::AngleSchedule;

/// Supplies the contraction factor of level `i ≥ 1`.
pub trait Contraction<F> {
    fn delta(&self, i: usize) -> F;
}

impl<S: Real> Contraction<S> for AngleSchedule<S> {
    fn delta(&self, i: usize) -> S {
        self.delta_unchecked(i)
    }
}

/// Rational images of a float schedule's factors. Interval combinatorics on
/// this table are exact statements about the floats the construction uses.
#[derive(Debug, Clone)]
pub struct ExactDeltas {
    table: Vec<BigRational>,
}

impl ExactDeltas {
    pub fn from_schedule<S: Real>(schedule: &AngleSchedule<S>, depth: usize) -> Self {
        let table = (1..=depth)
            .map(|i| schedule.delta_unchecked(i).to_rational())
            .collect();
        ExactDeltas { table }
    }

    pub fn depth(&self) -> usize {
        self.table.len()
    }
}

impl Contraction<BigRational> for ExactDeltas {
    fn delta(&self, i: usize) -> BigRational {
        self.table[i - 1].clone()
    }
}

/// `x ↦ slope·x + intercept` on the closed domain `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap<F> {
    pub slope: F,
    pub intercept: F,
    pub domain: (F, F),
}

impl<F: Field> AffineMap<F> {
    pub fn identity() -> Self {
        AffineMap {
            slope: F::one(),
            intercept: F::zero(),
            domain: (F::zero(), F::one()),
        }
    }

    pub fn apply(&self, x: &F) -> F {
        self.slope.clone() * x.clone() + self.intercept.clone()
    }

    pub fn invert(&self, y: &F) -> F {
        (y.clone() - self.intercept.clone()) / self.slope.clone()
    }

    /// `self ∘ inner`, keeping the inner domain.
    pub fn compose(&self, inner: &AffineMap<F>) -> AffineMap<F> {
        AffineMap {
            slope: self.slope.clone() * inner.slope.clone(),
            intercept: self.apply(&inner.intercept),
            domain: inner.domain.clone(),
        }
    }

    /// Image of the domain (slopes are positive for every map built here).
    pub fn image(&self) -> (F, F) {
        (self.apply(&self.domain.0), self.apply(&self.domain.1))
    }
}

/// A word over `{0, 1}`; prefixes index the nested intervals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(HardError::BitChar(char::from_digit(b as u32, 10).unwrap_or('?')));
        }
        Ok(BitString { bits })
    }

    pub fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        BitString {
            bits: (0..len).map(|_| rng.random_range(0..2u8)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Bit `i` in 1-based indexing.
    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i - 1]
    }

    pub fn prefix(&self, k: usize) -> BitString {
        BitString {
            bits: self.bits[..k].to_vec(),
        }
    }

    /// All words of length `k`, in lexicographic order.
    pub fn all(k: usize) -> impl Iterator<Item = BitString> {
        (0..1u64 << k).map(move |m| BitString {
            bits: (0..k).rev().map(|j| ((m >> j) & 1) as u8).collect(),
        })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = HardError;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(HardError::BitChar(other)),
            })
            .collect::<Result<Vec<u8>>>()?;
        if bits.is_empty() {
            return Err(HardError::EmptyBits);
        }
        Ok(BitString { bits })
    }
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval<F> {
    pub lo: F,
    pub hi: F,
}

impl<F: Field> Interval<F> {
    pub fn contains(&self, x: &F) -> bool {
        *x > self.lo && *x < self.hi
    }

    pub fn width(&self) -> F {
        self.hi.clone() - self.lo.clone()
    }

    /// Smallest gap between the closure of `self` and the complement of
    /// `outer`; positive iff `self` sits strictly inside `outer`.
    pub fn inset_in(&self, outer: &Interval<F>) -> F {
        let left = self.lo.clone() - outer.lo.clone();
        let right = outer.hi.clone() - self.hi.clone();
        if left < right {
            left
        } else {
            right
        }
    }

    /// Signed gap between two intervals; positive iff their closures are disjoint.
    pub fn gap(&self, other: &Interval<F>) -> F {
        if self.lo < other.lo {
            other.lo.clone() - self.hi.clone()
        } else {
            self.lo.clone() - other.hi.clone()
        }
    }
}

/// `phi^{(i)}_bit`: `δx + ½ − 2δ` for bit 0, `δx + ½ + δ` for bit 1.
pub fn phi<F: Field>(delta: F, bit: u8) -> AffineMap<F> {
    let half = F::half();
    let intercept = if bit == 0 {
        half - F::two() * delta.clone()
    } else {
        half + delta.clone()
    };
    AffineMap {
        slope: delta,
        intercept,
        domain: (F::zero(), F::one()),
    }
}

/// `phi^{(1)}_{b1} ∘ … ∘ phi^{(k)}_{bk}` for the given prefix bits.
pub fn chain<F: Field, C: Contraction<F> + ?Sized>(source: &C, bits: &[u8]) -> AffineMap<F> {
    let mut map = AffineMap::identity();
    for (j, &b) in bits.iter().enumerate() {
        map = map.compose(&phi(source.delta(j + 1), b));
    }
    map
}

/// `I_{b1…bk}`, the chain image of `(0, 1)`.
pub fn interval<F: Field, C: Contraction<F> + ?Sized>(source: &C, bits: &[u8]) -> Interval<F> {
    let (lo, hi) = chain(source, bits).image();
    Interval { lo, hi }
}

/// Largest `l ≤ len(sigma)` with `x` strictly inside `I_{σ1…σl}`.
pub fn locate<F: Field, C: Contraction<F> + ?Sized>(source: &C, x: &F, sigma: &BitString) -> usize {
    let mut map = AffineMap::identity();
    let mut depth = 0;
    for (j, &b) in sigma.bits().iter().enumerate() {
        map = map.compose(&phi(source.delta(j + 1), b));
        let (lo, hi) = map.image();
        if !(Interval { lo, hi }).contains(x) {
            break;
        }
        depth = j + 1;
    }
    depth
}

/// `k = floor(¼·√L)` clamped to at least 1, where `L = log₂(1/ρ)`.
pub fn separation_depth(log2_inv_rho: f64) -> Result<usize> {
    if !(log2_inv_rho > 0.0) || !log2_inv_rho.is_finite() {
        return Err(HardError::NonPositive {
            name: "log2(1/rho)",
            value: log2_inv_rho,
        });
    }
    Ok(((0.25 * log2_inv_rho.sqrt()).floor() as usize).max(1))
}

/// Gaps between the depth-`k` and depth-`n` intervals of `sigma`, in natural log.
///
/// Both gaps factor as `∏_{j≤k} δ_j` times a local quantity in `(0, 1)`, so
/// they are computed without forming the (possibly tiny) absolute difference.
pub fn separation_log_gaps<S: Real>(
    schedule: &AngleSchedule<S>,
    sigma: &BitString,
    k: usize,
    n: usize,
) -> (f64, f64) {
    let bits = sigma.bits();
    let outer = chain(schedule, &bits[..k]);
    let inner = {
        let mut map = AffineMap::identity();
        for j in k..n {
            map = map.compose(&phi(schedule.delta_unchecked(j + 1), bits[j]));
        }
        map
    };
    let (lo, hi) = inner.image();
    let log_width = outer.slope.to_f64().unwrap().ln();
    let left = log_width + lo.to_f64().unwrap().ln();
    let right = log_width + (S::one() - hi).to_f64().unwrap().ln();
    (left, right)
}

/// Whether both separation gaps exceed `ρ = 2^{−log2_inv_rho}`.
pub fn separation_holds<S: Real>(
    schedule: &AngleSchedule<S>,
    sigma: &BitString,
    k: usize,
    n: usize,
    log2_inv_rho: f64,
) -> bool {
    let (left, right) = separation_log_gaps(schedule, sigma, k, n);
    let log_rho = -log2_inv_rho * std::f64::consts::LN_2;
    left > log_rho && right > log_rho
}
