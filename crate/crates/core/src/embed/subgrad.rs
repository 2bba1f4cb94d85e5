use serde::Serialize;

use super::minnorm::{dot, min_norm_point, norm};
use crate::hard1d::SubgradientInterval;
use crate::scalar::Real;

/// Region of the case analysis a point falls into, with `y = x − x*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgradCase {
    /// `h − σ_μ(q(y)) < 0`; `f` vanishes near the point.
    FloorRegion,
    /// `h − σ_μ(q(y)) = 0`, the kink of `max{·, 0}`.
    MaxKink,
    /// `y = 0`.
    AtMinimizer,
    /// `y = −w`, the apex of the cap.
    CapApex,
    /// `y_d ≠ 0`.
    OffSlice,
    /// `y_d = 0`, `⟨w̄, (y+w)/‖y+w‖⟩ < ½`.
    SliceCapInactive,
    /// `y_d = 0`, `q(y) > μ`.
    SliceCapLinear,
    /// `y_d = 0`, `q(y) ∈ [0, μ]`, `‖y + w‖ ≤ 10μ`.
    SliceCapQuadraticNear,
    /// `y_d = 0`, `q(y) ∈ [0, μ]`, `‖y + w‖ > 10μ`.
    SliceCapQuadraticFar,
    /// Subdifferential of the cap-free function `h`.
    CapFree,
}

impl SubgradCase {
    pub const ALL: [SubgradCase; 10] = [
        SubgradCase::FloorRegion,
        SubgradCase::MaxKink,
        SubgradCase::AtMinimizer,
        SubgradCase::CapApex,
        SubgradCase::OffSlice,
        SubgradCase::SliceCapInactive,
        SubgradCase::SliceCapLinear,
        SubgradCase::SliceCapQuadraticNear,
        SubgradCase::SliceCapQuadraticFar,
        SubgradCase::CapFree,
    ];

    /// Lower bound on the minimal subgradient norm wherever `f > 0`.
    pub fn norm_bound(self) -> Option<f64> {
        match self {
            SubgradCase::AtMinimizer | SubgradCase::SliceCapLinear => Some(3.0 / 32.0),
            SubgradCase::CapApex | SubgradCase::SliceCapInactive => Some(1.0 / 32.0),
            SubgradCase::OffSlice => Some(1.0 / 16.0),
            SubgradCase::SliceCapQuadraticNear => Some(1.0 / 33.0),
            SubgradCase::SliceCapQuadraticFar => Some((1.0f64 / 2048f64.sqrt()).min(1.0 / 50.0)),
            SubgradCase::FloorRegion | SubgradCase::MaxKink | SubgradCase::CapFree => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SubgradCase::FloorRegion => "floor_region",
            SubgradCase::MaxKink => "max_kink",
            SubgradCase::AtMinimizer => "at_minimizer",
            SubgradCase::CapApex => "cap_apex",
            SubgradCase::OffSlice => "off_slice",
            SubgradCase::SliceCapInactive => "slice_cap_inactive",
            SubgradCase::SliceCapLinear => "slice_cap_linear",
            SubgradCase::SliceCapQuadraticNear => "slice_cap_quadratic_near",
            SubgradCase::SliceCapQuadraticFar => "slice_cap_quadratic_far",
            SubgradCase::CapFree => "cap_free",
        }
    }
}

/// Clarke subdifferential of the instance at one point:
///
/// `{ center + u + λ e_d : u ⊥ e_d, ‖u‖ ≤ ball_radius, λ ∈ [lambda.lo, lambda.hi] }`,
/// replaced by its convex hull with the origin when `hull_with_zero` is set.
///
/// For `d ≥ 3` a non-degenerate ball has no finite generating set, so the
/// minimal-norm element and the support function are computed in closed form;
/// [`SubgradientSet::generators`] is available whenever the set is a polytope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgradientSet<S> {
    pub case: SubgradCase,
    pub center: Vec<S>,
    pub ball_radius: S,
    pub lambda: SubgradientInterval<S>,
    pub hull_with_zero: bool,
}

impl<S: Real> SubgradientSet<S> {
    pub fn singleton(case: SubgradCase, g: Vec<S>) -> Self {
        SubgradientSet {
            case,
            center: g,
            ball_radius: S::zero(),
            lambda: SubgradientInterval::singleton(S::zero()),
            hull_with_zero: false,
        }
    }

    pub fn zero(case: SubgradCase, d: usize) -> Self {
        Self::singleton(case, vec![S::zero(); d])
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn is_singleton(&self) -> bool {
        !self.hull_with_zero
            && self.ball_radius == S::zero()
            && self.lambda.lo == self.lambda.hi
    }

    /// Minimal-norm element of the set without the hull with the origin.
    fn min_norm_core(&self) -> Vec<S> {
        let d = self.dim();
        let mut out = self.center.clone();
        let perp = norm(&self.center[..d - 1]);
        let shrink = if perp > self.ball_radius {
            S::one() - self.ball_radius / perp
        } else {
            S::zero()
        };
        for v in out[..d - 1].iter_mut() {
            *v = *v * shrink;
        }
        let vd = self.center[d - 1];
        let lam = (-vd).max(self.lambda.lo).min(self.lambda.hi);
        out[d - 1] = vd + lam;
        out
    }

    /// The unique minimal-norm element.
    pub fn min_norm(&self) -> Vec<S> {
        if self.hull_with_zero {
            return vec![S::zero(); self.dim()];
        }
        self.min_norm_core()
    }

    /// `max_{g ∈ set} ⟨g, dir⟩`.
    pub fn support(&self, dir: &[S]) -> S {
        let d = self.dim();
        let perp = norm(&dir[..d - 1]);
        let lam = (self.lambda.lo * dir[d - 1]).max(self.lambda.hi * dir[d - 1]);
        let s = dot(&self.center, dir) + self.ball_radius * perp + lam;
        if self.hull_with_zero {
            s.max(S::zero())
        } else {
            s
        }
    }

    /// Largest norm of any element.
    pub fn max_norm(&self) -> S {
        let d = self.dim();
        let perp = norm(&self.center[..d - 1]) + self.ball_radius;
        let vd = self.center[d - 1];
        let last = (vd + self.lambda.lo).abs().max((vd + self.lambda.hi).abs());
        (perp * perp + last * last).sqrt()
    }

    /// Vertices of the set when it is a polytope: always for `d = 2`, and for
    /// any `d` when the ball is degenerate.
    pub fn generators(&self) -> Option<Vec<Vec<S>>> {
        let d = self.dim();
        let mut offsets: Vec<Vec<S>> = vec![vec![S::zero(); d]];
        if self.ball_radius > S::zero() {
            if d != 2 {
                return None;
            }
            let r = self.ball_radius;
            offsets = vec![vec![-r, S::zero()], vec![r, S::zero()]];
        }
        let lams: Vec<S> = if self.lambda.lo == self.lambda.hi {
            vec![self.lambda.lo]
        } else {
            vec![self.lambda.lo, self.lambda.hi]
        };
        let mut gens = Vec::with_capacity(offsets.len() * lams.len() + 1);
        for off in &offsets {
            for &lam in &lams {
                let mut g: Vec<S> = self.center.iter().zip(off).map(|(&c, &o)| c + o).collect();
                g[d - 1] = g[d - 1] + lam;
                gens.push(g);
            }
        }
        if self.hull_with_zero {
            gens.push(vec![S::zero(); d]);
        }
        Some(gens)
    }

    /// Minimal-norm element recomputed from the generators with the general
    /// hull solver. Used to cross-check [`SubgradientSet::min_norm`].
    pub fn min_norm_by_generators(&self, tol: S) -> Option<Vec<S>> {
        self.generators().map(|g| min_norm_point(&g, tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(center: Vec<f64>, r: f64, lo: f64, hi: f64, zero: bool) -> SubgradientSet<f64> {
        SubgradientSet {
            case: SubgradCase::OffSlice,
            center,
            ball_radius: r,
            lambda: SubgradientInterval { lo, hi },
            hull_with_zero: zero,
        }
    }

    #[test]
    fn singleton_and_interval() {
        let s = SubgradientSet::singleton(SubgradCase::OffSlice, vec![0.3, -0.4]);
        assert!(s.is_singleton());
        assert_eq!(s.min_norm(), vec![0.3, -0.4]);
        let s = set(vec![0.0, 0.0], 0.0, -0.2, 0.5, false);
        assert_eq!(s.min_norm(), vec![0.0, 0.0]);
        let s = set(vec![0.0, 0.1], 0.0, 0.2, 0.5, false);
        assert!((s.min_norm()[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn closed_form_agrees_with_hull_solver_in_the_plane() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let c = vec![rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let r = if rng.random_bool(0.5) { 1.0 / 32.0 } else { 0.0 };
            let lo = rng.random_range(-0.3..0.1);
            let hi = lo + rng.random_range(0.0..0.3);
            let s = set(c, r, lo, hi, false);
            let exact = s.min_norm();
            let wolfe = s.min_norm_by_generators(1e-14).unwrap();
            assert!((norm(&exact) - norm(&wolfe)).abs() < 1e-10);
            // Optimality of the closed form against every vertex.
            let xx = dot(&exact, &exact);
            for g in s.generators().unwrap() {
                assert!(dot(&exact, &g) - xx >= -1e-12);
            }
        }
    }

    #[test]
    fn support_matches_vertices() {
        let s = set(vec![0.1, -0.05], 0.03, -0.1, 0.2, true);
        let gens = s.generators().unwrap();
        for k in 0..16 {
            let a = k as f64 * std::f64::consts::PI / 8.0;
            let dir = [a.cos(), a.sin()];
            let brute = gens.iter().map(|g| dot(g, &dir)).fold(f64::NEG_INFINITY, f64::max);
            assert!((s.support(&dir) - brute).abs() < 1e-15);
        }
        assert_eq!(s.min_norm(), vec![0.0, 0.0]);
    }

    #[test]
    fn higher_dimensional_ball_has_no_vertices() {
        let s = set(vec![0.1, 0.0, 0.2], 1.0 / 32.0, 0.0, 0.0, false);
        assert!(s.generators().is_none());
        let m = s.min_norm();
        assert!((m[0] - (0.1 - 1.0 / 32.0)).abs() < 1e-16);
        assert!((s.max_norm() - ((0.1f64 + 1.0 / 32.0).powi(2) + 0.04).sqrt()).abs() < 1e-16);
    }

    #[test]
    fn case_bounds() {
        assert_eq!(SubgradCase::AtMinimizer.norm_bound(), Some(3.0 / 32.0));
        assert_eq!(SubgradCase::SliceCapQuadraticFar.norm_bound(), Some(0.02));
        assert!(SubgradCase::ALL
            .iter()
            .filter_map(|c| c.norm_bound())
            .all(|b| b >= 1.0 / 50.0));
    }
}
