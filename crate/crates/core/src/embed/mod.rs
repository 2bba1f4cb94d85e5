//! The d-dimensional instance
//!
//! `f(x) = max{ h(x) − σ_μ(q(x − x*)), 0 }` with
//! `h(x) = ‖x_{1:d−1}‖/32 + h̄(x_d)` and `q(y) = ⟨w̄, y + w⟩ − ½‖y + w‖`.
//!
//! `h̄` here is half of the one-dimensional hard function, so it has range `[1, ∞)`
//! and slopes in `[1/16, 1/2]`.

mod cap;
pub mod minnorm;
mod subgrad;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;

pub use cap::SmoothCap;
pub use minnorm::{dot, min_norm_point, norm};
pub use subgrad::{SubgradCase, SubgradientSet};

use crate::error::{HardError, Result};
use crate::hard1d::{HardProfile, SubgradientInterval};
use crate::intervals::BitString;
use crate::scalar::Real;
use crate::schedule::AngleSchedule;

/// Stationarity constant of the construction.
pub const STATIONARITY_C: f64 = 1.0 / 100.0;

/// Weight of the norm term on the first `d − 1` coordinates.
pub const NORM_WEIGHT: f64 = 1.0 / 32.0;

/// `‖w‖ / μ`.
pub const W_OVER_MU: f64 = 1000.0;

/// `ρ / ‖w‖`.
pub const RHO_OVER_W: f64 = 99.0;

/// The cap-free function `h`.
#[derive(Debug, Clone)]
pub struct HFunction<S> {
    d: usize,
    hbar: HardProfile<S>,
    x_star: Vec<S>,
}

impl<S: Real> HFunction<S> {
    pub fn new(schedule: &AngleSchedule<S>, d: usize, sigma: &BitString) -> Result<Self> {
        if d < 2 {
            return Err(HardError::Dimension(d));
        }
        let hbar = HardProfile::hbar(schedule, sigma)?.transformed(S::lit(0.5), S::zero());
        let mut x_star = vec![S::zero(); d];
        x_star[d - 1] = hbar.x_mid();
        Ok(HFunction { d, hbar, x_star })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The ½-scaled one-dimensional profile.
    pub fn hbar(&self) -> &HardProfile<S> {
        &self.hbar
    }

    pub fn hbar_mut(&mut self) -> &mut HardProfile<S> {
        &mut self.hbar
    }

    pub fn sigma(&self) -> &BitString {
        self.hbar.sigma()
    }

    pub fn x_star(&self) -> &[S] {
        &self.x_star
    }

    fn check_dim(&self, x: &[S]) {
        assert_eq!(x.len(), self.d, "point has the wrong dimension");
    }

    pub fn eval(&self, x: &[S]) -> S {
        self.check_dim(x);
        S::lit(NORM_WEIGHT) * norm(&x[..self.d - 1]) + self.hbar.eval(x[self.d - 1])
    }

    /// `(gradient of the norm term, ball radius, ∂h̄(x_d))`.
    fn parts(&self, x: &[S]) -> (Vec<S>, S, SubgradientInterval<S>) {
        let d = self.d;
        let weight = S::lit(NORM_WEIGHT);
        let n1 = norm(&x[..d - 1]);
        let mut g = vec![S::zero(); d];
        let radius = if n1 > S::zero() {
            for (gi, &xi) in g[..d - 1].iter_mut().zip(&x[..d - 1]) {
                *gi = weight * xi / n1;
            }
            S::zero()
        } else {
            weight
        };
        (g, radius, self.hbar.subdiff(x[d - 1]))
    }

    pub fn subgrad(&self, x: &[S]) -> SubgradientSet<S> {
        self.check_dim(x);
        let (center, ball_radius, lambda) = self.parts(x);
        SubgradientSet { case: SubgradCase::CapFree, center, ball_radius, lambda, hull_with_zero: false }
    }
}

/// Complete instance `f_{w,μ}`.
#[derive(Debug, Clone)]
pub struct HardInstance<S> {
    base: HFunction<S>,
    w: Vec<S>,
    w_bar: Vec<S>,
    w_norm: S,
    cap: SmoothCap<S>,
    rho: S,
    seed: u64,
}

/// Draws `w` uniformly on the sphere of radius `ρ/99` inside `e_d^⊥` and sets
/// `μ = ‖w‖/1000`.
pub fn choose_w_mu<S: Real, R: Rng + ?Sized>(d: usize, rho: S, rng: &mut R) -> Result<(Vec<S>, S)> {
    if d < 2 {
        return Err(HardError::Dimension(d));
    }
    if !(rho > S::zero()) || !rho.is_finite() {
        return Err(HardError::NonPositive { name: "rho", value: rho.to_f64_lossy() });
    }
    let target = rho / S::lit(RHO_OVER_W);
    let mut g: Vec<S> = Vec::with_capacity(d);
    loop {
        g.clear();
        for _ in 0..d - 1 {
            let z: f64 = rng.sample(StandardNormal);
            g.push(S::lit(z));
        }
        if norm(&g) > S::zero() {
            break;
        }
    }
    let scale = target / norm(&g);
    let mut w: Vec<S> = g.into_iter().map(|z| z * scale).collect();
    w.push(S::zero());
    let mu = norm(&w) / S::lit(W_OVER_MU);
    if !(mu > S::zero()) {
        return Err(HardError::NonPositive { name: "mu", value: mu.to_f64_lossy() });
    }
    Ok((w, mu))
}

impl<S: Real> HardInstance<S> {
    /// Assembles an instance from explicit parts.
    ///
    /// `w` must be non-zero with `w_d = 0`, and `μ` positive and finite.
    pub fn from_parts(base: HFunction<S>, w: Vec<S>, mu: S, rho: S, seed: u64) -> Result<Self> {
        let d = base.d;
        if w.len() != d {
            return Err(HardError::DimensionMismatch { expected: d, got: w.len() });
        }
        let w_norm = norm(&w);
        if w[d - 1] != S::zero() || !(w_norm > S::zero()) || !w_norm.is_finite() {
            return Err(HardError::BadDirection);
        }
        if !(mu > S::zero()) || !mu.is_finite() {
            return Err(HardError::NonPositive { name: "mu", value: mu.to_f64_lossy() });
        }
        let w_bar = w.iter().map(|&v| v / w_norm).collect();
        Ok(HardInstance { base, w, w_bar, w_norm, cap: SmoothCap::new(mu), rho, seed })
    }

    /// Builds `h` from `sigma` and draws `(w, μ)` from `rho` with the
    /// direction stream of `seed`.
    pub fn generate(schedule: &AngleSchedule<S>, d: usize, sigma: &BitString, rho: S, seed: u64) -> Result<Self> {
        let base = HFunction::new(schedule, d, sigma)?;
        let mut rng = crate::rng::stream(seed, crate::rng::Stream::Direction, 0);
        let (w, mu) = choose_w_mu(d, rho, &mut rng)?;
        Self::from_parts(base, w, mu, rho, seed)
    }

    /// As [`HardInstance::generate`] with `σ` of length `depth` drawn from the
    /// sigma stream of `seed`.
    pub fn random(schedule: &AngleSchedule<S>, d: usize, depth: usize, rho: S, seed: u64) -> Result<Self> {
        let sigma = BitString::random(depth, &mut crate::rng::stream(seed, crate::rng::Stream::Sigma, 0));
        Self::generate(schedule, d, &sigma, rho, seed)
    }

    pub fn base(&self) -> &HFunction<S> {
        &self.base
    }

    pub fn base_mut(&mut self) -> &mut HFunction<S> {
        &mut self.base
    }

    pub fn d(&self) -> usize {
        self.base.d
    }

    pub fn sigma(&self) -> &BitString {
        self.base.sigma()
    }

    pub fn x_star(&self) -> &[S] {
        &self.base.x_star
    }

    pub fn w(&self) -> &[S] {
        &self.w
    }

    pub fn w_bar(&self) -> &[S] {
        &self.w_bar
    }

    pub fn w_norm(&self) -> S {
        self.w_norm
    }

    pub fn mu(&self) -> S {
        self.cap.mu
    }

    pub fn cap(&self) -> &SmoothCap<S> {
        &self.cap
    }

    pub fn rho(&self) -> S {
        self.rho
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn c(&self) -> S {
        S::lit(STATIONARITY_C)
    }

    /// Whether `μ` is resolvable next to `x*` at the working precision, i.e.
    /// `μ ≥ 256·ε·max(1, |x*_d|)`. Smaller caps are still evaluated exactly in
    /// the first `d − 1` coordinates, but displacements of order `μ` along
    /// `e_d` are lost to rounding.
    pub fn cap_resolved(&self) -> bool {
        let floor = S::epsilon() * S::lit(256.0) * self.x_star()[self.d() - 1].abs().max(S::one());
        self.mu() >= floor
    }

    /// `y = x − x*`.
    pub fn shifted(&self, x: &[S]) -> Vec<S> {
        x.iter().zip(self.x_star()).map(|(&a, &b)| a - b).collect()
    }

    /// `q(y) = ⟨w̄, y + w⟩ − ½‖y + w‖`.
    pub fn q(&self, y: &[S]) -> S {
        let z: Vec<S> = y.iter().zip(&self.w).map(|(&a, &b)| a + b).collect();
        dot(&self.w_bar, &z) - S::lit(0.5) * norm(&z)
    }

    pub fn eval_h(&self, x: &[S]) -> S {
        self.base.eval(x)
    }

    /// `h(x) − σ_μ(q(x − x*))`, before clipping at zero.
    pub fn eval_inner(&self, x: &[S]) -> S {
        let y = self.shifted(x);
        self.base.eval(x) - self.cap.value(self.q(&y))
    }

    pub fn eval_f(&self, x: &[S]) -> S {
        self.eval_inner(x).max(S::zero())
    }

    /// Clarke subdifferential with the exact kink test `h − σ_μ(q) = 0`.
    pub fn subgrad_f(&self, x: &[S]) -> SubgradientSet<S> {
        self.subgrad_f_with(x, S::zero())
    }

    /// As [`HardInstance::subgrad_f`], treating `|h − σ_μ(q)| ≤ kink_tol` as
    /// the kink of the outer maximum.
    pub fn subgrad_f_with(&self, x: &[S], kink_tol: S) -> SubgradientSet<S> {
        let d = self.d();
        assert_eq!(x.len(), d, "point has the wrong dimension");
        let inner = self.eval_inner(x);
        if inner < -kink_tol {
            return SubgradientSet::zero(SubgradCase::FloorRegion, d);
        }
        let y = self.shifted(x);
        let (mut center, ball_radius, lambda) = self.base.parts(x);
        let z: Vec<S> = y.iter().zip(&self.w).map(|(&a, &b)| a + b).collect();
        let nz = norm(&z);
        let qv = dot(&self.w_bar, &z) - S::lit(0.5) * nz;
        let s = self.cap.derivative(qv);
        if nz > S::zero() && s > S::zero() {
            for ((c, &wb), &zi) in center.iter_mut().zip(&self.w_bar).zip(&z) {
                *c = *c - s * (wb - S::lit(0.5) * zi / nz);
            }
        }
        let case = if inner <= kink_tol {
            SubgradCase::MaxKink
        } else {
            self.classify(&y, &z, nz, qv)
        };
        SubgradientSet { case, center, ball_radius, lambda, hull_with_zero: case == SubgradCase::MaxKink }
    }

    fn classify(&self, y: &[S], z: &[S], nz: S, qv: S) -> SubgradCase {
        let d = self.d();
        if y.iter().all(|&v| v == S::zero()) {
            return SubgradCase::AtMinimizer;
        }
        if z.iter().all(|&v| v == S::zero()) {
            return SubgradCase::CapApex;
        }
        if y[d - 1] != S::zero() {
            return SubgradCase::OffSlice;
        }
        let mu = self.mu();
        if qv < S::zero() {
            SubgradCase::SliceCapInactive
        } else if qv > mu {
            SubgradCase::SliceCapLinear
        } else if nz <= S::lit(10.0) * mu {
            SubgradCase::SliceCapQuadraticNear
        } else {
            SubgradCase::SliceCapQuadraticFar
        }
    }

    /// Minimal-norm element of `∂f(x)`.
    pub fn min_norm_subgrad(&self, x: &[S]) -> Vec<S> {
        self.subgrad_f(x).min_norm()
    }

    /// Point `x* + t·w̄` on the boundary `h = σ_μ(q)` of the zero region.
    pub fn max_kink_point(&self) -> Vec<S> {
        // On this ray h = 1 + t/32 and, once q > μ, σ_μ(q) = (t + ‖w‖)/8 − μ/8.
        let t = S::lit(32.0 / 3.0) * (S::one() - self.w_norm / S::lit(8.0) + self.mu() / S::lit(8.0));
        self.x_star().iter().zip(&self.w_bar).map(|(&a, &b)| a + t * b).collect()
    }

    /// Flat key-value serialization. Numeric fields are stored as raw bit
    /// patterns so that [`HardInstance::from_kv`] reproduces the instance
    /// bit for bit; `#` lines carry readable values and are ignored on parse.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "format = 1");
        let _ = writeln!(out, "precision = {}", S::PRECISION);
        let _ = writeln!(out, "d = {}", self.d());
        let _ = writeln!(out, "sigma = {}", self.sigma());
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "rho = {}", self.rho.encode_bits());
        let _ = writeln!(out, "# rho ~ {:e}", self.rho.to_f64_lossy());
        let _ = writeln!(out, "mu = {}", self.mu().encode_bits());
        let _ = writeln!(out, "# mu ~ {:e}", self.mu().to_f64_lossy());
        let _ = writeln!(out, "# x_star_d ~ {:?}", self.x_star()[self.d() - 1].to_f64_lossy());
        for (i, w) in self.w.iter().enumerate() {
            let _ = writeln!(out, "w.{i} = {}", w.encode_bits());
        }
        out
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let map = parse_kv(text)?;
        let get = |k: &str| map.get(k).ok_or_else(|| HardError::Parse(format!("missing key {k}")));
        let precision = get("precision")?;
        if precision != S::PRECISION {
            return Err(HardError::Parse(format!(
                "instance precision is {precision}, expected {}",
                S::PRECISION
            )));
        }
        let d: usize = get("d")?.parse().map_err(|_| HardError::Parse("d".into()))?;
        let sigma: BitString = get("sigma")?.parse()?;
        let seed: u64 = get("seed")?.parse().map_err(|_| HardError::Parse("seed".into()))?;
        let bits = |k: &str| -> Result<S> {
            S::decode_bits(get(k)?).ok_or_else(|| HardError::Parse(format!("bad bit pattern for {k}")))
        };
        let rho = bits("rho")?;
        let mu = bits("mu")?;
        let w = (0..d).map(|i| bits(&format!("w.{i}"))).collect::<Result<Vec<S>>>()?;
        let base = HFunction::new(&AngleSchedule::new(), d, &sigma)?;
        Self::from_parts(base, w, mu, rho, seed)
    }
}

/// Precision tag of a serialized instance.
pub fn kv_precision(text: &str) -> Result<String> {
    parse_kv(text)?
        .remove("precision")
        .ok_or_else(|| HardError::Parse("missing key precision".into()))
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| HardError::Parse(format!("line {} has no '='", n + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Cap-free `h` for `(d, sigma)` with the default schedule.
pub fn build_h<S: Real>(d: usize, sigma: &BitString) -> Result<HFunction<S>> {
    HFunction::new(&AngleSchedule::new(), d, sigma)
}

pub fn eval_h<S: Real>(h: &HFunction<S>, x: &[S]) -> S {
    h.eval(x)
}

pub fn eval_f<S: Real>(inst: &HardInstance<S>, x: &[S]) -> S {
    inst.eval_f(x)
}

pub fn subgrad_f<S: Real>(inst: &HardInstance<S>, x: &[S]) -> SubgradientSet<S> {
    inst.subgrad_f(x)
}

pub fn min_norm_subgrad<S: Real>(set: &SubgradientSet<S>) -> Vec<S> {
    set.min_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(d: usize, bits: &str, rho: f64, seed: u64) -> HardInstance<f64> {
        HardInstance::generate(&AngleSchedule::new(), d, &bits.parse().unwrap(), rho, seed).unwrap()
    }

    #[test]
    fn h_values() {
        let h = build_h::<f64>(3, &"01101".parse().unwrap()).unwrap();
        assert!(h.eval(&[0.0; 3]) <= 1.5);
        assert!((h.eval(h.x_star()) - 1.0).abs() < 1e-15);
        assert!(build_h::<f64>(1, &"0".parse().unwrap()).is_err());
        let g = h.subgrad(&[0.3, -0.2, 0.77]);
        assert!(g.max_norm() <= 17.0 / 32.0 + 1e-15);
    }

    #[test]
    fn q_values() {
        let inst = instance(4, "0110", 1e-3, 9);
        let minus_w: Vec<f64> = inst.w().iter().map(|v| -v).collect();
        assert_eq!(inst.q(&minus_w), 0.0);
        assert!((inst.q(&[0.0; 4]) - 0.5 * inst.w_norm()).abs() < 1e-18);
        let y = [0.0, 0.0, 0.0, 0.3];
        assert!(inst.q(&y) < 0.0);
    }

    #[test]
    fn w_and_mu_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3, 10, 100] {
            let rho = 1e-8;
            let (w, mu) = choose_w_mu::<f64, _>(d, rho, &mut rng).unwrap();
            assert_eq!(w[d - 1], 0.0);
            let target = rho / 99.0;
            assert!((norm(&w) - target).abs() <= 2.0 * f64::EPSILON * target);
            assert!((mu * 1000.0 - norm(&w)).abs() <= f64::EPSILON * norm(&w));
            assert!((mu / (rho / 99000.0) - 1.0).abs() < 4e-16);
        }
        assert!(choose_w_mu::<f64, _>(1, 1.0, &mut rng).is_err());
        assert!(choose_w_mu::<f64, _>(3, 0.0, &mut rng).is_err());
    }

    #[test]
    fn value_at_minimizer() {
        let inst = instance(5, "10110", 1e-2, 1);
        let mu = inst.mu();
        let expected = 1.0 - 125.0 * mu + mu / 8.0;
        assert!((inst.eval_f(inst.x_star()) - expected).abs() < 1e-15);
        assert!(inst.eval_f(&[0.0; 5]) <= 1.5);
    }

    #[test]
    fn cap_inactive_region_matches_h_exactly() {
        let inst = instance(3, "011", 1e-2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y = inst.shifted(&x);
            if inst.q(&y) < 0.0 {
                assert_eq!(inst.eval_f(&x), inst.eval_h(&x));
            }
        }
    }

    #[test]
    fn classification_of_special_points() {
        let inst = instance(4, "0110", 1e-3, 2);
        let xs = inst.x_star().to_vec();
        assert_eq!(inst.subgrad_f(&xs).case, SubgradCase::AtMinimizer);
        let g = inst.min_norm_subgrad(&xs);
        assert!(norm(&g[..3]) >= 3.0 / 32.0);

        let apex: Vec<f64> = xs.iter().zip(inst.w()).map(|(a, b)| a - b).collect();
        let s = inst.subgrad_f(&apex);
        assert_eq!(s.case, SubgradCase::CapApex);
        assert!(norm(&s.min_norm()) >= 1.0 / 32.0);

        let mut off = xs.clone();
        off[3] += 0.1;
        assert_eq!(inst.subgrad_f(&off).case, SubgradCase::OffSlice);

        let mut away = xs.clone();
        away[0] -= 0.5;
        assert_eq!(inst.subgrad_f(&away).case, SubgradCase::SliceCapInactive);

        let along: Vec<f64> = xs.iter().zip(inst.w_bar()).map(|(a, b)| a + 0.5 * b).collect();
        assert_eq!(inst.subgrad_f(&along).case, SubgradCase::SliceCapLinear);
    }

    #[test]
    fn quadratic_cap_cases() {
        let inst = instance(3, "01", 1e-3, 5);
        let mu = inst.mu();
        let wb = inst.w_bar().to_vec();
        let mut u = vec![-wb[1], wb[0], 0.0];
        let nu = norm(&u);
        u.iter_mut().for_each(|v| *v /= nu);
        for (r, want) in [(5.0 * mu, SubgradCase::SliceCapQuadraticNear), (50.0 * mu, SubgradCase::SliceCapQuadraticFar)] {
            let a = 0.5 + 0.5 * mu / r;
            let b = (1.0 - a * a).sqrt();
            let z: Vec<f64> = (0..3).map(|i| r * (a * wb[i] + b * u[i])).collect();
            let mut x: Vec<f64> = z.iter().zip(inst.w()).map(|(zi, wi)| zi - wi).collect();
            x[2] = inst.x_star()[2];
            let s = inst.subgrad_f(&x);
            assert_eq!(s.case, want);
            assert!(norm(&s.min_norm()) >= want.norm_bound().unwrap());
        }
    }

    #[test]
    fn max_kink_point_is_on_the_boundary() {
        let inst = instance(3, "0101", 1e-2, 6);
        let x = inst.max_kink_point();
        assert!(inst.eval_inner(&x).abs() < 1e-14);
        let s = inst.subgrad_f_with(&x, 1e-12);
        assert_eq!(s.case, SubgradCase::MaxKink);
        assert_eq!(norm(&s.min_norm()), 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let inst = instance(5, "011010", 1e-2, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = 1e-7;
        for _ in 0..100 {
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-1.5..1.5)).collect();
            let s = inst.subgrad_f(&x);
            assert!(s.is_singleton());
            let g = s.min_norm();
            for i in 0..5 {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += h;
                b[i] -= h;
                let fd = (inst.eval_f(&a) - inst.eval_f(&b)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6, "coordinate {i}");
            }
        }
    }

    #[test]
    fn kv_round_trip_is_bit_exact() {
        let inst = instance(6, "1100101", 1e-8, 77);
        let text = inst.to_kv();
        let back = HardInstance::<f64>::from_kv(&text).unwrap();
        assert_eq!(back.to_kv(), text);
        assert_eq!(back.w(), inst.w());
        assert_eq!(back.mu().to_bits(), inst.mu().to_bits());
        assert_eq!(kv_precision(&text).unwrap(), "double");
        assert!(HardInstance::<f32>::from_kv(&text).is_err());
        assert!(inst.cap_resolved());
        assert!(!instance(3, "01", 1e-12, 1).cap_resolved());
    }

    #[test]
    fn rejects_bad_parts() {
        let base = build_h::<f64>(3, &"01".parse().unwrap()).unwrap();
        assert_eq!(
            HardInstance::from_parts(base.clone(), vec![0.0, 0.1, 0.1], 1e-4, 1.0, 0).unwrap_err(),
            HardError::BadDirection
        );
        assert!(HardInstance::from_parts(base.clone(), vec![0.0, 0.1, 0.0], -1.0, 1.0, 0).is_err());
        assert!(HardInstance::from_parts(base, vec![0.1, 0.0], 1e-4, 1.0, 0).is_err());
    }
}
