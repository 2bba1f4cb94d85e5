//! Algorithm zoo and trajectory recording.
//!
//! An [`Algorithm`] proposes the next iterate from the current iterate, the
//! response just received and its own random stream. It never holds the
//! oracle, so nothing about the instance leaks beyond the responses.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::embed::norm;
use crate::error::{HardError, Result};
use crate::oracle::{FirstOrderOracle, OracleResponse};
use crate::scalar::Real;

pub const DEFAULT_SD_ETA: f64 = 0.1;
pub const DEFAULT_PGD_ETA: f64 = 0.1;
pub const DEFAULT_PGD_NOISE: f64 = 0.01;
pub const DEFAULT_SEARCH_RADIUS: f64 = 1.0;
pub const DEFAULT_GRID_RESOLUTION: usize = 11;

/// `x − η g + ξ` with `ξ ~ N(0, noise_scale² I)`.
pub fn pgd_step<S: Real, R: Rng + ?Sized>(x: &[S], g: &[S], eta: S, noise_scale: S, rng: &mut R) -> Vec<S> {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| {
            let mut v = xi - eta * gi;
            if noise_scale > S::zero() {
                let z: f64 = StandardNormal.sample(rng);
                v = v + noise_scale * S::lit(z);
            }
            v
        })
        .collect()
}

/// Uniform sample from the closed ball `B(0, radius)` in `R^d`.
pub fn uniform_in_ball<S: Real, R: Rng + ?Sized>(d: usize, radius: S, rng: &mut R) -> Vec<S> {
    loop {
        let g: Vec<S> = (0..d).map(|_| S::lit(StandardNormal.sample(rng))).collect();
        let n = norm(&g);
        if n > S::zero() {
            let u: f64 = rng.random();
            let r = radius * S::lit(u.powf(1.0 / d as f64));
            return g.into_iter().map(|v| v * r / n).collect();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    /// `x_{t+1} = x_t − (eta/√t) g_t`.
    Subgradient { eta: f64 },
    /// Constant step with isotropic Gaussian perturbation.
    Pgd { eta: f64, noise: f64 },
    /// Independent uniform draws from `B(0, radius)` after the start point.
    RandomSearch { radius: f64 },
    /// Visits the grid `{lo + (hi − lo)·j/(resolution − 1)}^d`, last axis fastest.
    GridSearch { lo: f64, hi: f64, resolution: usize },
}

impl AlgorithmSpec {
    pub fn id(&self) -> &'static str {
        match self {
            AlgorithmSpec::Subgradient { .. } => "sd",
            AlgorithmSpec::Pgd { .. } => "pgd",
            AlgorithmSpec::RandomSearch { .. } => "random",
            AlgorithmSpec::GridSearch { .. } => "grid",
        }
    }

    /// Spec for `id` with optional overrides of the step size and noise.
    pub fn from_id(id: &str, eta: Option<f64>, noise: Option<f64>) -> Result<Self> {
        let spec = match id {
            "sd" | "subgradient" => AlgorithmSpec::Subgradient { eta: eta.unwrap_or(DEFAULT_SD_ETA) },
            "pgd" => AlgorithmSpec::Pgd {
                eta: eta.unwrap_or(DEFAULT_PGD_ETA),
                noise: noise.unwrap_or(DEFAULT_PGD_NOISE),
            },
            "random" | "random_search" => AlgorithmSpec::RandomSearch { radius: DEFAULT_SEARCH_RADIUS },
            "grid" | "grid_search" => {
                AlgorithmSpec::GridSearch { lo: -1.0, hi: 1.0, resolution: DEFAULT_GRID_RESOLUTION }
            }
            other => return Err(HardError::UnknownAlgorithm(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(HardError::NonPositive { name, value: v })
            }
        };
        match *self {
            AlgorithmSpec::Subgradient { eta } => positive("eta", eta),
            AlgorithmSpec::Pgd { eta, noise } => {
                if !(eta >= 0.0 && eta.is_finite()) {
                    return Err(HardError::OutOfRange { name: "eta", range: "[0, inf)", value: eta });
                }
                if !(noise >= 0.0 && noise.is_finite()) {
                    return Err(HardError::OutOfRange { name: "noise", range: "[0, inf)", value: noise });
                }
                Ok(())
            }
            AlgorithmSpec::RandomSearch { radius } => positive("radius", radius),
            AlgorithmSpec::GridSearch { lo, hi, resolution } => {
                if resolution < 2 {
                    return Err(HardError::OutOfRange { name: "resolution", range: "[2, inf)", value: resolution as f64 });
                }
                if !(hi > lo) {
                    return Err(HardError::OutOfRange { name: "grid hi - lo", range: "(0, inf)", value: hi - lo });
                }
                Ok(())
            }
        }
    }

    pub fn build<S: Real>(&self) -> Box<dyn Algorithm<S>> {
        match *self {
            AlgorithmSpec::Subgradient { eta } => Box::new(SubgradientDescent { eta: S::lit(eta) }),
            AlgorithmSpec::Pgd { eta, noise } => Box::new(PerturbedGd { eta: S::lit(eta), noise: S::lit(noise) }),
            AlgorithmSpec::RandomSearch { radius } => Box::new(RandomSearch { radius: S::lit(radius) }),
            AlgorithmSpec::GridSearch { lo, hi, resolution } => {
                Box::new(GridSearch { lo: S::lit(lo), hi: S::lit(hi), resolution })
            }
        }
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for AlgorithmSpec {
    type Err = HardError;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_id(s, None, None)
    }
}

pub trait Algorithm<S: Real> {
    /// Iterate `x_{t+1}` given `x_t`, the response at `x_t` and `t ≥ 1`.
    fn next(&mut self, t: usize, x: &[S], response: &OracleResponse<S>, rng: &mut ChaCha8Rng) -> Vec<S>;
}

pub struct SubgradientDescent<S> {
    pub eta: S,
}

impl<S: Real> Algorithm<S> for SubgradientDescent<S> {
    fn next(&mut self, t: usize, x: &[S], r: &OracleResponse<S>, rng: &mut ChaCha8Rng) -> Vec<S> {
        let eta = self.eta / S::lit(t as f64).sqrt();
        pgd_step(x, &r.subgradient, eta, S::zero(), rng)
    }
}

pub struct PerturbedGd<S> {
    pub eta: S,
    pub noise: S,
}

impl<S: Real> Algorithm<S> for PerturbedGd<S> {
    fn next(&mut self, _t: usize, x: &[S], r: &OracleResponse<S>, rng: &mut ChaCha8Rng) -> Vec<S> {
        pgd_step(x, &r.subgradient, self.eta, self.noise, rng)
    }
}

pub struct RandomSearch<S> {
    pub radius: S,
}

impl<S: Real> Algorithm<S> for RandomSearch<S> {
    fn next(&mut self, _t: usize, x: &[S], _r: &OracleResponse<S>, rng: &mut ChaCha8Rng) -> Vec<S> {
        uniform_in_ball(x.len(), self.radius, rng)
    }
}

pub struct GridSearch<S> {
    pub lo: S,
    pub hi: S,
    pub resolution: usize,
}

impl<S: Real> Algorithm<S> for GridSearch<S> {
    fn next(&mut self, t: usize, x: &[S], _r: &OracleResponse<S>, _rng: &mut ChaCha8Rng) -> Vec<S> {
        let d = x.len();
        let step = (self.hi - self.lo) / S::lit((self.resolution - 1) as f64);
        // Grid point number t - 1 (the start point is not on the grid), wrapping around.
        let mut idx = t - 1;
        let mut out = vec![S::zero(); d];
        for slot in out.iter_mut().rev() {
            let j = idx % self.resolution;
            idx /= self.resolution;
            *slot = self.lo + step * S::lit(j as f64);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<S> {
    pub algorithm: AlgorithmSpec,
    pub seed: u64,
    /// `x_1, …, x_T`.
    pub iterates: Vec<Vec<S>>,
    pub responses: Vec<OracleResponse<S>>,
}

impl<S: Real> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn min_value(&self) -> S {
        self.responses.iter().map(|r| r.value).fold(S::infinity(), |a, b| a.min(b))
    }
}

/// Runs `spec` for `t_max ≥ 1` oracle calls starting from `x0`.
pub fn run<S: Real, O: FirstOrderOracle<S> + ?Sized>(
    spec: &AlgorithmSpec,
    oracle: &O,
    x0: &[S],
    t_max: usize,
    seed: u64,
) -> Result<Trajectory<S>> {
    spec.validate()?;
    if t_max == 0 {
        return Err(HardError::NonPositive { name: "T", value: 0.0 });
    }
    if x0.len() != oracle.dim() {
        return Err(HardError::DimensionMismatch { expected: oracle.dim(), got: x0.len() });
    }
    let mut algo = spec.build::<S>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut iterates = Vec::with_capacity(t_max);
    let mut responses = Vec::with_capacity(t_max);
    let mut x = x0.to_vec();
    for t in 1..=t_max {
        let r = oracle.query(&x);
        let next = if t < t_max { Some(algo.next(t, &x, &r, &mut rng)) } else { None };
        iterates.push(std::mem::take(&mut x));
        responses.push(r);
        if let Some(n) = next {
            x = n;
        }
    }
    Ok(Trajectory { algorithm: *spec, seed, iterates, responses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{AbsValue, EuclideanNorm};

    #[test]
    fn zero_step_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = vec![0.3, -0.7];
        assert_eq!(pgd_step(&x, &[1.0, 2.0], 0.0, 0.0, &mut rng), x);
    }

    #[test]
    fn gradient_descent_on_abs_oscillates_in_band() {
        let spec = AlgorithmSpec::Pgd { eta: 0.1, noise: 0.0 };
        let tr = run(&spec, &AbsValue, &[1.0f64], 40, 0).unwrap();
        for (t, x) in tr.iterates.iter().enumerate().take(10) {
            assert!((x[0] - (1.0 - 0.1 * t as f64)).abs() < 1e-12);
        }
        for x in &tr.iterates[10..] {
            assert!(x[0].abs() <= 0.1 + 1e-12);
        }
    }

    #[test]
    fn noise_has_zero_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = 0.05;
        let n = 10_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += pgd_step(&[1.0], &[0.5], 0.2, s, &mut rng)[0];
        }
        assert!((acc / n as f64 - 0.9).abs() < 4.0 * s / 100.0);
    }

    #[test]
    fn runs_are_replayable() {
        let o = EuclideanNorm(3);
        for spec in [
            AlgorithmSpec::from_id("sd", None, None).unwrap(),
            AlgorithmSpec::from_id("pgd", None, None).unwrap(),
            AlgorithmSpec::from_id("random", None, None).unwrap(),
            AlgorithmSpec::from_id("grid", None, None).unwrap(),
        ] {
            let a = run(&spec, &o, &[0.5f64, 0.1, -0.2], 25, 9).unwrap();
            let b = run(&spec, &o, &[0.5f64, 0.1, -0.2], 25, 9).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 25);
        }
        let one = run(&AlgorithmSpec::from_id("pgd", None, None).unwrap(), &o, &[1.0f64, 0.0, 0.0], 1, 0).unwrap();
        assert_eq!(one.iterates, vec![vec![1.0, 0.0, 0.0]]);
        assert_eq!(one.responses.len(), 1);
    }

    #[test]
    fn random_search_stays_in_ball() {
        let spec = AlgorithmSpec::RandomSearch { radius: 1.0 };
        let tr = run(&spec, &EuclideanNorm(4), &[0.0f64; 4], 500, 2).unwrap();
        assert!(tr.iterates.iter().all(|x| norm(x) <= 1.0));
    }

    #[test]
    fn grid_covers_the_box() {
        let spec = AlgorithmSpec::GridSearch { lo: -1.0, hi: 1.0, resolution: 3 };
        let tr = run(&spec, &EuclideanNorm(2), &[5.0f64, 5.0], 10, 0).unwrap();
        assert_eq!(tr.iterates[1], vec![-1.0, -1.0]);
        assert_eq!(tr.iterates[2], vec![-1.0, 0.0]);
        assert_eq!(tr.iterates[9], vec![1.0, 1.0]);
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert_eq!(
            AlgorithmSpec::from_id("newton", None, None).unwrap_err(),
            HardError::UnknownAlgorithm("newton".into())
        );
    }
}
