use rayon::prelude::*;
use serde::Serialize;

use super::progress::progress_process;
use super::stats::Proportion;
use crate::algorithms::{run, AlgorithmSpec};
use crate::error::{HardError, Result};
use crate::hard1d::HardProfile;
use crate::intervals::BitString;
use crate::rng::{derive, stream, Stream};
use crate::scalar::Real;
use crate::schedule::AngleSchedule;

pub const MIN_RUNS: usize = 100;

/// Experiment sizes: horizon `t`, separation depth `k`, nesting depth `n`
/// and the radius `ρ` (given through `ln(1/ρ)` so that tiny radii survive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingParams {
    pub t: usize,
    pub k: usize,
    pub n: usize,
    pub ln_inv_rho: f64,
}

impl HittingParams {
    pub fn rho(&self) -> f64 {
        (-self.ln_inv_rho).exp()
    }

    /// `4T/k`.
    pub fn depth_bound(&self) -> f64 {
        4.0 * self.t as f64 / self.k as f64
    }

    /// `16T/√ln(1/ρ)`.
    pub fn radius_bound(&self) -> f64 {
        16.0 * self.t as f64 / self.ln_inv_rho.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpTally {
    pub m: usize,
    /// Fraction of steps with `Z_{t+1} − Z_t ≥ m`.
    pub at_least: Proportion,
    /// Fraction of steps with `Z_{t+1} − Z_t = m`.
    pub exactly: Proportion,
    /// `2^{−(m−1)}`.
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingReport {
    pub algorithm: AlgorithmSpec,
    pub params: HittingParams,
    pub n_runs: usize,
    pub seed: u64,
    /// Runs with some `|x_t − x*| ≤ ρ`.
    pub hit_radius: Proportion,
    pub radius_bound: f64,
    pub radius_bound_vacuous: bool,
    /// Runs with `Z_T ≥ k`.
    pub reach_k: Proportion,
    pub depth_bound: f64,
    pub depth_bound_vacuous: bool,
    /// `reach_depth[l − 1]`: runs with `Z_T ≥ l`, for `l = 1..=n`.
    pub reach_depth: Vec<Proportion>,
    pub jumps: Vec<JumpTally>,
    /// Every `Z` path was nondecreasing, started at 0 and stayed `≤ n`.
    pub paths_valid: bool,
}

impl HittingReport {
    /// Every non-vacuous bound holds within three standard errors.
    pub fn passed(&self) -> bool {
        self.paths_valid
            && self.jumps.iter().all(|j| j.passed)
            && (self.radius_bound_vacuous || self.hit_radius.below(self.radius_bound))
            && (self.depth_bound_vacuous || self.reach_k.below(self.depth_bound))
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.radius_bound_vacuous {
            out.push(format!("radius bound 16T/sqrt(ln(1/rho)) = {:.4} exceeds 1 and is vacuous", self.radius_bound));
        }
        if self.depth_bound_vacuous {
            out.push(format!("depth bound 4T/k = {:.4} exceeds 1 and is vacuous", self.depth_bound));
        }
        out
    }
}

struct Outcome {
    hit: bool,
    z: Vec<usize>,
    valid: bool,
}

/// Fresh `σ` per run; the algorithm is run on the one-dimensional `h̄`
/// from `x_0 = 0` in precision `S`.
pub fn mc_hitting<S: Real>(
    algorithm: &AlgorithmSpec,
    params: HittingParams,
    n_runs: usize,
    seed: u64,
    max_jump: usize,
) -> Result<HittingReport> {
    if n_runs < MIN_RUNS {
        return Err(HardError::OutOfRange { name: "runs", range: "[100, inf)", value: n_runs as f64 });
    }
    if params.k == 0 || params.n < params.k || params.t == 0 {
        return Err(HardError::OutOfRange { name: "k", range: "[1, N]", value: params.k as f64 });
    }
    algorithm.validate()?;
    let schedule = AngleSchedule::<S>::new();
    let rho = (-S::lit(params.ln_inv_rho)).exp();
    let outcomes: Vec<Outcome> = (0..n_runs as u64)
        .into_par_iter()
        .map(|r| -> Result<Outcome> {
            let sigma = BitString::random(params.n, &mut stream(seed, Stream::Sigma, r));
            let profile = HardProfile::hbar(&schedule, &sigma)?;
            let tr = run(algorithm, &profile, &[S::zero()], params.t, derive(seed, Stream::Algorithm, r))?;
            let x_star = profile.x_mid();
            let hit = tr.iterates.iter().any(|x| (x[0] - x_star).abs() <= rho);
            let z = progress_process(&tr, &profile, &sigma)?;
            let valid = z.is_monotone_bounded(params.n);
            Ok(Outcome { hit, z: z.z, valid })
        })
        .collect::<Result<Vec<_>>>()?;

    let runs = n_runs as u64;
    let hits = outcomes.iter().filter(|o| o.hit).count() as u64;
    let reach_depth: Vec<Proportion> = (1..=params.n)
        .map(|l| Proportion::new(outcomes.iter().filter(|o| *o.z.last().unwrap() >= l).count() as u64, runs))
        .collect();
    let steps: u64 = outcomes.iter().map(|o| (o.z.len() - 1) as u64).sum();
    let jumps = (1..=max_jump)
        .map(|m| {
            let mut ge = 0u64;
            let mut eq = 0u64;
            for o in &outcomes {
                for w in o.z.windows(2) {
                    let j = w[1] - w[0];
                    ge += (j >= m) as u64;
                    eq += (j == m) as u64;
                }
            }
            let bound = 0.5f64.powi(m as i32 - 1);
            let at_least = Proportion::new(ge, steps);
            JumpTally { m, at_least, exactly: Proportion::new(eq, steps), bound, passed: at_least.below(bound) }
        })
        .collect();
    let radius_bound = params.radius_bound();
    let depth_bound = params.depth_bound();
    Ok(HittingReport {
        algorithm: *algorithm,
        params,
        n_runs,
        seed,
        hit_radius: Proportion::new(hits, runs),
        radius_bound,
        radius_bound_vacuous: radius_bound > 1.0,
        reach_k: reach_depth[params.k - 1],
        depth_bound,
        depth_bound_vacuous: depth_bound > 1.0,
        reach_depth,
        jumps,
        paths_valid: outcomes.iter().all(|o| o.valid),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t: usize, k: usize, n: usize) -> HittingParams {
        HittingParams { t, k, n, ln_inv_rho: 256.0 }
    }

    #[test]
    fn theory_bound_at_unit_scale_is_vacuous() {
        let p = params(1, 4, 5);
        assert_eq!(p.radius_bound(), 1.0);
        let r = mc_hitting::<f64>(&AlgorithmSpec::RandomSearch { radius: 1.0 }, params(50, 6, 7), 200, 1, 6).unwrap();
        assert!(r.depth_bound_vacuous);
        assert!(!r.warnings().is_empty());
        assert!(r.paths_valid);
    }

    #[test]
    fn deep_interval_is_essentially_never_hit() {
        let r = mc_hitting::<f64>(&AlgorithmSpec::RandomSearch { radius: 1.0 }, params(50, 6, 7), 1000, 3, 6).unwrap();
        assert_eq!(r.reach_depth[5].successes, 0);
        assert!(r.passed());
    }

    #[test]
    fn rejects_small_experiments() {
        assert!(mc_hitting::<f64>(&AlgorithmSpec::RandomSearch { radius: 1.0 }, params(5, 2, 3), 10, 0, 3).is_err());
    }

    #[test]
    fn order_independent_under_rayon() {
        let spec = AlgorithmSpec::Pgd { eta: 0.1, noise: 0.01 };
        let a = mc_hitting::<f64>(&spec, params(20, 3, 4), 150, 5, 4).unwrap();
        let b = mc_hitting::<f64>(&spec, params(20, 3, 4), 150, 5, 4).unwrap();
        assert_eq!(a, b);
    }
}
