use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::stats::Proportion;
use crate::algorithms::{run, AlgorithmSpec};
use crate::embed::{choose_w_mu, dot, norm, HFunction};
use crate::error::{HardError, Result};
use crate::intervals::BitString;
use crate::rng::{derive, stream, Stream};
use crate::scalar::Real;
use crate::schedule::AngleSchedule;

pub const ALIGNMENT_THRESHOLD: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub d: usize,
    pub t: usize,
    pub n_runs: usize,
    pub algorithm: AlgorithmSpec,
    /// Runs with `max_t ⟨w̄, (x_t − x*)/‖x_t − x*‖⟩ ≥ 1/3`.
    pub exceed: Proportion,
    pub max_alignment: f64,
    /// `T·exp(−d/36)`.
    pub bound: f64,
    pub vacuous: bool,
}

impl ConcentrationReport {
    pub fn passed(&self) -> bool {
        self.vacuous || self.exceed.below(self.bound)
    }
}

/// Runs the algorithm on the cap-free `h` (fresh `σ` of length `depth`), then
/// draws `w` independently and measures how well it aligns with the iterates.
pub fn concentration_check<S: Real>(
    d: usize,
    t: usize,
    n_runs: usize,
    seed: u64,
    algorithm: &AlgorithmSpec,
    depth: usize,
) -> Result<ConcentrationReport> {
    if d < 2 {
        return Err(HardError::Dimension(d));
    }
    let schedule = AngleSchedule::<S>::new();
    let per_run: Vec<f64> = (0..n_runs as u64)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let sigma = BitString::random(depth, &mut stream(seed, Stream::Sigma, r));
            let h = HFunction::new(&schedule, d, &sigma)?;
            let tr = run(algorithm, &h, &vec![S::zero(); d], t, derive(seed, Stream::Algorithm, r))?;
            let (w, _) = choose_w_mu::<S, _>(d, S::one(), &mut stream(seed, Stream::Direction, r))?;
            let nw = norm(&w);
            let w_bar: Vec<S> = w.iter().map(|&v| v / nw).collect();
            let mut best = f64::NEG_INFINITY;
            for x in &tr.iterates {
                let y: Vec<S> = x.iter().zip(h.x_star()).map(|(&a, &b)| a - b).collect();
                let ny = norm(&y);
                if ny > S::zero() {
                    best = best.max((dot(&w_bar, &y) / ny).to_f64_lossy());
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let exceed = per_run.iter().filter(|&&a| a >= ALIGNMENT_THRESHOLD).count() as u64;
    let bound = t as f64 * (-(d as f64) / 36.0).exp();
    Ok(ConcentrationReport {
        d,
        t,
        n_runs,
        algorithm: *algorithm,
        exceed: Proportion::new(exceed, n_runs as u64),
        max_alignment: per_run.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        bound,
        vacuous: bound > 1.0,
    })
}

/// `Pr[⟨w̄, e_1⟩ ≥ threshold]` for `w̄` uniform on `S^{d−1}`.
pub fn sphere_tail(d: usize, threshold: f64, n: usize, seed: u64) -> Proportion {
    let mut rng = stream(seed, Stream::Sampling, d as u64);
    let mut hits = 0u64;
    for _ in 0..n {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        if g[0] / norm(&g) >= threshold {
            hits += 1;
        }
    }
    Proportion::new(hits, n as u64)
}
