use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algorithms::uniform_in_ball;
use crate::embed::minnorm::segment_min_norm;
use crate::embed::{dot, norm, STATIONARITY_C};
use crate::error::{HardError, Result};
use crate::oracle::FirstOrderOracle;
use crate::scalar::Real;

pub const DEFAULT_STEP_RATIO: f64 = 1.0 / 1000.0;
pub const DEFAULT_BALL_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Completed,
    /// A minimal-norm subgradient shorter than `c/10` was met.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowResult<S> {
    pub status: FlowStatus,
    pub endpoint: Vec<S>,
    pub start_value: S,
    pub end_value: S,
    pub decrease: S,
    /// Lowest value seen along the path (every path point lies in the ball).
    pub path_min: S,
    pub path_min_point: Vec<S>,
    pub steps: usize,
    pub arc_length: S,
    /// Smallest minimal-subgradient norm seen along the path.
    pub min_grad_norm: S,
}

/// Forward-Euler integration of `ẋ = −ḡ/‖ḡ‖` over arc length `delta`, with
/// `ḡ` the minimal-norm subgradient returned by the oracle.
///
/// When two consecutive subgradients point against each other the path is
/// straddling a kink; the step then uses the minimal-norm point of the
/// segment between them, which follows the kink instead of zigzagging
/// across it.
pub fn subgradient_flow<S: Real, O: FirstOrderOracle<S> + ?Sized>(
    oracle: &O,
    x0: &[S],
    delta: S,
    eta: S,
) -> Result<FlowResult<S>> {
    if !(delta > S::zero() && delta <= S::one()) {
        return Err(HardError::OutOfRange { name: "delta", range: "(0, 1]", value: delta.to_f64_lossy() });
    }
    if !(eta > S::zero() && eta <= delta / S::lit(100.0)) {
        return Err(HardError::OutOfRange { name: "eta", range: "(0, delta/100]", value: eta.to_f64_lossy() });
    }
    let stall = S::lit(STATIONARITY_C / 10.0);
    let first = oracle.query(x0);
    let start_value = first.value;
    let mut x = x0.to_vec();
    let mut g = first.subgradient;
    let mut value = start_value;
    let mut prev: Option<Vec<S>> = None;
    let mut walked = S::zero();
    let mut steps = 0usize;
    let mut path_min = start_value;
    let mut path_min_point = x.clone();
    let mut min_grad = norm(&g);
    let mut status = FlowStatus::Completed;
    while walked < delta {
        let gn = norm(&g);
        min_grad = min_grad.min(gn);
        if gn < stall {
            status = FlowStatus::Stalled;
            break;
        }
        let mut dir = g.clone();
        if let Some(p) = &prev {
            if dot(p, &g) < S::zero() {
                let m = segment_min_norm(p, &g);
                if norm(&m) >= stall {
                    dir = m;
                }
            }
        }
        let h = eta.min(delta - walked);
        let dn = norm(&dir);
        for (xi, &di) in x.iter_mut().zip(&dir) {
            *xi = *xi - h * di / dn;
        }
        walked = walked + h;
        steps += 1;
        let r = oracle.query(&x);
        value = r.value;
        if value < path_min {
            path_min = value;
            path_min_point = x.clone();
        }
        prev = Some(std::mem::replace(&mut g, r.subgradient));
    }
    Ok(FlowResult {
        status,
        endpoint: x,
        start_value,
        end_value: value,
        decrease: start_value - value,
        path_min,
        path_min_point,
        steps,
        arc_length: walked,
        min_grad_norm: min_grad,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecreaseCertificate<S> {
    pub certified: bool,
    pub value: S,
    pub witness: Vec<S>,
    pub witness_value: S,
    /// `f(x) − f(witness)`.
    pub decrease: S,
    /// `delta·c`.
    pub required: S,
    pub flow_status: FlowStatus,
    pub min_grad_norm: S,
}

/// Searches `B(x, delta)` for a point below `f(x) − delta·c`: the flow path
/// first, then `samples` uniform ball points drawn from `seed`.
pub fn local_decrease_certificate<S: Real, O: FirstOrderOracle<S> + ?Sized>(
    oracle: &O,
    x: &[S],
    delta: S,
    c: S,
    samples: usize,
    seed: u64,
) -> Result<DecreaseCertificate<S>> {
    let flow = subgradient_flow(oracle, x, delta, delta * S::lit(DEFAULT_STEP_RATIO))?;
    let mut witness = flow.path_min_point.clone();
    let mut best = flow.path_min;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let off = uniform_in_ball(x.len(), delta, &mut rng);
        let z: Vec<S> = x.iter().zip(&off).map(|(&a, &b)| a + b).collect();
        let v = oracle.value(&z);
        if v < best {
            best = v;
            witness = z;
        }
    }
    let required = delta * c;
    let decrease = flow.start_value - best;
    Ok(DecreaseCertificate {
        certified: decrease > required,
        value: flow.start_value,
        witness,
        witness_value: best,
        decrease,
        required,
        flow_status: flow.status,
        min_grad_norm: flow.min_grad_norm,
    })
}

/// Certificates for every iterate with `f ≥ threshold`, one per radius in
/// `deltas`; `None` for the other iterates. Iterate `t` samples with the
/// stream `(seed, Sampling, t)`.
pub fn certify_iterates<S: Real, O: FirstOrderOracle<S> + ?Sized>(
    oracle: &O,
    iterates: &[Vec<S>],
    deltas: &[S],
    c: S,
    threshold: S,
    samples: usize,
    seed: u64,
) -> Result<Vec<Option<Vec<DecreaseCertificate<S>>>>> {
    iterates
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if oracle.value(x) < threshold {
                return Ok(None);
            }
            let s = crate::rng::derive(seed, crate::rng::Stream::Sampling, i as u64 + 1);
            deltas
                .iter()
                .map(|&delta| local_decrease_certificate(oracle, x, delta, c, samples, s))
                .collect::<Result<Vec<_>>>()
                .map(Some)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{AbsValue, EuclideanNorm};

    #[test]
    fn radial_flow_on_the_norm() {
        let o = EuclideanNorm(3);
        let x0 = [0.3, -0.4, 0.0];
        for delta in [0.1, 0.5, 1.0] {
            let eta = delta / 1000.0;
            let r = subgradient_flow(&o, &x0, delta, eta).unwrap();
            let expected: f64 = f64::min(delta, 0.5);
            assert!((r.decrease - expected).abs() <= eta + 1e-12, "delta {delta}: {}", r.decrease);
            let moved = norm(&r.endpoint.iter().zip(&x0).map(|(a, b)| a - b).collect::<Vec<_>>());
            assert!(moved <= delta * (1.0 + 1e-9));
            assert!(moved <= delta + 10.0 * eta);
        }
    }

    #[test]
    fn stalls_at_a_stationary_point() {
        let r = subgradient_flow(&AbsValue, &[0.0f64], 0.5, 0.001).unwrap();
        assert_eq!(r.status, FlowStatus::Stalled);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn rejects_coarse_steps() {
        assert!(subgradient_flow(&AbsValue, &[1.0f64], 0.5, 0.1).is_err());
        assert!(subgradient_flow(&AbsValue, &[1.0f64], 1.5, 0.001).is_err());
    }

    #[test]
    fn no_certificate_at_a_minimum() {
        let c = local_decrease_certificate(&EuclideanNorm(2), &[0.0f64, 0.0], 0.5, 0.01, 200, 1).unwrap();
        assert!(!c.certified);
        let c = local_decrease_certificate(&EuclideanNorm(2), &[1.0f64, 0.0], 0.5, 0.01, 200, 1).unwrap();
        assert!(c.certified);
        let dist = norm(&[c.witness[0] - 1.0, c.witness[1]]);
        assert!(dist <= 0.5 * (1.0 + 1e-9));
    }
}
