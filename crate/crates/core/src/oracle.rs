//! First-order oracles.
//!
//! An oracle answers `x ↦ (f(x), g)` with `g` the minimal-norm element of the
//! Clarke subdifferential. Algorithms only ever see these responses.

use serde::Serialize;

use crate::embed::{norm, HFunction, HardInstance};
use crate::hard1d::HardProfile;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResponse<S> {
    pub value: S,
    pub subgradient: Vec<S>,
}

impl<S: Real> OracleResponse<S> {
    pub fn grad_norm(&self) -> S {
        norm(&self.subgradient)
    }
}

pub trait FirstOrderOracle<S: Real>: Sync {
    fn dim(&self) -> usize;

    fn query(&self, x: &[S]) -> OracleResponse<S>;

    fn value(&self, x: &[S]) -> S {
        self.query(x).value
    }
}

impl<S: Real> FirstOrderOracle<S> for HardInstance<S> {
    fn dim(&self) -> usize {
        self.d()
    }

    fn query(&self, x: &[S]) -> OracleResponse<S> {
        OracleResponse { value: self.eval_f(x), subgradient: self.min_norm_subgrad(x) }
    }

    fn value(&self, x: &[S]) -> S {
        self.eval_f(x)
    }
}

/// The cap-free `h`.
impl<S: Real> FirstOrderOracle<S> for HFunction<S> {
    fn dim(&self) -> usize {
        self.d()
    }

    fn query(&self, x: &[S]) -> OracleResponse<S> {
        OracleResponse { value: self.eval(x), subgradient: self.subgrad(x).min_norm() }
    }

    fn value(&self, x: &[S]) -> S {
        self.eval(x)
    }
}

/// A one-dimensional profile queried on its own (`d = 1`).
impl<S: Real> FirstOrderOracle<S> for HardProfile<S> {
    fn dim(&self) -> usize {
        1
    }

    fn query(&self, x: &[S]) -> OracleResponse<S> {
        OracleResponse { value: self.eval(x[0]), subgradient: vec![self.subdiff(x[0]).min_norm()] }
    }

    fn value(&self, x: &[S]) -> S {
        self.eval(x[0])
    }
}

/// `x ↦ |x|` on the line.
#[derive(Debug, Clone, Copy, Default)]
pub struct AbsValue;

impl<S: Real> FirstOrderOracle<S> for AbsValue {
    fn dim(&self) -> usize {
        1
    }

    fn query(&self, x: &[S]) -> OracleResponse<S> {
        let v = x[0];
        let g = if v > S::zero() {
            S::one()
        } else if v < S::zero() {
            -S::one()
        } else {
            S::zero()
        };
        OracleResponse { value: v.abs(), subgradient: vec![g] }
    }
}

/// `x ↦ ‖x‖` in `R^d`.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanNorm(pub usize);

impl<S: Real> FirstOrderOracle<S> for EuclideanNorm {
    fn dim(&self) -> usize {
        self.0
    }

    fn query(&self, x: &[S]) -> OracleResponse<S> {
        let n = norm(x);
        let g = if n > S::zero() {
            x.iter().map(|&v| v / n).collect()
        } else {
            vec![S::zero(); x.len()]
        };
        OracleResponse { value: n, subgradient: g }
    }
}

/// One oracle call on a hard instance.
pub fn query<S: Real>(instance: &HardInstance<S>, x: &[S]) -> OracleResponse<S> {
    instance.query(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::AngleSchedule;
    use rand::{Rng, SeedableRng};

    #[test]
    fn deterministic_and_local() {
        let inst =
            HardInstance::<f64>::generate(&AngleSchedule::new(), 4, &"0110".parse().unwrap(), 1e-3, 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
            let a = inst.query(&x);
            assert_eq!(a, inst.query(&x));
            assert!(a.grad_norm() <= 1.0);
            if inst.q(&inst.shifted(&x)) < 0.0 {
                assert_eq!(a, inst.base().query(&x));
            }
        }
    }

    #[test]
    fn simple_functions() {
        let r: OracleResponse<f64> = AbsValue.query(&[-2.0]);
        assert_eq!((r.value, r.subgradient[0]), (2.0, -1.0));
        let r: OracleResponse<f64> = AbsValue.query(&[0.0]);
        assert_eq!(r.subgradient[0], 0.0);
        let r: OracleResponse<f64> = EuclideanNorm(2).query(&[3.0, 4.0]);
        assert_eq!(r.value, 5.0);
        assert!((r.subgradient[0] - 0.6).abs() < 1e-16);
    }
}
