use crate::scalar::Real;

/// `σ_μ(z)`: zero for `z ≤ 0`, `z²/8μ` on `(0, μ]`, `z/4 − μ/8` beyond.
/// Continuously differentiable, nondecreasing and ¼-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothCap<S> {
    pub mu: S,
}

impl<S: Real> SmoothCap<S> {
    pub fn new(mu: S) -> Self {
        SmoothCap { mu }
    }

    pub fn value(&self, z: S) -> S {
        if z <= S::zero() {
            S::zero()
        } else if z <= self.mu {
            z * z / (S::lit(8.0) * self.mu)
        } else {
            z / S::lit(4.0) - self.mu / S::lit(8.0)
        }
    }

    pub fn derivative(&self, z: S) -> S {
        if z <= S::zero() {
            S::zero()
        } else if z <= self.mu {
            z / (S::lit(4.0) * self.mu)
        } else {
            S::lit(0.25)
        }
    }
}
