use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Binomial proportion with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (lo, hi) = wilson(successes, trials, Z95);
        let estimate = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        Proportion { successes, trials, estimate, lo, hi }
    }

    /// Binomial standard error evaluated at the reference probability `p`.
    pub fn standard_error_at(&self, p: f64) -> f64 {
        if self.trials == 0 {
            return 0.0;
        }
        (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / self.trials as f64).sqrt()
    }

    /// `estimate ≤ bound + 3·SE(bound)`.
    pub fn below(&self, bound: f64) -> bool {
        self.estimate <= bound + 3.0 * self.standard_error_at(bound)
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 0/1000 and 10/100 at 95%, cross-checked with an independent evaluation.
        let (lo, hi) = wilson(0, 1000, Z95);
        assert!(lo < 1e-15);
        assert!((hi - 0.003_826).abs() < 1e-6);
        let (lo, hi) = wilson(10, 100, Z95);
        assert!((lo - 0.055_229).abs() < 1e-6);
        assert!((hi - 0.174_366).abs() < 1e-6);
    }

    #[test]
    fn below_uses_three_standard_errors() {
        let p = Proportion::new(60, 100);
        assert!(p.below(0.5));
        assert!(!p.below(0.4));
        assert!(Proportion::new(5, 5).below(1.0));
    }
}
