//! Scalar abstraction.
//!
//! Everything that touches transcendental functions is generic over [`Real`],
//! implemented for `f32`, `f64` and IEEE binary128 ([`Quad`]). The interval
//! combinatorics only need field operations and are generic over [`Field`], which
//! additionally admits exact rationals.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, ToPrimitive};
pub use f128::f128 as Quad;

/// Ordered field arithmetic, by value or by clone.
pub trait Field: Num + Clone + PartialOrd + Debug {
    /// Lossless (or correctly rounded) conversion from a binary64 value.
    fn from_f64_exact(x: f64) -> Self;

    fn to_f64_lossy(&self) -> f64;

    fn half() -> Self {
        Self::one() / (Self::one() + Self::one())
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }
}

/// Floating scalar used by the whole construction.
pub trait Real:
    Field + Float + FloatConst + FromPrimitive + ToPrimitive + Copy + Send + Sync + 'static
{
    /// Short tag used in instance files and the CLI `--precision` flag.
    const PRECISION: &'static str;

    /// Converts a literal. Panics only for values the type cannot represent at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Bit-exact text encoding.
    fn encode_bits(self) -> String;

    fn decode_bits(s: &str) -> Option<Self>;

    /// Exact rational value of this float.
    fn to_rational(self) -> BigRational;

    /// `tan` as `sin / cos`, the form used throughout for cross-type consistency.
    #[inline]
    fn tan_accurate(self) -> Self {
        self.sin() / self.cos()
    }

    /// Deepest nesting level whose interval width stays above `256 * epsilon`.
    ///
    /// Interval widths shrink like the product of the contraction factors, so
    /// the cap depends only on the precision of the type.
    fn depth_cap() -> usize {
        let floor = Self::epsilon() * Self::lit(256.0);
        let schedule = crate::schedule::AngleSchedule::<Self>::new();
        let mut width = Self::one();
        let mut depth = 0;
        loop {
            let next = width * schedule.delta_unchecked(depth + 1);
            if next < floor {
                return depth;
            }
            width = next;
            depth += 1;
        }
    }
}

impl Field for f64 {
    fn from_f64_exact(x: f64) -> Self {
        x
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Field for f32 {
    fn from_f64_exact(x: f64) -> Self {
        x as f32
    }
    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl Field for Quad {
    fn from_f64_exact(x: f64) -> Self {
        Quad::from(x)
    }
    fn to_f64_lossy(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Field for BigRational {
    fn from_f64_exact(x: f64) -> Self {
        BigRational::from_float(x).expect("finite value")
    }
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const PRECISION: &'static str = "double";

    fn encode_bits(self) -> String {
        format!("{:016x}", self.to_bits())
    }

    fn decode_bits(s: &str) -> Option<Self> {
        u64::from_str_radix(s.trim(), 16).ok().map(f64::from_bits)
    }

    fn to_rational(self) -> BigRational {
        BigRational::from_f64_exact(self)
    }
}

impl Real for f32 {
    const PRECISION: &'static str = "single";

    fn encode_bits(self) -> String {
        format!("{:08x}", self.to_bits())
    }

    fn decode_bits(s: &str) -> Option<Self> {
        u32::from_str_radix(s.trim(), 16).ok().map(f32::from_bits)
    }

    fn to_rational(self) -> BigRational {
        BigRational::from_f64_exact(self as f64)
    }
}

impl Real for Quad {
    const PRECISION: &'static str = "extended";

    fn encode_bits(self) -> String {
        format!("{:032x}", u128::from_le_bytes(self.inner()))
    }

    fn decode_bits(s: &str) -> Option<Self> {
        let bits = u128::from_str_radix(s.trim(), 16).ok()?;
        let negative = bits >> 127 == 1;
        let exp = ((bits >> 112) & 0x7fff) as i32;
        let frac = bits & ((1u128 << 112) - 1);
        if exp == 0x7fff {
            return Some(match (frac, negative) {
                (0, false) => Quad::INFINITY,
                (0, true) => Quad::NEG_INFINITY,
                _ => Quad::NAN,
            });
        }
        let (mantissa, power) = if exp == 0 {
            (frac, -16382 - 112)
        } else {
            (frac | (1u128 << 112), exp - 16383 - 112)
        };
        // Products of powers of two are exact, so this rebuilds the value bit for bit.
        let mut value = Quad::from_u128(mantissa)?;
        let mut left = power;
        let step = |k: i32| Quad::from(2.0f64.powi(k));
        while left != 0 {
            let k = left.clamp(-1000, 1000);
            value = value * step(k);
            left -= k;
        }
        Some(if negative { -value } else { value })
    }

    fn to_rational(self) -> BigRational {
        let bits = u128::from_le_bytes(self.inner());
        let negative = bits >> 127 == 1;
        let exp = ((bits >> 112) & 0x7fff) as i64;
        let frac = bits & ((1u128 << 112) - 1);
        assert!(exp != 0x7fff, "non-finite value has no rational image");
        let (mantissa, power) = if exp == 0 {
            (frac, -16382 - 112)
        } else {
            (frac | (1u128 << 112), exp - 16383 - 112)
        };
        let mut q = BigRational::from_integer(BigInt::from(mantissa));
        let scale = BigRational::from_integer(BigInt::from(2u8).pow(power.unsigned_abs() as u32));
        q = if power >= 0 { q * scale } else { q / scale };
        if negative {
            -q
        } else {
            q
        }
    }
}

/// Rational with value `num / den`, used for exact thresholds in tests.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;

    #[test]
    fn bit_encoding_round_trips() {
        let x = 0.3f64;
        assert_eq!(f64::decode_bits(&x.encode_bits()), Some(x));
        let t = Quad::from(1.0) / Quad::from(3.0);
        let back = Quad::decode_bits(&t.encode_bits()).unwrap();
        assert!(back.bitwise_eq(t));
        assert_eq!(f32::decode_bits(&1.5f32.encode_bits()), Some(1.5));
    }

    #[test]
    fn depth_caps_increase_with_precision() {
        let single = f32::depth_cap();
        let double = f64::depth_cap();
        let extended = Quad::depth_cap();
        assert_eq!(double, 8);
        assert!(single < double && double < extended, "{single} {double} {extended}");
    }

    #[test]
    fn rational_image_is_exact() {
        let q = Quad::from(0.1).to_rational();
        assert_eq!(q, BigRational::from_float(0.1).unwrap());
        let third = (Quad::from(1.0) / Quad::from(3.0)).to_rational();
        let err = (third - ratio(1, 3)).abs();
        assert!(err < BigRational::from_float(1e-34).unwrap());
        assert_eq!((-Quad::from(2.5)).to_rational(), ratio(-5, 2));
        assert_eq!(ratio(1, 2), BigRational::half());
    }
}
