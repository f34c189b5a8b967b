//! Non-negative extended reals `[0, ∞]`.
//!
//! Orlicz functions may take the value `+∞`, and the characteristic-norm
//! formula routinely divides by zero or by infinity, so the library carries
//! these values in a dedicated type instead of raw `f64`. The arithmetic
//! conventions are total:
//!
//! ```text
//! 1/0 = ∞    1/∞ = 0    0·∞ = 0    x + ∞ = ∞
//! ```
//!
//! Comparison is a total order with `∞` as the maximum.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A value in `[0, ∞]`. NaN and negative values are unrepresentable.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtReal(pub(crate) f64);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(0.0);
    pub const ONE: ExtReal = ExtReal(1.0);
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);

    /// Wraps a finite or infinite non-negative float.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::Domain(format!("extended real must lie in [0, inf], got {value}")));
        }
        // normalise -0.0
        Ok(ExtReal(value + 0.0))
    }

    pub fn finite(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Domain(format!("expected a finite value, got {value}")));
        }
        Self::new(value)
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// The underlying float; `f64::INFINITY` for `∞`.
    pub fn value(self) -> f64 {
        self.0
    }

    /// `Some(x)` when finite.
    pub fn to_finite(self) -> Option<f64> {
        self.is_finite().then_some(self.0)
    }

    /// `1/x` with `1/0 = ∞` and `1/∞ = 0`.
    pub fn recip(self) -> ExtReal {
        if self.0 == 0.0 {
            ExtReal::INFINITY
        } else if self.0.is_infinite() {
            ExtReal::ZERO
        } else {
            ExtReal(1.0 / self.0)
        }
    }

    /// `self / rhs` as `self · (1/rhs)`, so `0/0 = 0·∞ = 0` and `∞/∞ = ∞·0 = 0`.
    pub fn div(self, rhs: ExtReal) -> ExtReal {
        self * rhs.recip()
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        // both operands are non-negative, so the IEEE sum never produces NaN
        ExtReal(self.0 + rhs.0)
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;

    fn mul(self, rhs: ExtReal) -> ExtReal {
        if self.0 == 0.0 || rhs.0 == 0.0 {
            ExtReal::ZERO
        } else {
            ExtReal(self.0 * rhs.0)
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl std::iter::Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::ZERO, |acc, x| acc + x)
    }
}

impl TryFrom<f64> for ExtReal {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        ExtReal::new(value)
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

/// Finite values serialize as numbers, `∞` as the string `"inf"` (JSON has no infinity).
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(v: f64) -> ExtReal {
        ExtReal::new(v).unwrap()
    }

    #[test]
    fn conventions() {
        assert_eq!(ExtReal::ZERO.recip(), ExtReal::INFINITY);
        assert_eq!(ExtReal::INFINITY.recip(), ExtReal::ZERO);
        assert_eq!(ExtReal::ZERO * ExtReal::INFINITY, ExtReal::ZERO);
        assert_eq!(ExtReal::INFINITY * ExtReal::ZERO, ExtReal::ZERO);
        assert_eq!(x(3.0) + ExtReal::INFINITY, ExtReal::INFINITY);
        assert_eq!(x(4.0).recip(), x(0.25));
        assert_eq!(x(6.0).div(x(2.0)), x(3.0));
        assert_eq!(ExtReal::INFINITY.div(ExtReal::INFINITY), ExtReal::ZERO);
    }

    #[test]
    fn rejects_nan_and_negatives() {
        assert!(ExtReal::new(f64::NAN).is_err());
        assert!(ExtReal::new(-1e-300).is_err());
        assert!(ExtReal::finite(f64::INFINITY).is_err());
        assert_eq!(ExtReal::new(-0.0).unwrap().value().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn total_order_with_infinity_on_top() {
        let mut v = vec![ExtReal::INFINITY, x(2.0), ExtReal::ZERO, x(1e300)];
        v.sort();
        assert_eq!(v, vec![ExtReal::ZERO, x(2.0), x(1e300), ExtReal::INFINITY]);
        assert_eq!(x(1.0).max(ExtReal::INFINITY), ExtReal::INFINITY);
        assert_eq!(x(1.0).min(ExtReal::INFINITY), x(1.0));
    }

    #[test]
    fn sum_propagates_infinity() {
        let total: ExtReal = [x(1.0), ExtReal::INFINITY, x(2.0)].into_iter().sum();
        assert!(total.is_infinite());
    }
}
