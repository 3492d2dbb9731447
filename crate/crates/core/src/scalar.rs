//! Scalar abstraction shared by every module.
//!
//! Monetary quantities run on [`rust_decimal::Decimal`] so notionals are
//! exact; `f64`/`f32` instantiations exist for fast exploratory work.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};
use rust_decimal::{Decimal, MathematicalOps, RoundingStrategy};

/// Numeric type usable for prices, sizes and notionals.
pub trait Scalar:
    Num
    + Signed
    + Copy
    + PartialOrd
    + Debug
    + Display
    + FromStr
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Send
    + Sync
    + 'static
{
    fn floor(self) -> Self;

    /// Round half away from zero to the nearest integer.
    fn round(self) -> Self;

    fn sqrt(self) -> Self;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer is representable")
    }

    /// `num / den` computed in the scalar's own arithmetic.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    /// 10⁴: one basis point is `1 / bps_scale()` of a price.
    fn bps_scale() -> Self {
        Self::from_int(10_000)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn parse_str(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
}

impl Scalar for f64 {
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn round(self) -> Self {
        f64::round(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

impl Scalar for f32 {
    fn floor(self) -> Self {
        f32::floor(self)
    }
    fn round(self) -> Self {
        f32::round(self)
    }
    fn sqrt(self) -> Self {
        f32::sqrt(self)
    }
}

impl Scalar for Decimal {
    fn floor(self) -> Self {
        Decimal::floor(&self)
    }
    fn round(self) -> Self {
        self.round_dp_with_strategy(0, RoundingStrategy::MidpointAwayFromZero)
    }
    fn sqrt(self) -> Self {
        MathematicalOps::sqrt(&self).unwrap_or(Decimal::ZERO)
    }
    fn parse_str(s: &str) -> Option<Self> {
        let s = s.trim();
        // scientific notation shows up in machine-written JSON numbers
        Decimal::from_str(s)
            .ok()
            .or_else(|| Decimal::from_scientific(s).ok())
    }
}
