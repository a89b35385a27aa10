//! Exact integer scalars.
//!
//! The kernel works over a ring of exact integers and keeps rational values
//! as numerator/denominator pairs. Machine-word rings report overflow instead
//! of wrapping, so callers can retry the same computation in a wider ring and
//! get bit-identical results.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

/// An exact signed integer ring with overflow-aware arithmetic.
pub trait ExactInt: Clone + Ord + Zero + One + Signed + Integer + Debug + Display + Send + Sync + 'static {
    /// Human-readable ring name, used in diagnostics.
    const NAME: &'static str;

    fn from_i64(value: i64) -> Self;
    fn from_bigint(value: &BigInt) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
    fn to_i64(&self) -> Option<i64>;

    fn add_exact(&self, other: &Self) -> Option<Self>;
    fn sub_exact(&self, other: &Self) -> Option<Self>;
    fn mul_exact(&self, other: &Self) -> Option<Self>;
    /// Division that is known to be exact. Returns `None` on overflow.
    fn div_exact(&self, other: &Self) -> Option<Self>;
    fn neg_exact(&self) -> Option<Self>;

    /// `a * b - c * d` without intermediate rounding.
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
        a.mul_exact(b)?.sub_exact(&c.mul_exact(d)?)
    }

    /// Converts into another exact ring, failing when the value does not fit.
    fn cast<U: ExactInt>(&self) -> Option<U> {
        match self.to_i64() {
            Some(v) => Some(U::from_i64(v)),
            None => U::from_bigint(&self.to_bigint()),
        }
    }
}

macro_rules! impl_exact_prim {
    ($t:ty) => {
        impl ExactInt for $t {
            const NAME: &'static str = stringify!($t);

            fn from_i64(value: i64) -> Self {
                value as $t
            }
            fn from_bigint(value: &BigInt) -> Option<Self> {
                <$t as num_traits::FromPrimitive>::from_i128(value.to_i128()?)
            }
            fn to_bigint(&self) -> BigInt {
                BigInt::from(*self)
            }
            fn to_i64(&self) -> Option<i64> {
                ToPrimitive::to_i64(self)
            }
            fn add_exact(&self, other: &Self) -> Option<Self> {
                CheckedAdd::checked_add(self, other)
            }
            fn sub_exact(&self, other: &Self) -> Option<Self> {
                CheckedSub::checked_sub(self, other)
            }
            fn mul_exact(&self, other: &Self) -> Option<Self> {
                CheckedMul::checked_mul(self, other)
            }
            fn div_exact(&self, other: &Self) -> Option<Self> {
                debug_assert!(*other != 0 && self % other == 0, "inexact division");
                CheckedDiv::checked_div(self, other)
            }
            fn neg_exact(&self) -> Option<Self> {
                self.checked_neg()
            }
        }
    };
}

impl_exact_prim!(i64);
impl_exact_prim!(i128);

impl ExactInt for BigInt {
    const NAME: &'static str = "BigInt";

    fn from_i64(value: i64) -> Self {
        BigInt::from(value)
    }
    fn from_bigint(value: &BigInt) -> Option<Self> {
        Some(value.clone())
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn to_i64(&self) -> Option<i64> {
        ToPrimitive::to_i64(self)
    }
    fn add_exact(&self, other: &Self) -> Option<Self> {
        Some(self + other)
    }
    fn sub_exact(&self, other: &Self) -> Option<Self> {
        Some(self - other)
    }
    fn mul_exact(&self, other: &Self) -> Option<Self> {
        Some(self * other)
    }
    fn div_exact(&self, other: &Self) -> Option<Self> {
        debug_assert!((self % other).is_zero(), "inexact division");
        Some(self / other)
    }
    fn neg_exact(&self) -> Option<Self> {
        Some(-self)
    }
}

/// Builds the reduced rational `numer / denom`.
pub fn ratio<T: ExactInt>(numer: &T, denom: &T) -> BigRational {
    BigRational::new(numer.to_bigint(), denom.to_bigint())
}

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p.trim().parse().ok()?, q))
        }
        None => Some(BigRational::from_integer(text.parse().ok()?)),
    }
}

/// Formats a rational as `"p/q"` in lowest terms, or `"p"` when integral.
pub fn format_rational(value: &BigRational) -> String {
    value.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_is_reported() {
        assert_eq!(i64::MAX.add_exact(&1), None);
        assert_eq!(i64::MIN.neg_exact(), None);
        assert_eq!(<i64 as ExactInt>::cross(&i64::MAX, &2, &0, &0), None);
        assert_eq!(3i64.mul_exact(&4), Some(12));
    }

    #[test]
    fn casts_between_rings() {
        let big: BigInt = BigInt::from(i64::MAX) * 4;
        assert_eq!(ExactInt::cast::<i64>(&big), None);
        assert_eq!(ExactInt::cast::<i128>(&big), Some(i64::MAX as i128 * 4));
        assert_eq!((-7i128).cast::<i64>(), Some(-7));
    }

    #[test]
    fn rational_text_form() {
        let r = parse_rational("-2/6").unwrap();
        assert_eq!(format_rational(&r), "-1/3");
        assert_eq!(format_rational(&parse_rational("4/2").unwrap()), "2");
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }
}
