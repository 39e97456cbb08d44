//! Exact arbitrary-precision fractions.
//!
//! [`Rational`] is always kept in canonical form: positive denominator and
//! coprime numerator/denominator. Its text form is `"p/q"` (zero is `"0/1"`),
//! which is the representation used by every file format in this crate.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseRationalError;

/// Bits of precision used for rational square-root bounds.
pub const SQRT_BOUND_BITS: u32 = 16;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer/denom` and reduces it. Panics if `denom == 0`.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `2^exp` for any signed exponent.
    pub fn pow2(exp: i64) -> Self {
        let mag = BigInt::one() << exp.unsigned_abs();
        if exp >= 0 {
            Rational::from_integer(mag)
        } else {
            Rational(BigRational::new_raw(BigInt::one(), mag))
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn signum(&self) -> i32 {
        match self.0.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// The integer value, if the denominator is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.0.numer().clone())
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_integer().and_then(|n| n.to_i64())
    }

    pub fn pow(&self, exp: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), exp as usize))
    }

    /// Size measure used by the rational enumeration: `max(|p|, q)`.
    pub fn height(&self) -> BigUint {
        let p = self.numer().magnitude();
        let q = self.denom().magnitude();
        p.max(q).clone()
    }

    /// Smallest integer `e` with `|self| <= 2^e`. Zero maps to `i64::MIN`.
    pub fn ceil_log2(&self) -> i64 {
        if self.is_zero() {
            return i64::MIN;
        }
        let p = self.numer().magnitude();
        let q = self.denom().magnitude();
        // 2^(bits(p)-1) <= p < 2^bits(p), same for q, so log2(p/q) lies in
        // (bp - 1 - bq, bp - bq + 1); start one above and walk down.
        let mut e = p.bits() as i64 - q.bits() as i64 + 1;
        while le_pow2(p, q, e - 1) {
            e -= 1;
        }
        e
    }

    /// Upper bound on `sqrt(self)` with error at most `2^-bits`; exact for
    /// perfect squares. Negative input is treated as zero.
    pub fn sqrt_upper(&self, bits: u32) -> Self {
        let (root, denom, exact) = self.sqrt_floor_parts(bits);
        if exact {
            Rational::new(root, denom)
        } else {
            Rational::new(root + 1u32, denom)
        }
    }

    /// Lower bound on `sqrt(self)` with error at most `2^-bits`; exact for
    /// perfect squares.
    pub fn sqrt_lower(&self, bits: u32) -> Self {
        let (root, denom, _) = self.sqrt_floor_parts(bits);
        Rational::new(root, denom)
    }

    // sqrt(p/q) = sqrt(p q 4^bits) / (q 2^bits)
    fn sqrt_floor_parts(&self, bits: u32) -> (BigInt, BigInt, bool) {
        if !self.is_positive() {
            return (BigInt::zero(), BigInt::one(), true);
        }
        let p = self.numer();
        let q = self.denom();
        let scaled: BigInt = (p * q) << (2 * bits as usize);
        let root = scaled.sqrt();
        let exact = &root * &root == scaled;
        (root, q << bits as usize, exact)
    }

    /// Rounds to the dyadic grid `2^-bits`, toward negative infinity.
    pub fn floor_dyadic(&self, bits: u32) -> Self {
        let scaled = self * &Rational::pow2(bits as i64);
        Rational::new(scaled.floor(), BigInt::one() << bits as usize)
    }

    /// Rounds to the dyadic grid `2^-bits`, toward positive infinity.
    pub fn ceil_dyadic(&self, bits: u32) -> Self {
        let scaled = self * &Rational::pow2(bits as i64);
        Rational::new(scaled.ceil(), BigInt::one() << bits as usize)
    }

    /// Truncated decimal rendering with `digits` fractional digits, for
    /// human-readable reports only.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10u32), digits);
        let scaled = (self.numer().abs() * scale) / self.denom();
        let mut s = scaled.to_string();
        if s.len() <= digits {
            s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
        }
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if self.is_negative() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// Vectors of rationals compared by squared Euclidean norm stay exact.
    pub fn dist_sq(a: &[Rational], b: &[Rational]) -> Rational {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x - y;
                &d * &d
            })
            .sum()
    }

    pub fn max_of<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
        values.into_iter().max().cloned()
    }
}

// p/q <= 2^e
fn le_pow2(p: &BigUint, q: &BigUint, e: i64) -> bool {
    if e >= 0 {
        p <= &(q << e as usize)
    } else {
        &(p << (-e) as usize) <= q
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `"p/q"` or a bare integer `"p"`. Decimal notation is rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        let valid_int = |x: &str| {
            let digits = x.strip_prefix('-').unwrap_or(x);
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        };
        let (p, q) = match t.split_once('/') {
            Some((p, q)) => (p, q),
            None => (t, "1"),
        };
        if !valid_int(p) || !valid_int(q) {
            return Err(err());
        }
        let p: BigInt = p.parse().map_err(|_| err())?;
        let q: BigInt = q.parse().map_err(|_| err())?;
        if !q.is_positive() {
            return Err(err());
        }
        Ok(Rational::new(p, q))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && self.0.numer() == &BigInt::from(*other)
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Rational::from(*other)))
    }
}

// Integer operands skip the gcd normalization, which dominates on large codes.
fn add_q(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_integer() && b.is_integer() {
        BigRational::from_integer(a.numer() + b.numer())
    } else {
        a + b
    }
}

fn sub_q(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_integer() && b.is_integer() {
        BigRational::from_integer(a.numer() - b.numer())
    } else {
        a - b
    }
}

fn mul_q(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_integer() && b.is_integer() {
        BigRational::from_integer(a.numer() * b.numer())
    } else {
        a * b
    }
}

fn div_q(a: &BigRational, b: &BigRational) -> BigRational {
    a / b
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($op(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($op(&self.0, &rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($op(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($op(&self.0, &rhs.0))
            }
        }
    };
}

binop!(Add, add, add_q);
binop!(Sub, sub, sub_q);
binop!(Mul, mul, mul_q);
binop!(Div, div, div_q);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 = add_q(&self.0, &rhs.0);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 = sub_q(&self.0, &rhs.0);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 = mul_q(&self.0, &rhs.0);
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// Shorthand for `Rational::new(p, q)`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_form() {
        assert_eq!(rat(2, 4).to_string(), "1/2");
        assert_eq!(rat(3, -6).to_string(), "-1/2");
        assert_eq!(Rational::zero().to_string(), "0/1");
        assert_eq!(rat(0, -5).to_string(), "0/1");
    }

    #[test]
    fn parse() {
        assert_eq!("5/7".parse::<Rational>().unwrap(), rat(5, 7));
        assert_eq!("-3".parse::<Rational>().unwrap(), rat(-3, 1));
        assert_eq!("6/4".parse::<Rational>().unwrap(), rat(3, 2));
        for bad in ["0.5", "1/0", "1/-2", "", "/3", "1e3", "a/b", "--1", "1/2/3"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad}");
        }
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(rat(1, 1).ceil_log2(), 0);
        assert_eq!(rat(2, 1).ceil_log2(), 1);
        assert_eq!(rat(3, 1).ceil_log2(), 2);
        assert_eq!(rat(1, 2).ceil_log2(), -1);
        assert_eq!(rat(3, 4).ceil_log2(), 0);
        assert_eq!(rat(-5, 1).ceil_log2(), 3);
        assert_eq!(rat(1, 3).ceil_log2(), -1);
    }

    #[test]
    fn sqrt_bounds_exact_on_squares() {
        assert_eq!(rat(64, 49).sqrt_upper(16), rat(8, 7));
        assert_eq!(rat(64, 49).sqrt_lower(16), rat(8, 7));
        assert_eq!(rat(4, 1).sqrt_upper(16), rat(2, 1));
        let ub = rat(2, 1).sqrt_upper(16);
        let lb = rat(2, 1).sqrt_lower(16);
        assert!(&ub * &ub > rat(2, 1));
        assert!(&lb * &lb < rat(2, 1));
        assert!(&ub - &lb <= Rational::pow2(-16));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(rat(1, 8).to_decimal(4), "0.1250");
        assert_eq!(rat(-1, 3).to_decimal(3), "-0.333");
        assert_eq!(rat(17, 1).to_decimal(0), "17");
    }

    proptest! {
        #[test]
        fn text_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = rat(p, q);
            let back: Rational = r.to_string().parse().unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(back.to_string(), r.to_string());
        }

        #[test]
        fn sqrt_brackets(p in 0i64..100_000, q in 1i64..1000) {
            let r = rat(p, q);
            let ub = r.sqrt_upper(16);
            let lb = r.sqrt_lower(16);
            prop_assert!(&lb * &lb <= r);
            prop_assert!(&ub * &ub >= r);
            prop_assert!(&ub - &lb <= Rational::pow2(-16));
        }
    }
}
