//! Computable reals as rapidly converging rational Cauchy names.
//!
//! A [`CReal`] is a procedure `k -> q_k` with `|x - q_k| <= 2^-k` for the
//! represented real `x`. Names are stored already normalized to this rate, so
//! every error budget in the crate is a power of two. Approximations are
//! memoized per index; the same index always yields the identical rational.
//!
//! Equality of computable reals is undecidable, so [`CReal::compare`] only
//! ever certifies a strict order within a precision budget.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::rational::Rational;

/// Precision index: an approximation at index `k` is within `2^-k`.
pub type Precision = u32;

type ApproxFn = dyn Fn(Precision) -> Rational + Send + Sync;

struct Node {
    approx: Box<ApproxFn>,
    cache: Mutex<HashMap<Precision, Rational>>,
}

#[derive(Clone)]
pub struct CReal(Arc<Node>);

/// Outcome of a fuel-bounded comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
    Unknown,
}

impl CReal {
    /// Wraps an approximation procedure. The caller guarantees
    /// `|x - f(k)| <= 2^-k` for every `k`.
    pub fn from_fn(f: impl Fn(Precision) -> Rational + Send + Sync + 'static) -> Self {
        CReal(Arc::new(Node {
            approx: Box::new(f),
            cache: Mutex::new(HashMap::new()),
        }))
    }

    pub fn from_rational(q: Rational) -> Self {
        CReal::from_fn(move |_| q.clone())
    }

    pub fn from_integer(n: i64) -> Self {
        CReal::from_rational(Rational::from(n))
    }

    pub fn approx(&self, k: Precision) -> Rational {
        if let Some(q) = self.0.cache.lock().expect("poisoned cache").get(&k) {
            return q.clone();
        }
        let q = (self.0.approx)(k);
        // another thread may have raced us here; keep whichever landed first
        self.0
            .cache
            .lock()
            .expect("poisoned cache")
            .entry(k)
            .or_insert(q)
            .clone()
    }

    pub fn add(&self, other: &CReal) -> CReal {
        let (a, b) = (self.clone(), other.clone());
        CReal::from_fn(move |k| a.approx(k + 1) + b.approx(k + 1))
    }

    pub fn sub(&self, other: &CReal) -> CReal {
        let (a, b) = (self.clone(), other.clone());
        CReal::from_fn(move |k| a.approx(k + 1) - b.approx(k + 1))
    }

    pub fn neg(&self) -> CReal {
        let a = self.clone();
        CReal::from_fn(move |k| -a.approx(k))
    }

    pub fn abs(&self) -> CReal {
        let a = self.clone();
        CReal::from_fn(move |k| a.approx(k).abs())
    }

    /// Product. Each factor is queried at `k + 2 + max(0, ceil(log2(|other_0| + 2)))`
    /// where `other_0` is the other factor's index-0 approximation, which
    /// bounds the product error by `2^-k`.
    pub fn mul(&self, other: &CReal) -> CReal {
        let (a, b) = (self.clone(), other.clone());
        CReal::from_fn(move |k| {
            let a_scale = magnitude_bits(&b.approx(0));
            let b_scale = magnitude_bits(&a.approx(0));
            a.approx(k + 2 + a_scale) * b.approx(k + 2 + b_scale)
        })
    }

    /// Scales by an exact rational.
    pub fn scale(&self, c: &Rational) -> CReal {
        self.mul(&CReal::from_rational(c.clone()))
    }

    /// `constant + sum_j c_j x_j` as a single node: every `x_j` is queried at
    /// `k + 1 + max(0, ceil(log2(sum_j |c_j|)))`, so the total error stays
    /// within `2^-k`. Exact when all inputs are rational constants.
    pub fn linear_combination(terms: Vec<(Rational, CReal)>, constant: Rational) -> CReal {
        let weight: Rational = terms.iter().map(|(c, _)| c.abs()).sum();
        let extra = if weight.is_zero() {
            0
        } else {
            weight.ceil_log2().max(0) as u32
        };
        CReal::from_fn(move |k| {
            let mut acc = constant.clone();
            for (c, x) in &terms {
                if !c.is_zero() {
                    acc += &(c * &x.approx(k + 1 + extra));
                }
            }
            acc
        })
    }

    /// Square root of a non-negative rational via integer Newton iteration.
    pub fn sqrt_rational(q: &Rational) -> CReal {
        assert!(!q.is_negative(), "square root of a negative rational");
        let q = q.clone();
        CReal::from_fn(move |k| q.sqrt_lower(k))
    }

    /// Builds a name from an interval enclosure procedure: `enclose(bits)`
    /// must return an interval containing `x` whose width shrinks to zero as
    /// `bits` grows.
    pub(crate) fn from_enclosure(
        enclose: impl Fn(u32) -> Interval + Send + Sync + 'static,
    ) -> CReal {
        CReal::from_fn(move |k| {
            let target = Rational::pow2(-(k as i64 + 1));
            let mut bits = k + 4;
            loop {
                let iv = enclose(bits);
                if iv.width() <= target {
                    // midpoint error <= 2^-(k+2); grid rounding adds <= 2^-(k+2)
                    return iv.midpoint().floor_dyadic(k + 2);
                }
                bits += 8;
            }
        })
    }

    /// The constant pi.
    pub fn pi() -> CReal {
        CReal::from_enclosure(pi_interval)
    }

    /// `arctan(x)` for a rational `x`.
    pub fn atan_rational(x: &Rational) -> CReal {
        let x = x.clone();
        CReal::from_enclosure(move |bits| atan_interval(&x, bits))
    }

    /// `tan(c * pi)` for a rational `c` strictly between 0 and 1/2.
    pub fn tan_pi_multiple(c: &Rational) -> CReal {
        assert!(
            c.is_positive() && c < &Rational::new(1, 2),
            "tan(c pi) needs 0 < c < 1/2"
        );
        let c = c.clone();
        CReal::from_enclosure(move |bits| tan_pi_multiple_interval(&c, bits))
    }

    /// Certified strict comparison, scanning precisions `0..=fuel`.
    ///
    /// `Less` is returned only when `a_k + 2^-k < b_k - 2^-k` at some scanned
    /// precision, so the verdict is sound. Because the scan is cumulative,
    /// a verdict reached at fuel `t` is reached at every larger fuel.
    pub fn compare(&self, other: &CReal, fuel: u32) -> Comparison {
        for k in 0..=fuel {
            let a = self.approx(k);
            let b = other.approx(k);
            let slack = Rational::pow2(-(k as i64)) * Rational::from(2);
            if &b - &a > slack {
                return Comparison::Less;
            }
            if &a - &b > slack {
                return Comparison::Greater;
            }
        }
        Comparison::Unknown
    }

    /// Enclosure `[q_k - 2^-k, q_k + 2^-k]` at index `k`.
    pub fn enclosure(&self, k: Precision) -> (Rational, Rational) {
        let q = self.approx(k);
        let e = Rational::pow2(-(k as i64));
        (&q - &e, &q + &e)
    }
}

impl fmt::Debug for CReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CReal(~{})", self.approx(32).to_decimal(9))
    }
}

impl From<Rational> for CReal {
    fn from(q: Rational) -> Self {
        CReal::from_rational(q)
    }
}

// max(0, ceil(log2(|q| + 2)))
fn magnitude_bits(q: &Rational) -> u32 {
    let e = (q.abs() + Rational::from(2)).ceil_log2();
    e.max(0) as u32
}

/// A point of `R^d` given by computable coordinates.
#[derive(Clone, Debug)]
pub struct CRealVector {
    components: Vec<CReal>,
}

impl CRealVector {
    /// Panics on an empty component list: vectors have dimension at least 1.
    pub fn new(components: Vec<CReal>) -> Self {
        assert!(!components.is_empty(), "CRealVector needs dimension >= 1");
        CRealVector { components }
    }

    pub fn from_rationals(xs: &[Rational]) -> Self {
        CRealVector::new(xs.iter().cloned().map(CReal::from_rational).collect())
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[CReal] {
        &self.components
    }

    pub fn approx(&self, k: Precision) -> Vec<Rational> {
        self.components.iter().map(|c| c.approx(k)).collect()
    }
}

/// Closed rational interval used internally for transcendental enclosures.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) * Rational::new(1, 2)
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn neg(&self) -> Interval {
        Interval::new(-&self.hi, -&self.lo)
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        if c.is_negative() {
            Interval::new(&self.hi * c, &self.lo * c)
        } else {
            Interval::new(&self.lo * c, &self.hi * c)
        }
    }

    /// Outward rounding onto the grid `2^-bits`.
    pub fn round_out(&self, bits: u32) -> Interval {
        Interval::new(self.lo.floor_dyadic(bits), self.hi.ceil_dyadic(bits))
    }
}

/// Enclosure of an alternating series `sum_n (-1)^n term(n)` whose terms are
/// positive and decreasing, truncated once the next term drops below
/// `2^-(bits+2)`. Each partial sum is rounded outward to keep sizes bounded.
fn alternating_series(bits: u32, term: impl Fn(u32) -> Rational) -> Interval {
    let guard = bits + 8;
    let cutoff = Rational::pow2(-(bits as i64 + 2));
    let mut lo = Rational::zero();
    let mut hi = Rational::zero();
    let mut n = 0u32;
    loop {
        let t = term(n);
        if t <= cutoff {
            // remainder of an alternating series is bounded by its first term
            return Interval::new(lo - &t, hi + &t);
        }
        if n.is_multiple_of(2) {
            lo = (lo + &t).floor_dyadic(guard);
            hi = (hi + &t).ceil_dyadic(guard);
        } else {
            lo = (lo - &t).floor_dyadic(guard);
            hi = (hi - &t).ceil_dyadic(guard);
        }
        n += 1;
    }
}

// Taylor series, valid for |t| <= 1/2.
fn atan_series(t: &Rational, bits: u32) -> Interval {
    if t.is_negative() {
        return atan_series(&-t, bits).neg();
    }
    let t2 = t * t;
    alternating_series(bits, |n| {
        t.clone() * t2.pow(n) * Rational::new(1, 2 * n as i64 + 1)
    })
}

pub(crate) fn pi_interval(bits: u32) -> Interval {
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    let a = atan_series(&Rational::new(1, 5), bits + 5);
    let b = atan_series(&Rational::new(1, 239), bits + 3);
    a.scale(&Rational::from(16))
        .sub(&b.scale(&Rational::from(4)))
}

pub(crate) fn atan_interval(x: &Rational, bits: u32) -> Interval {
    let half = Rational::new(1, 2);
    if x.is_negative() {
        return atan_interval(&-x, bits).neg();
    }
    if x <= &half {
        return atan_series(x, bits);
    }
    let pi = pi_interval(bits + 3);
    if x > &Rational::from(2) {
        // pi/2 - atan(1/x)
        pi.scale(&half).sub(&atan_series(&x.recip(), bits + 1))
    } else {
        // pi/4 + atan((x-1)/(x+1))
        let one = Rational::one();
        let t = (x - &one) / (x + &one);
        pi.scale(&Rational::new(1, 4))
            .add(&atan_series(&t, bits + 1))
    }
}

// sin and cos of a rational 0 <= t <= 2 by alternating Taylor series
fn sin_interval(t: &Rational, bits: u32) -> Interval {
    let t2 = t * t;
    alternating_series(bits, |n| {
        let n = n as i64;
        t.clone() * t2.pow(n as u32) * factorial_recip(2 * n + 1)
    })
}

fn cos_interval(t: &Rational, bits: u32) -> Interval {
    let t2 = t * t;
    alternating_series(bits, |n| t2.pow(n) * factorial_recip(2 * n as i64))
}

fn factorial_recip(n: i64) -> Rational {
    let f: num_bigint::BigInt = (1..=n).map(num_bigint::BigInt::from).product();
    Rational::new(1, 1) / Rational::from_integer(f)
}

fn tan_pi_multiple_interval(c: &Rational, bits: u32) -> Interval {
    // theta = c pi lies in (0, pi/2); tan is increasing there, so
    // tan([lo, hi]) is inside [tan_lo(lo), tan_hi(hi)].
    let mut work = bits + 8;
    loop {
        let theta = pi_interval(work).scale(c).round_out(work);
        let s_lo = sin_interval(&theta.lo, work);
        let c_lo = cos_interval(&theta.lo, work);
        let s_hi = sin_interval(&theta.hi, work);
        let c_hi = cos_interval(&theta.hi, work);
        if c_hi.lo.is_positive() && c_lo.lo.is_positive() && !s_lo.lo.is_negative() {
            let lower = &s_lo.lo / &c_lo.hi;
            let upper = &s_hi.hi / &c_hi.lo;
            let iv = Interval::new(lower, upper).round_out(bits + 2);
            if iv.width() <= Rational::pow2(-(bits as i64)) {
                return iv;
            }
        }
        work += 16;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn within(x: &CReal, target: &Rational, k: u32) -> bool {
        (&x.approx(k) - target).abs() <= Rational::pow2(-(k as i64))
    }

    #[test]
    fn constants_are_exact() {
        assert_eq!(CReal::from_rational(rat(1, 2)).approx(10), rat(1, 2));
        assert_eq!(
            CReal::from_rational(Rational::zero()).approx(0),
            Rational::zero()
        );
        assert_eq!(CReal::from_rational(rat(-7, 3)).approx(5), rat(-7, 3));
    }

    #[test]
    fn arithmetic_on_constants_is_exact() {
        let a = CReal::from_rational(rat(3, 7));
        let b = CReal::from_rational(rat(-5, 11));
        for k in 0..20 {
            assert_eq!(a.add(&b).approx(k), rat(3, 7) + rat(-5, 11));
            assert_eq!(a.sub(&b).approx(k), rat(3, 7) - rat(-5, 11));
            assert_eq!(a.mul(&b).approx(k), rat(3, 7) * rat(-5, 11));
            assert_eq!(b.neg().approx(k), rat(5, 11));
            assert_eq!(b.abs().approx(k), rat(5, 11));
        }
        let one = CReal::from_integer(1);
        for k in 0..=20 {
            assert!(within(&one.add(&one), &rat(2, 1), k));
        }
    }

    #[test]
    fn self_cancellation_is_certified() {
        let s = CReal::sqrt_rational(&rat(2, 1));
        let z = s.sub(&s);
        for k in 0..40 {
            assert!(within(&z, &Rational::zero(), k));
        }
    }

    #[test]
    fn sqrt2_squared() {
        let s = CReal::sqrt_rational(&rat(2, 1));
        let sq = s.mul(&s);
        for k in 0..48 {
            assert!(within(&sq, &rat(2, 1), k), "k = {k}");
        }
    }

    #[test]
    fn memoized() {
        let s = CReal::sqrt_rational(&rat(3, 1));
        let a = s.approx(30);
        let b = s.approx(30);
        assert_eq!(a, b);
    }

    #[test]
    fn compare_examples() {
        let zero = CReal::from_integer(0);
        let one = CReal::from_integer(1);
        assert_eq!(zero.compare(&one, 2), Comparison::Less);
        assert_eq!(one.compare(&zero, 2), Comparison::Greater);
        let s = CReal::sqrt_rational(&rat(2, 1));
        assert_eq!(s.compare(&s, 30), Comparison::Unknown);
        let tiny = CReal::from_rational(Rational::pow2(-8));
        assert_eq!(zero.compare(&tiny, 9), Comparison::Unknown);
        assert_eq!(zero.compare(&tiny, 10), Comparison::Less);
        assert_eq!(zero.compare(&tiny, 12), Comparison::Less);
    }

    #[test]
    fn pi_enclosure() {
        // 3.14159265358979323846...
        let lo = rat(314_159_265_358_979, 100_000_000_000_000);
        let hi = rat(314_159_265_358_980, 100_000_000_000_000);
        let iv = pi_interval(60);
        assert!(iv.lo >= lo && iv.hi <= hi, "{iv:?}");
    }

    #[test]
    fn atan_one_is_quarter_pi() {
        let a = CReal::atan_rational(&rat(1, 1));
        let p = CReal::pi().scale(&rat(1, 4));
        for k in [4, 16, 40] {
            assert!((a.approx(k) - p.approx(k)).abs() <= Rational::pow2(-(k as i64)) * rat(2, 1));
        }
    }

    #[test]
    fn tan_quarter_pi_is_one() {
        let t = CReal::tan_pi_multiple(&rat(1, 4));
        for k in [0, 8, 30, 50] {
            assert!(within(&t, &Rational::one(), k));
        }
    }

    fn cauchy(x: &CReal, max: u32) -> bool {
        let v: Vec<Rational> = (0..=max).map(|k| x.approx(k)).collect();
        (0..=max as usize).all(|k| {
            (0..=max as usize).all(|j| {
                (&v[k] - &v[j]).abs() <= Rational::pow2(-(k as i64)) + Rational::pow2(-(j as i64))
            })
        })
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(40))]

        #[test]
        fn derived_names_are_cauchy(
            p in -40i64..40, q in 1i64..40, r in 1i64..60, c in 1i64..49,
        ) {
            let a = CReal::sqrt_rational(&rat(r, 3));
            let b = CReal::atan_rational(&rat(p, q));
            let t = CReal::tan_pi_multiple(&rat(c, 100));
            let mixed = CReal::linear_combination(
                vec![(rat(p, q), a.clone()), (rat(-3, 2), b.clone())],
                rat(q, 7),
            );
            for x in [a.mul(&b), t.sub(&a).abs(), mixed, b.scale(&rat(q, 5)).add(&t)] {
                proptest::prop_assert!(cauchy(&x, 40));
            }
        }
    }
}
