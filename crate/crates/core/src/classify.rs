//! Fuel-indexed semi-deciders and the classifiers built from them.
//!
//! A [`SemiDecider`] answers [`Verdict::Accept`] only for members of its
//! target set and otherwise stays [`Verdict::Unknown`]; raising the fuel
//! never withdraws an acceptance. Fuel `t` bounds both how many enumerated
//! objects are examined and the precision at which inputs are read.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::creal::{CReal, CRealVector, Precision};
use crate::error::ClassifyError;
use crate::rational::{Rational, SQRT_BOUND_BITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
    Unknown,
}

pub trait SemiDecider {
    fn query(&self, x: &CRealVector, fuel: Precision) -> Verdict;
}

impl<T: SemiDecider + ?Sized> SemiDecider for &T {
    fn query(&self, x: &CRealVector, fuel: Precision) -> Verdict {
        (**self).query(x, fuel)
    }
}

impl<T: SemiDecider + ?Sized> SemiDecider for Box<T> {
    fn query(&self, x: &CRealVector, fuel: Precision) -> Verdict {
        (**self).query(x, fuel)
    }
}

/// Rational open ball `{y : ‖y − c‖ < r}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ball {
    pub c: Vec<Rational>,
    pub r: Rational,
}

impl Ball {
    pub fn new(c: Vec<Rational>, r: Rational) -> Result<Self, ClassifyError> {
        if c.is_empty() {
            return Err(ClassifyError::InvalidBallUnion(
                "ball center has no coordinates".into(),
            ));
        }
        if !r.is_positive() {
            return Err(ClassifyError::InvalidBallUnion(format!(
                "radius {r} is not positive"
            )));
        }
        Ok(Ball { c, r })
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Exact membership of a rational point.
    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim() && Rational::dist_sq(x, &self.c) < self.r.pow(2)
    }

    /// Whether `a`, known to lie within `slack` of the true point in
    /// Euclidean norm, certifies membership.
    fn certifies(&self, a: &[Rational], slack: &Rational) -> bool {
        let room = &self.r - slack;
        room.is_positive() && Rational::dist_sq(a, &self.c) < room.pow(2)
    }
}

impl<'de> Deserialize<'de> for Ball {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            c: Vec<Rational>,
            r: Rational,
        }
        let raw = Raw::deserialize(de)?;
        Ball::new(raw.c, raw.r).map_err(serde::de::Error::custom)
    }
}

type BallStream = Arc<dyn Fn(u64) -> Ball + Send + Sync>;

/// An enumerated union of rational open balls, either a finite list or a
/// generator indexed from 1.
#[derive(Clone)]
pub struct BallUnion {
    dim: usize,
    source: Source,
}

#[derive(Clone)]
enum Source {
    Finite(Vec<Ball>),
    Stream(BallStream),
}

impl BallUnion {
    pub fn finite(balls: Vec<Ball>) -> Result<Self, ClassifyError> {
        let dim = balls
            .first()
            .ok_or_else(|| {
                ClassifyError::InvalidBallUnion("a finite union needs at least one ball".into())
            })?
            .dim();
        if let Some(b) = balls.iter().find(|b| b.dim() != dim) {
            return Err(ClassifyError::DimensionMismatch {
                expected: dim,
                got: b.dim(),
            });
        }
        Ok(BallUnion {
            dim,
            source: Source::Finite(balls),
        })
    }

    /// `balls(k)` for `k = 1, 2, …`. Balls of the wrong dimension are skipped.
    pub fn stream(dim: usize, balls: impl Fn(u64) -> Ball + Send + Sync + 'static) -> Self {
        BallUnion {
            dim,
            source: Source::Stream(Arc::new(balls)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `k`-th ball (1-based), if the union has one.
    pub fn ball(&self, k: u64) -> Option<Ball> {
        match &self.source {
            Source::Finite(v) => k.checked_sub(1).and_then(|i| v.get(i as usize)).cloned(),
            Source::Stream(f) => (k >= 1).then(|| f(k)).filter(|b| b.dim() == self.dim),
        }
    }

    /// The first `n` balls.
    pub fn prefix(&self, n: u64) -> Vec<Ball> {
        match &self.source {
            Source::Finite(v) => v.iter().take(n as usize).cloned().collect(),
            Source::Stream(_) => (1..=n).filter_map(|k| self.ball(k)).collect(),
        }
    }

    pub fn balls(&self) -> Option<&[Ball]> {
        match &self.source {
            Source::Finite(v) => Some(v),
            Source::Stream(_) => None,
        }
    }
}

impl fmt::Debug for BallUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::Finite(v) => f.debug_struct("BallUnion").field("balls", v).finish(),
            Source::Stream(_) => f
                .debug_struct("BallUnion")
                .field("dim", &self.dim)
                .finish_non_exhaustive(),
        }
    }
}

impl Serialize for BallUnion {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            balls: &'a [Ball],
        }
        match &self.source {
            Source::Finite(v) => Doc { balls: v }.serialize(ser),
            Source::Stream(_) => Err(serde::ser::Error::custom(
                "streaming ball unions have no literal form",
            )),
        }
    }
}

impl<'de> Deserialize<'de> for BallUnion {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            balls: Vec<Ball>,
        }
        let doc = Doc::deserialize(de)?;
        BallUnion::finite(doc.balls).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug)]
pub struct BallUnionDecider {
    union: BallUnion,
    sqrt_dim_ub: Rational,
}

pub fn ball_union_semidecider(union: BallUnion) -> BallUnionDecider {
    let sqrt_dim_ub = Rational::from(union.dim() as i64).sqrt_upper(SQRT_BOUND_BITS);
    BallUnionDecider { union, sqrt_dim_ub }
}

impl BallUnionDecider {
    pub fn union(&self) -> &BallUnion {
        &self.union
    }
}

impl SemiDecider for BallUnionDecider {
    fn query(&self, x: &CRealVector, fuel: Precision) -> Verdict {
        if x.dim() != self.union.dim() {
            return Verdict::Unknown;
        }
        let balls = self.union.prefix(u64::from(fuel));
        for p in 1..=fuel {
            let a = x.approx(p);
            let slack = &self.sqrt_dim_ub * &Rational::pow2(-i64::from(p));
            if balls.iter().any(|b| b.certifies(&a, &slack)) {
                return Verdict::Accept;
            }
        }
        Verdict::Unknown
    }
}

/// Adapts a closure into a [`SemiDecider`]. The closure is trusted to be
/// monotone and sound.
pub struct FnDecider<F>(pub F);

impl<F: Fn(&CRealVector, Precision) -> Verdict> SemiDecider for FnDecider<F> {
    fn query(&self, x: &CRealVector, fuel: Precision) -> Verdict {
        (self.0)(x, fuel)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClassVerdict {
    /// 1-based class index.
    Class(usize),
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DovetailOutcome {
    pub verdict: ClassVerdict,
    /// Fuel units spent on each class.
    pub fuel_spent: Vec<Precision>,
}

/// Round-robin over the classes: round `r` queries every class at fuel `r`.
/// A round always completes, so two classes accepting in the same round are
/// reported as [`ClassifyError::AmbiguousAccept`].
pub fn dovetail_classify<D: SemiDecider>(
    classes: &[D],
    x: &CRealVector,
    fuel: Precision,
) -> Result<DovetailOutcome, ClassifyError> {
    let mut spent = vec![0; classes.len()];
    for round in 1..=fuel {
        let mut accepted = None;
        for (i, class) in classes.iter().enumerate() {
            spent[i] = round;
            if class.query(x, round) == Verdict::Accept {
                if let Some(j) = accepted {
                    return Err(ClassifyError::AmbiguousAccept(j, i + 1));
                }
                accepted = Some(i + 1);
            }
        }
        if let Some(i) = accepted {
            return Ok(DovetailOutcome {
                verdict: ClassVerdict::Class(i),
                fuel_spent: spent,
            });
        }
    }
    Ok(DovetailOutcome {
        verdict: ClassVerdict::Unknown,
        fuel_spent: spent,
    })
}

/// Accepts the inputs where `(2/π)·atan` approximates the sign within `ε`,
/// namely `|x| > tan(π(1 − ε)/2)`.
#[derive(Clone, Debug)]
pub struct ExitFlagDecider {
    epsilon: Rational,
    threshold: CReal,
}

pub fn exit_flag_semidecider(epsilon: &Rational) -> Result<ExitFlagDecider, ClassifyError> {
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(ClassifyError::EpsilonOutOfRange);
    }
    let c = (Rational::one() - epsilon) / Rational::from(2);
    Ok(ExitFlagDecider {
        epsilon: epsilon.clone(),
        threshold: CReal::tan_pi_multiple(&c),
    })
}

impl ExitFlagDecider {
    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn threshold(&self) -> &CReal {
        &self.threshold
    }

    /// Rational upper bound on the threshold, within `2^(1-p)` of it.
    pub fn threshold_upper(&self, p: Precision) -> Rational {
        self.threshold.approx(p) + Rational::pow2(-i64::from(p))
    }
}

impl SemiDecider for ExitFlagDecider {
    fn query(&self, x: &CRealVector, fuel: Precision) -> Verdict {
        let [x] = x.components() else {
            return Verdict::Unknown;
        };
        for p in 1..=fuel {
            let lower = x.approx(p).abs() - Rational::pow2(-i64::from(p));
            if lower > self.threshold_upper(p) {
                return Verdict::Accept;
            }
        }
        Verdict::Unknown
    }
}

/// Exact lookup table over a finite integer domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteClassifier {
    table: HashMap<Vec<i64>, usize>,
}

pub fn compile_finite_classifier(
    entries: impl IntoIterator<Item = (Vec<i64>, usize)>,
) -> Result<FiniteClassifier, ClassifyError> {
    let mut table = HashMap::new();
    for (x, class) in entries {
        match table.entry(x) {
            Entry::Occupied(e) => return Err(ClassifyError::DuplicateKey(e.key().clone())),
            Entry::Vacant(e) => {
                e.insert(class);
            }
        }
    }
    Ok(FiniteClassifier { table })
}

impl FiniteClassifier {
    pub fn classify(&self, x: &[i64]) -> Result<usize, ClassifyError> {
        self.table
            .get(x)
            .copied()
            .ok_or_else(|| ClassifyError::DomainError(x.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationAudit {
    /// Smallest squared distance between samples of different classes.
    pub min_dist_sq: Rational,
    /// Indices of one closest pair.
    pub closest: (usize, usize),
    /// Set when `min_dist_sq` is below the configured squared threshold.
    pub too_close: bool,
}

pub fn class_separation_audit(
    samples: &[(Vec<Rational>, usize)],
    threshold_sq: &Rational,
) -> Result<SeparationAudit, ClassifyError> {
    if let Some((first, _)) = samples.first() {
        if let Some((x, _)) = samples.iter().find(|(x, _)| x.len() != first.len()) {
            return Err(ClassifyError::DimensionMismatch {
                expected: first.len(),
                got: x.len(),
            });
        }
    }
    let mut best: Option<(Rational, (usize, usize))> = None;
    for (i, (xi, ci)) in samples.iter().enumerate() {
        for (j, (xj, cj)) in samples.iter().enumerate().skip(i + 1) {
            if ci == cj {
                continue;
            }
            let d = Rational::dist_sq(xi, xj);
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, (i, j)));
            }
        }
    }
    let (min_dist_sq, closest) = best.ok_or(ClassifyError::InsufficientClasses)?;
    Ok(SeparationAudit {
        too_close: min_dist_sq < *threshold_sq,
        min_dist_sq,
        closest,
    })
}
