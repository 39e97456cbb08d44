//! Finite labelled samples `(x, y)` with exact rational entries.

use serde::{Deserialize, Serialize};

use crate::error::NetworkError;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<Rational>,
    pub y: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dataset {
    d: usize,
    pairs: Vec<Sample>,
}

impl Dataset {
    /// Checks that every input has dimension `d >= 1`.
    pub fn new(d: usize, pairs: Vec<Sample>) -> Result<Self, NetworkError> {
        if d == 0 {
            return Err(NetworkError::InvalidArchitecture(
                "input dimension must be positive".into(),
            ));
        }
        if let Some(bad) = pairs.iter().find(|p| p.x.len() != d) {
            return Err(NetworkError::ShapeMismatch {
                expected: d,
                got: bad.x.len(),
            });
        }
        Ok(Dataset { d, pairs })
    }

    pub fn from_pairs(
        d: usize,
        pairs: impl IntoIterator<Item = (Vec<Rational>, Rational)>,
    ) -> Result<Self, NetworkError> {
        Dataset::new(d, pairs.into_iter().map(|(x, y)| Sample { x, y }).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn pairs(&self) -> &[Sample] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Index pairs `(i, j)`, `i < j`, with identical inputs.
    pub fn duplicate_inputs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.pairs.len() {
            for j in i + 1..self.pairs.len() {
                if self.pairs[i].x == self.pairs[j].x {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[derive(Deserialize)]
struct RawDataset {
    d: usize,
    pairs: Vec<Sample>,
}

impl<'de> Deserialize<'de> for Dataset {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawDataset::deserialize(deserializer)?;
        Dataset::new(raw.d, raw.pairs).map_err(serde::de::Error::custom)
    }
}
