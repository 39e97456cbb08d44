//! Exact-arithmetic neural networks: computable reals, rational and integer
//! networks, enumeration learners and semi-decidable classifiers.

pub mod classify;
pub mod creal;
pub mod dataset;
pub mod enumeration;
pub mod error;
pub mod learners;
pub mod network;
pub mod rational;
pub mod topology;

pub use classify::{BallUnion, SemiDecider, Verdict};
pub use creal::{CReal, CRealVector, Comparison, Precision};
pub use dataset::{Dataset, Sample};
pub use enumeration::{EnumerationCursor, Mode};
pub use error::{ClassifyError, DecodeError, LearnError, NetworkError, ParseRationalError};
pub use learners::{IntegerNetwork, LearnReport, LearnerConfig};
pub use network::{Activation, Architecture, Network, NetworkFile};
pub use rational::{rat, Rational};
