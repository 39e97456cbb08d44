//! Enumeration learners that reconstruct a network from its samples.
//!
//! * [`enum_learn`]: first rational network within `ε/2` of every label.
//! * [`lipschitz_enum_learn`]: the same search plus a certified radius `Ψ`
//!   around the training inputs inside which the learned network stays
//!   `ε`-close to any admissible generator.
//! * [`make_encoded_dataset`] / [`quantized_learn_encode`]: a dataset whose
//!   first input carries the Gödel code of an integer network, and its
//!   parameter-exact decoder.
//! * [`quantized_enum_learn`]: first integer network matching integer data
//!   exactly.
//!
//! Every search walks the fixed enumeration order of [`crate::enumeration`],
//! so results are deterministic and `steps` is the 1-based index of the
//! returned network in that order.

mod scan;
mod unit_search;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Sample};
use crate::enumeration::{godel_decode, godel_encode, Mode, ShellValues};
use crate::error::{DecodeError, LearnError, NetworkError};
use crate::network::{admissible_lipschitz_bound, Activation, Architecture, Network, NetworkFile};
use crate::rational::Rational;

use scan::{first_accepted, ScanOutcome};
use unit_search::{IntProblem, UnitSearch};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnerConfig {
    pub epsilon: Rational,
    /// Bound on weight-matrix entries of admissible generators.
    pub a_max: u64,
    pub max_steps: Option<u64>,
    pub activation: Activation,
}

impl LearnerConfig {
    pub fn new(epsilon: Rational, activation: Activation) -> Self {
        LearnerConfig {
            epsilon,
            a_max: 1,
            max_steps: None,
            activation,
        }
    }

    pub fn with_a_max(mut self, a_max: u64) -> Self {
        self.a_max = a_max;
        self
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = Some(max_steps);
        self
    }

    fn validate(&self) -> Result<(), LearnError> {
        if !self.epsilon.is_positive() {
            return Err(LearnError::InvalidConfig("epsilon must be positive".into()));
        }
        if self.a_max == 0 {
            return Err(LearnError::InvalidConfig("a_max must be at least 1".into()));
        }
        if self.max_steps == Some(0) {
            return Err(LearnError::InvalidConfig(
                "max_steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnReport {
    pub learned: Network,
    pub activation: Activation,
    pub steps: u128,
    /// Zero for the exact learners.
    pub epsilon: Rational,
    pub psi_radius: Option<Rational>,
    pub budget_exhausted: bool,
}

#[derive(Serialize, Deserialize)]
struct RawReport {
    learned: NetworkFile,
    steps: u128,
    epsilon: Rational,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    psi_radius: Option<Rational>,
    budget_exhausted: bool,
}

impl Serialize for LearnReport {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawReport {
            learned: NetworkFile {
                network: self.learned.clone(),
                activation: self.activation.clone(),
            },
            steps: self.steps,
            epsilon: self.epsilon.clone(),
            psi_radius: self.psi_radius.clone(),
            budget_exhausted: self.budget_exhausted,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LearnReport {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawReport::deserialize(deserializer)?;
        Ok(LearnReport {
            learned: raw.learned.network,
            activation: raw.learned.activation,
            steps: raw.steps,
            epsilon: raw.epsilon,
            psi_radius: raw.psi_radius,
            budget_exhausted: raw.budget_exhausted,
        })
    }
}

/// A network whose parameters are all integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerNetwork(Network);

impl IntegerNetwork {
    pub fn network(&self) -> &Network {
        &self.0
    }

    pub fn into_network(self) -> Network {
        self.0
    }

    pub fn from_int_params(arch: &Architecture, params: &[BigInt]) -> Result<Self, NetworkError> {
        let q: Vec<Rational> = params.iter().cloned().map(Rational::from).collect();
        Network::from_free_params(arch, &q).map(IntegerNetwork)
    }

    pub fn int_params(&self) -> Vec<BigInt> {
        self.0
            .free_params()
            .iter()
            .map(|q| q.to_integer().expect("integer network"))
            .collect()
    }
}

impl TryFrom<Network> for IntegerNetwork {
    type Error = Network;
    fn try_from(net: Network) -> Result<Self, Network> {
        if net.is_integer() {
            Ok(IntegerNetwork(net))
        } else {
            Err(net)
        }
    }
}

fn check_shape(dataset: &Dataset, arch: &Architecture) -> Result<(), LearnError> {
    if dataset.dim() != arch.input_dim() {
        return Err(NetworkError::ShapeMismatch {
            expected: arch.input_dim(),
            got: dataset.dim(),
        }
        .into());
    }
    Ok(())
}

fn check_exact(act: &Activation) -> Result<(), LearnError> {
    if !act.exact_on_rationals() {
        return Err(NetworkError::InexactActivation(act.to_string()).into());
    }
    Ok(())
}

/// Repeated inputs must have labels closer than `tolerance`, or exactly
/// equal when `tolerance` is `None`.
fn check_consistent(dataset: &Dataset, tolerance: Option<&Rational>) -> Result<(), LearnError> {
    for (i, j) in dataset.duplicate_inputs() {
        let (a, b) = (&dataset.pairs()[i].y, &dataset.pairs()[j].y);
        let ok = match tolerance {
            Some(t) => &(a - b).abs() < t,
            None => a == b,
        };
        if !ok {
            return Err(LearnError::InconsistentData {
                first: i,
                second: j,
            });
        }
    }
    Ok(())
}

fn budget(cfg: &LearnerConfig) -> Option<u128> {
    cfg.max_steps.map(u128::from)
}

fn report_from_scan(
    outcome: ScanOutcome,
    cfg: &LearnerConfig,
    epsilon: Rational,
) -> Result<LearnReport, LearnError> {
    match outcome {
        ScanOutcome::Found { network, steps } => Ok(LearnReport {
            learned: network,
            activation: cfg.activation.clone(),
            steps,
            epsilon,
            psi_radius: None,
            budget_exhausted: false,
        }),
        ScanOutcome::Exhausted { last, steps } => {
            Err(LearnError::BudgetExhausted(Box::new(LearnReport {
                learned: last,
                activation: cfg.activation.clone(),
                steps,
                epsilon,
                psi_radius: None,
                budget_exhausted: true,
            })))
        }
    }
}

/// First rational network in enumeration order whose output is within
/// `ε/2` of every label, which guarantees residuals strictly below `ε`.
pub fn enum_learn(
    dataset: &Dataset,
    arch: &Architecture,
    cfg: &LearnerConfig,
) -> Result<LearnReport, LearnError> {
    cfg.validate()?;
    check_exact(&cfg.activation)?;
    check_shape(dataset, arch)?;
    check_consistent(dataset, Some(&cfg.epsilon))?;
    let half = &cfg.epsilon * &Rational::new(1, 2);
    let outcome = first_accepted(
        arch,
        Mode::Rational,
        dataset,
        &cfg.activation,
        budget(cfg),
        |out, y| (out - y).abs() < half,
    );
    report_from_scan(outcome, cfg, cfg.epsilon.clone())
}

/// `Ψ(Φ) = ε / (2 (LipUB(A_max) + lipschitz_bound(Φ)))`.
pub fn psi_radius(learned: &Network, act: &Activation, epsilon: &Rational, a_max: u64) -> Rational {
    let worst =
        admissible_lipschitz_bound(learned.architecture(), act, &Rational::from(a_max as i64));
    let denom = (worst + learned.lipschitz_bound(act)) * Rational::from(2);
    epsilon / &denom
}

/// [`enum_learn`] plus the generalization radius `Ψ` of the learned network.
pub fn lipschitz_enum_learn(
    dataset: &Dataset,
    arch: &Architecture,
    cfg: &LearnerConfig,
) -> Result<LearnReport, LearnError> {
    let mut report = enum_learn(dataset, arch, cfg)?;
    report.psi_radius = Some(psi_radius(
        &report.learned,
        &cfg.activation,
        &cfg.epsilon,
        cfg.a_max,
    ));
    Ok(report)
}

/// `n` samples of `net`: the Gödel-coded input first, then zero-input fillers,
/// all labelled by the true realization.
pub fn make_encoded_dataset(
    net: &IntegerNetwork,
    n: usize,
    act: &Activation,
) -> Result<Dataset, LearnError> {
    if n == 0 {
        return Err(LearnError::InvalidConfig(
            "dataset size must be at least 1".into(),
        ));
    }
    check_exact(act)?;
    let d = net.network().architecture().input_dim();
    let code: Vec<Rational> = godel_encode(&net.int_params(), d)?
        .into_iter()
        .map(Rational::from)
        .collect();
    let origin = vec![Rational::zero(); d];
    let code_label = net.network().realize(act, &code)?;
    let origin_label = net.network().realize(act, &origin)?;
    let mut pairs = vec![Sample {
        x: code,
        y: code_label,
    }];
    pairs.extend((1..n).map(|_| Sample {
        x: origin.clone(),
        y: origin_label.clone(),
    }));
    Ok(Dataset::new(d, pairs)?)
}

/// Decodes the network carried by the first input of an encoded dataset. The
/// decoded network must reproduce every label, so a corrupted code is
/// rejected rather than silently decoded into a different network.
pub fn quantized_learn_encode(
    dataset: &Dataset,
    arch: &Architecture,
    act: &Activation,
) -> Result<IntegerNetwork, LearnError> {
    check_shape(dataset, arch)?;
    check_exact(act)?;
    let first = dataset.pairs().first().ok_or(DecodeError::EmptyDataset)?;
    let params = godel_decode(&first.x, arch.free_param_count())?;
    let net = IntegerNetwork::from_int_params(arch, &params)?;
    for (i, p) in dataset.pairs().iter().enumerate() {
        if net.network().realize(act, &p.x)? != p.y {
            return Err(DecodeError::LabelMismatch(i).into());
        }
    }
    Ok(net)
}

fn integer_problem(dataset: &Dataset) -> Result<IntProblem, LearnError> {
    let as_i64 = |q: &Rational| q.to_i64();
    let mut xs = Vec::with_capacity(dataset.len());
    let mut ys = Vec::with_capacity(dataset.len());
    for (i, p) in dataset.pairs().iter().enumerate() {
        let x =
            p.x.iter()
                .map(as_i64)
                .collect::<Option<Vec<_>>>()
                .ok_or(LearnError::NonIntegerData(i))?;
        xs.push(x);
        ys.push(as_i64(&p.y).ok_or(LearnError::NonIntegerData(i))?);
    }
    Ok(IntProblem { xs, ys })
}

/// First integer network in enumeration order reproducing every label exactly.
pub fn quantized_enum_learn(
    dataset: &Dataset,
    arch: &Architecture,
    cfg: &LearnerConfig,
) -> Result<LearnReport, LearnError> {
    if cfg.max_steps == Some(0) {
        return Err(LearnError::InvalidConfig(
            "max_steps must be positive".into(),
        ));
    }
    check_shape(dataset, arch)?;
    if !cfg.activation.preserves_integers() {
        return Err(LearnError::InvalidConfig(format!(
            "activation {} does not map integers to integers",
            cfg.activation
        )));
    }
    for (i, p) in dataset.pairs().iter().enumerate() {
        if !p.y.is_integer() || !p.x.iter().all(Rational::is_integer) {
            return Err(LearnError::NonIntegerData(i));
        }
    }
    check_consistent(dataset, None)?;
    if arch.depth() == 2 {
        if let Ok(problem) = integer_problem(dataset) {
            if let Some(report) = unit_search_report(dataset, arch, cfg, &problem)? {
                return Ok(report);
            }
        }
    }
    let outcome = first_accepted(
        arch,
        Mode::Integer,
        dataset,
        &cfg.activation,
        budget(cfg),
        |out, y| out == y,
    );
    report_from_scan(outcome, cfg, Rational::zero())
}

// Ok(None) means the fast path gave up (overflow risk) and the caller scans.
fn unit_search_report(
    dataset: &Dataset,
    arch: &Architecture,
    cfg: &LearnerConfig,
    problem: &IntProblem,
) -> Result<Option<LearnReport>, LearnError> {
    let max = budget(cfg);
    let exhausted = |steps: u128| {
        let last = network_at(arch, Mode::Integer, steps - 1);
        LearnError::BudgetExhausted(Box::new(LearnReport {
            learned: last,
            activation: cfg.activation.clone(),
            steps,
            epsilon: Rational::zero(),
            psi_radius: None,
            budget_exhausted: true,
        }))
    };
    match unit_search::search(arch, &cfg.activation, problem, max) {
        UnitSearch::Found { index, params } => {
            let steps = index + 1;
            if let Some(m) = max {
                if steps > m {
                    return Err(exhausted(m));
                }
            }
            let q: Vec<Rational> = params.into_iter().map(Rational::from).collect();
            let learned = Network::from_free_params(arch, &q)?;
            debug_assert!(dataset.pairs().iter().all(|p| learned
                .realize(&cfg.activation, &p.x)
                .ok()
                .as_ref()
                == Some(&p.y)));
            Ok(Some(LearnReport {
                learned,
                activation: cfg.activation.clone(),
                steps,
                epsilon: Rational::zero(),
                psi_radius: None,
                budget_exhausted: false,
            }))
        }
        UnitSearch::BudgetReached => Err(exhausted(max.expect("only with a budget"))),
        UnitSearch::Overflow => Ok(None),
    }
}

/// The network at a zero-based global enumeration index.
pub fn network_at(arch: &Architecture, mode: Mode, mut index: u128) -> Network {
    let n = arch.free_param_count();
    for s in 0u64.. {
        let shell = ShellValues::new(mode, s);
        let size = shell.shell_size(n);
        if index < size {
            let idx = shell.unrank(n, index);
            let params: Vec<Rational> = idx.iter().map(|&i| shell.values[i].clone()).collect();
            return Network::from_free_params(arch, &params).expect("arity fixed");
        }
        index -= size;
    }
    unreachable!("shell loop is unbounded")
}

#[cfg(test)]
mod tests;
