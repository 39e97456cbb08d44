//! `exactnet` command-line tool.
//!
//! Exit codes: 0 success, 2 usage or malformed input, 3 inconsistent
//! dataset, 4 step budget exhausted, 5 decode failure, 6 ambiguous
//! classification, 7 file I/O, 8 anything else.

mod args;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use exactnet::classify::{
    ball_union_semidecider, dovetail_classify, exit_flag_semidecider, ClassVerdict,
};
use exactnet::learners::{
    enum_learn, lipschitz_enum_learn, make_encoded_dataset, quantized_enum_learn,
    quantized_learn_encode,
};
use exactnet::topology::topology_table;
use exactnet::{
    BallUnion, CRealVector, ClassifyError, Dataset, IntegerNetwork, LearnError, LearnReport,
    LearnerConfig, NetworkError, NetworkFile, Rational, SemiDecider, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use args::{ClassifyArgs, Cli, Command, Demo, DemoArgs, GenArgs, LearnArgs, Learner};
use manifest::{digest, manifest_path, sibling, InputDigest, RunManifest};

#[derive(Debug)]
enum Failure {
    Usage(String),
    Inconsistent(String),
    Budget(String),
    Decode(String),
    Ambiguous(String),
    Io(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Inconsistent(_) => 3,
            Failure::Budget(_) => 4,
            Failure::Decode(_) => 5,
            Failure::Ambiguous(_) => 6,
            Failure::Io(_) => 7,
            Failure::Other(_) => 8,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Inconsistent(m)
            | Failure::Budget(m)
            | Failure::Decode(m)
            | Failure::Ambiguous(m)
            | Failure::Io(m)
            | Failure::Other(m) => m,
        }
    }
}

impl From<LearnError> for Failure {
    fn from(e: LearnError) -> Self {
        let msg = e.to_string();
        match e {
            LearnError::InconsistentData { .. } => Failure::Inconsistent(msg),
            LearnError::BudgetExhausted(_) => Failure::Budget(msg),
            LearnError::Decode(_) => Failure::Decode(msg),
            LearnError::NonIntegerData(_)
            | LearnError::InvalidConfig(_)
            | LearnError::Network(_) => Failure::Usage(msg),
        }
    }
}

impl From<NetworkError> for Failure {
    fn from(e: NetworkError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Self {
        let msg = e.to_string();
        match e {
            ClassifyError::AmbiguousAccept(..) => Failure::Ambiguous(msg),
            ClassifyError::DimensionMismatch { .. }
            | ClassifyError::EpsilonOutOfRange
            | ClassifyError::InvalidBallUnion(_) => Failure::Usage(msg),
            _ => Failure::Other(msg),
        }
    }
}

/// Files read and written by one invocation.
#[derive(Default)]
struct Run {
    inputs: Vec<InputDigest>,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn read_json<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        self.inputs.push(digest(path, &bytes));
        serde_json::from_slice(&bytes)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    fn write_json(&mut self, path: &Path, value: &impl Serialize) -> Result<(), Failure> {
        fs::write(path, to_json(value)?)
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    /// Writes to `out` when given, otherwise prints the document.
    fn emit(&mut self, out: Option<&Path>, value: &impl Serialize) -> Result<(), Failure> {
        match out {
            Some(p) => self.write_json(p, value),
            None => {
                print!("{}", to_json(value)?);
                Ok(())
            }
        }
    }
}

fn to_json(value: &impl Serialize) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Other(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut run = Run::default();
    let result = match &cli.command {
        Command::Learn(a) => learn(&mut run, a),
        Command::Gen(a) => gen(&mut run, a),
        Command::Classify(a) => classify(&mut run, a),
        Command::Demo(a) => demo(&mut run, a),
    };
    let code = match &result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    };
    if let Some(out) = output_path(&cli.command) {
        let m = RunManifest {
            command: command_name(&cli.command),
            config: &cli.command,
            inputs: std::mem::take(&mut run.inputs),
            outputs: std::mem::take(&mut run.outputs),
            exit_code: i32::from(code),
            duration_ms: manifest::millis(start.elapsed()),
        };
        let path = manifest_path(out);
        let written =
            to_json(&m).and_then(|s| fs::write(&path, s).map_err(|e| Failure::Io(e.to_string())));
        if let Err(f) = written {
            eprintln!("error: manifest {}: {}", path.display(), f.message());
            if code == 0 {
                return ExitCode::from(f.code());
            }
        }
    }
    ExitCode::from(code)
}

fn output_path(c: &Command) -> Option<&Path> {
    match c {
        Command::Learn(a) => a.out.as_deref(),
        Command::Gen(a) => a.out.as_deref(),
        Command::Classify(a) => a.out.as_deref(),
        Command::Demo(a) => a.out.as_deref(),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Learn(a) => match a.learner {
            Learner::Enum => "learn enum",
            Learner::Lipschitz => "learn lipschitz",
            Learner::Quantized => "learn quantized",
            Learner::Decode => "learn decode",
        },
        Command::Gen(_) => "gen",
        Command::Classify(_) => "classify",
        Command::Demo(a) => match a.which {
            Demo::Topology => "demo topology",
            Demo::Exitflag => "demo exitflag",
        },
    }
}

fn learn(run: &mut Run, a: &LearnArgs) -> Result<(), Failure> {
    let dataset: Dataset = run.read_json(&a.dataset)?;
    if a.learner == Learner::Decode {
        let net = quantized_learn_encode(&dataset, &a.arch, &a.activation)?;
        let doc = NetworkFile {
            network: net.into_network(),
            activation: a.activation.clone(),
        };
        run.emit(a.out.as_deref(), &doc)?;
        if a.out.is_some() {
            println!("decoded {} parameters", a.arch.free_param_count());
        }
        return Ok(());
    }
    let mut cfg = LearnerConfig::new(a.epsilon.clone(), a.activation.clone()).with_a_max(a.a_max);
    if let Some(m) = a.max_steps {
        cfg = cfg.with_max_steps(m);
    }
    let result = match a.learner {
        Learner::Enum => enum_learn(&dataset, &a.arch, &cfg),
        Learner::Lipschitz => lipschitz_enum_learn(&dataset, &a.arch, &cfg),
        Learner::Quantized => quantized_enum_learn(&dataset, &a.arch, &cfg),
        Learner::Decode => unreachable!("handled above"),
    };
    match result {
        Ok(report) => {
            write_report(run, a, &report)?;
            if a.out.is_some() {
                println!("learned after {} steps", report.steps);
            }
            Ok(())
        }
        Err(LearnError::BudgetExhausted(report)) => {
            write_report(run, a, &report)?;
            Err(Failure::Budget(format!(
                "step budget exhausted after {} steps",
                report.steps
            )))
        }
        Err(e) => Err(e.into()),
    }
}

fn write_report(run: &mut Run, a: &LearnArgs, report: &LearnReport) -> Result<(), Failure> {
    run.emit(a.out.as_deref(), report)?;
    if let Some(out) = &a.out {
        let doc = NetworkFile {
            network: report.learned.clone(),
            activation: report.activation.clone(),
        };
        run.write_json(&sibling(out, "network.json"), &doc)?;
    }
    Ok(())
}

const GRID_LIMIT: u128 = 1 << 20;

fn gen(run: &mut Run, a: &GenArgs) -> Result<(), Failure> {
    let file: NetworkFile = run.read_json(&a.net)?;
    let net = &file.network;
    let act = &file.activation;
    let d = net.architecture().input_dim();
    let dataset = if a.encoded {
        let int = IntegerNetwork::try_from(net.clone()).map_err(|_| {
            Failure::Usage("--encoded needs a network with integer parameters".into())
        })?;
        make_encoded_dataset(&int, a.n, act)?
    } else {
        let inputs = gen_inputs(a, d)?;
        let pairs = inputs
            .into_iter()
            .map(|x| {
                if x.len() != d {
                    return Err(Failure::Usage(format!(
                        "point {x:?} does not have {d} coordinates"
                    )));
                }
                let y = net.realize(act, &x)?;
                Ok((x, y))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        Dataset::from_pairs(d, pairs)?
    };
    run.emit(a.out.as_deref(), &dataset)
}

fn gen_inputs(a: &GenArgs, d: usize) -> Result<Vec<Vec<Rational>>, Failure> {
    if let Some(text) = &a.points {
        return args::parse_points(text).map_err(Failure::Usage);
    }
    if let Some(text) = &a.grid {
        let (lo, hi) = args::parse_grid(text).map_err(Failure::Usage)?;
        let side = (hi - lo + 1) as u128;
        if side.checked_pow(d as u32).is_none_or(|n| n > GRID_LIMIT) {
            return Err(Failure::Usage(format!(
                "grid {lo}:{hi} in dimension {d} is too large"
            )));
        }
        let mut out = Vec::new();
        let mut cur = vec![lo; d];
        loop {
            out.push(cur.iter().map(|&v| Rational::from(v)).collect());
            let mut i = d;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                if cur[i] < hi {
                    cur[i] += 1;
                    break;
                }
                cur[i] = lo;
            }
        }
    }
    if let Some(count) = a.random {
        if a.range < 0 {
            return Err(Failure::Usage("--range must be non-negative".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        return Ok((0..count)
            .map(|_| {
                (0..d)
                    .map(|_| Rational::from(rng.gen_range(-a.range..=a.range)))
                    .collect()
            })
            .collect());
    }
    Err(Failure::Usage(
        "one of --points, --grid, --random or --encoded is required".into(),
    ))
}

#[derive(Serialize)]
struct ClassifyDoc {
    x: Vec<Rational>,
    fuel: u32,
    /// 1-based class index, or null when no class accepted.
    class: Option<usize>,
    fuel_spent: Vec<u32>,
}

fn classify(run: &mut Run, a: &ClassifyArgs) -> Result<(), Failure> {
    if a.fuel == 0 {
        return Err(Failure::Usage("--fuel must be positive".into()));
    }
    let x = args::parse_point(&a.x).map_err(Failure::Usage)?;
    let mut deciders = Vec::with_capacity(a.classes.len());
    for path in &a.classes {
        let union: BallUnion = run.read_json(path)?;
        if union.dim() != x.len() {
            return Err(ClassifyError::DimensionMismatch {
                expected: union.dim(),
                got: x.len(),
            }
            .into());
        }
        deciders.push(ball_union_semidecider(union));
    }
    let outcome = dovetail_classify(&deciders, &CRealVector::from_rationals(&x), a.fuel)?;
    let class = match outcome.verdict {
        ClassVerdict::Class(i) => Some(i),
        ClassVerdict::Unknown => None,
    };
    match class {
        Some(i) => println!("{i}"),
        None => println!("unknown"),
    }
    if let Some(out) = &a.out {
        let doc = ClassifyDoc {
            x,
            fuel: a.fuel,
            class,
            fuel_spent: outcome.fuel_spent,
        };
        run.write_json(out, &doc)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TopologyRowDoc {
    k: u32,
    sup_norm: Rational,
    lipschitz: Rational,
    scaling_lower_bound: Rational,
    sup_norm_decimal: String,
    lipschitz_decimal: String,
    scaling_lower_bound_decimal: String,
}

#[derive(Serialize)]
struct ExitFlagRow {
    x: Rational,
    verdict: Verdict,
    /// Smallest fuel at which the point is accepted.
    accepted_at: Option<u32>,
}

#[derive(Serialize)]
struct ExitFlagDoc {
    epsilon: Rational,
    fuel: u32,
    threshold_upper: Rational,
    rows: Vec<ExitFlagRow>,
}

const DECIMALS: usize = 12;

fn demo(run: &mut Run, a: &DemoArgs) -> Result<(), Failure> {
    if a.fuel == 0 {
        return Err(Failure::Usage("--fuel must be positive".into()));
    }
    match a.which {
        Demo::Topology => {
            if a.k_max == 0 {
                return Err(Failure::Usage("--k-max must be at least 1".into()));
            }
            let rows: Vec<TopologyRowDoc> = topology_table(1..=a.k_max)
                .into_iter()
                .map(|r| TopologyRowDoc {
                    k: r.k,
                    sup_norm_decimal: r.sup_norm.to_decimal(DECIMALS),
                    lipschitz_decimal: r.lipschitz.to_decimal(DECIMALS),
                    scaling_lower_bound_decimal: r.scaling_lower_bound.to_decimal(DECIMALS),
                    sup_norm: r.sup_norm,
                    lipschitz: r.lipschitz,
                    scaling_lower_bound: r.scaling_lower_bound,
                })
                .collect();
            if a.out.is_some() {
                println!("k\tsup_norm\tlipschitz\tscaling_lower_bound");
                for r in &rows {
                    println!(
                        "{}\t{}\t{}\t{}",
                        r.k, r.sup_norm, r.lipschitz, r.scaling_lower_bound_decimal
                    );
                }
            }
            run.emit(a.out.as_deref(), &rows)
        }
        Demo::Exitflag => {
            let decider = exit_flag_semidecider(&a.epsilon)?;
            let xs = if a.x.is_empty() {
                (-6..=6).map(|i| Rational::new(i, 2)).collect()
            } else {
                a.x.clone()
            };
            let rows: Vec<ExitFlagRow> = xs
                .into_iter()
                .map(|x| {
                    let point = CRealVector::from_rationals(std::slice::from_ref(&x));
                    let verdict = decider.query(&point, a.fuel);
                    let accepted_at = (verdict == Verdict::Accept)
                        .then(|| {
                            (1..=a.fuel).find(|&t| decider.query(&point, t) == Verdict::Accept)
                        })
                        .flatten();
                    ExitFlagRow {
                        x,
                        verdict,
                        accepted_at,
                    }
                })
                .collect();
            if a.out.is_some() {
                for r in &rows {
                    let v = match r.verdict {
                        Verdict::Accept => "accept",
                        _ => "unknown",
                    };
                    println!("{}\t{v}", r.x);
                }
            }
            let doc = ExitFlagDoc {
                epsilon: a.epsilon.clone(),
                fuel: a.fuel,
                threshold_upper: decider.threshold_upper(a.fuel),
                rows,
            };
            run.emit(a.out.as_deref(), &doc)
        }
    }
}
