use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use exactnet::{Activation, Architecture, Rational};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "exactnet",
    version,
    about = "Exact-arithmetic network learning and classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Learn a network from a dataset.
    Learn(LearnArgs),
    /// Generate a labelled dataset from a network file.
    Gen(GenArgs),
    /// Classify a point against ball-union classes.
    Classify(ClassifyArgs),
    /// Run a built-in demonstration.
    Demo(DemoArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Learner {
    Enum,
    Lipschitz,
    Quantized,
    Decode,
}

#[derive(Args, Debug, Serialize)]
pub struct LearnArgs {
    #[arg(value_enum)]
    pub learner: Learner,
    #[arg(long)]
    pub dataset: PathBuf,
    /// Layer widths, e.g. "2,3,1".
    #[arg(long)]
    #[serde(serialize_with = "as_display")]
    pub arch: Architecture,
    #[arg(long, default_value = "1/8")]
    pub epsilon: Rational,
    #[arg(long, default_value_t = 1)]
    pub a_max: u64,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long, default_value = "relu")]
    #[serde(serialize_with = "as_display")]
    pub activation: Activation,
    /// Report path; the learned network goes next to it as `*.network.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[arg(long)]
    pub net: PathBuf,
    /// Explicit inputs: coordinates separated by ',', points by ';'.
    #[arg(long, allow_hyphen_values = true, group = "inputs")]
    pub points: Option<String>,
    /// Integer grid `lo:hi` in every coordinate.
    #[arg(long, allow_hyphen_values = true, group = "inputs")]
    pub grid: Option<String>,
    /// This many seeded integer points in `[-range, range]^d`.
    #[arg(long, group = "inputs")]
    pub random: Option<usize>,
    /// Gödel-encoded dataset of an integer network.
    #[arg(long, group = "inputs")]
    pub encoded: bool,
    /// Dataset size for `--encoded`.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub range: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    /// Ball-union file for the next class; repeat once per class.
    #[arg(long = "class", required = true)]
    pub classes: Vec<PathBuf>,
    /// Query point, coordinates separated by ','.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, default_value_t = 64)]
    pub fuel: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Demo {
    Topology,
    Exitflag,
}

#[derive(Args, Debug, Serialize)]
pub struct DemoArgs {
    #[arg(value_enum)]
    pub which: Demo,
    /// Largest spike index for `topology`.
    #[arg(long, default_value_t = 12)]
    pub k_max: u32,
    #[arg(long, default_value = "1/2")]
    pub epsilon: Rational,
    #[arg(long, default_value_t = 64)]
    pub fuel: u32,
    /// Sample points for `exitflag`; defaults to -3, -5/2, …, 3.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Vec<Rational>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn as_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn parse_point(text: &str) -> Result<Vec<Rational>, String> {
    text.split(',')
        .map(|c| c.trim().parse::<Rational>().map_err(|e| e.to_string()))
        .collect()
}

pub fn parse_points(text: &str) -> Result<Vec<Vec<Rational>>, String> {
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(parse_point)
        .collect()
}

pub fn parse_grid(text: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("grid {text:?} is not of the form lo:hi"))?;
    let lo: i64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad grid bound {lo:?}"))?;
    let hi: i64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad grid bound {hi:?}"))?;
    if lo > hi {
        return Err(format!("empty grid {lo}:{hi}"));
    }
    Ok((lo, hi))
}
