//! Feed-forward networks with exact rational parameters.
//!
//! A network of architecture `(N_0, ..., N_L)` is a list of affine maps
//! `T_l(x) = A_l x + b_l`; its realization is `T_L ∘ σ ∘ T_{L-1} ∘ ... ∘ σ ∘ T_1`.
//! Outputs are scalar (`N_L = 1`) and the final bias is pinned to zero.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::creal::{CReal, CRealVector, Precision};
use crate::dataset::{Dataset, Sample};
use crate::error::NetworkError;
use crate::rational::{Rational, SQRT_BOUND_BITS};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Architecture {
    dims: Vec<usize>,
}

impl Architecture {
    pub fn new(dims: Vec<usize>) -> Result<Self, NetworkError> {
        if dims.len() < 2 {
            return Err(NetworkError::InvalidArchitecture(
                "need at least an input and an output layer".into(),
            ));
        }
        if dims.contains(&0) {
            return Err(NetworkError::InvalidArchitecture(
                "layer widths must be positive".into(),
            ));
        }
        if *dims.last().unwrap() != 1 {
            return Err(NetworkError::InvalidArchitecture(
                "output width must be 1".into(),
            ));
        }
        Ok(Architecture { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn depth(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    /// `N(S) = sum_l (N_l N_{l-1} + N_l)`, counting the pinned final bias.
    pub fn param_count(&self) -> usize {
        self.dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }

    /// Parameters that can vary: `N(S)` minus the final bias.
    pub fn free_param_count(&self) -> usize {
        self.param_count() - 1
    }

    /// Upper bound `sqrt(N_l N_{l-1})` for each layer.
    fn layer_sqrt_bounds(&self, sqrt_ub: &dyn Fn(&Rational) -> Rational) -> Vec<Rational> {
        self.dims
            .windows(2)
            .map(|w| sqrt_ub(&Rational::from((w[0] * w[1]) as i64)))
            .collect()
    }
}

impl TryFrom<Vec<usize>> for Architecture {
    type Error = NetworkError;
    fn try_from(dims: Vec<usize>) -> Result<Self, Self::Error> {
        Architecture::new(dims)
    }
}

impl From<Architecture> for Vec<usize> {
    fn from(a: Architecture) -> Self {
        a.dims
    }
}

impl FromStr for Architecture {
    type Err = NetworkError;
    /// Parses `"N0,N1,...,1"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let dims = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| NetworkError::InvalidArchitecture(s.to_string()))?;
        Architecture::new(dims)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Layer {
    /// `rows x cols`, stored row-major.
    pub weights: Vec<Rational>,
    pub bias: Vec<Rational>,
    pub rows: usize,
    pub cols: usize,
}

impl Layer {
    pub fn weight(&self, i: usize, j: usize) -> &Rational {
        &self.weights[i * self.cols + j]
    }

    pub fn max_abs_weight(&self) -> Rational {
        self.weights
            .iter()
            .map(Rational::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.rows)
            .map(|i| {
                let row = &self.weights[i * self.cols..(i + 1) * self.cols];
                let mut acc = self.bias[i].clone();
                for (w, v) in row.iter().zip(x) {
                    if !w.is_zero() && !v.is_zero() {
                        acc += &(w * v);
                    }
                }
                acc
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Network {
    architecture: Architecture,
    layers: Vec<Layer>,
}

impl Network {
    /// `layers[l] = (row-major A_l, b_l)`. Shapes must match the architecture
    /// and the final bias must be zero.
    pub fn new(
        architecture: Architecture,
        layers: Vec<(Vec<Rational>, Vec<Rational>)>,
    ) -> Result<Self, NetworkError> {
        if layers.len() != architecture.depth() {
            return Err(NetworkError::ShapeMismatch {
                expected: architecture.depth(),
                got: layers.len(),
            });
        }
        let mut built = Vec::with_capacity(layers.len());
        for (l, (weights, bias)) in layers.into_iter().enumerate() {
            let rows = architecture.dims[l + 1];
            let cols = architecture.dims[l];
            if weights.len() != rows * cols {
                return Err(NetworkError::ShapeMismatch {
                    expected: rows * cols,
                    got: weights.len(),
                });
            }
            if bias.len() != rows {
                return Err(NetworkError::ShapeMismatch {
                    expected: rows,
                    got: bias.len(),
                });
            }
            built.push(Layer {
                weights,
                bias,
                rows,
                cols,
            });
        }
        if built.last().unwrap().bias.iter().any(|b| !b.is_zero()) {
            return Err(NetworkError::NonzeroFinalBias);
        }
        Ok(Network {
            architecture,
            layers: built,
        })
    }

    pub fn zero(architecture: &Architecture) -> Self {
        let params = vec![Rational::zero(); architecture.free_param_count()];
        Network::from_free_params(architecture, &params).expect("shape is correct by construction")
    }

    /// Inverse of [`Network::free_params`]: layer-major, weights (row-major)
    /// before biases, final bias omitted.
    pub fn from_free_params(
        architecture: &Architecture,
        params: &[Rational],
    ) -> Result<Self, NetworkError> {
        if params.len() != architecture.free_param_count() {
            return Err(NetworkError::ShapeMismatch {
                expected: architecture.free_param_count(),
                got: params.len(),
            });
        }
        let depth = architecture.depth();
        let mut layers = Vec::with_capacity(depth);
        let mut at = 0;
        for l in 0..depth {
            let rows = architecture.dims[l + 1];
            let cols = architecture.dims[l];
            let weights = params[at..at + rows * cols].to_vec();
            at += rows * cols;
            let bias = if l + 1 == depth {
                vec![Rational::zero(); rows]
            } else {
                let b = params[at..at + rows].to_vec();
                at += rows;
                b
            };
            layers.push((weights, bias));
        }
        Network::new(architecture.clone(), layers)
    }

    pub fn free_params(&self) -> Vec<Rational> {
        let depth = self.layers.len();
        let mut out = Vec::with_capacity(self.architecture.free_param_count());
        for (l, layer) in self.layers.iter().enumerate() {
            out.extend(layer.weights.iter().cloned());
            if l + 1 != depth {
                out.extend(layer.bias.iter().cloned());
            }
        }
        out
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// True for members of the integer-parameter subset.
    pub fn is_integer(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(Rational::is_integer))
    }

    /// Maximum absolute weight-matrix entry over all layers; biases excluded.
    pub fn scaling_norm(&self) -> Rational {
        self.layers
            .iter()
            .map(Layer::max_abs_weight)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn realize(&self, act: &Activation, x: &[Rational]) -> Result<Rational, NetworkError> {
        if !act.exact_on_rationals() {
            return Err(NetworkError::InexactActivation(act.to_string()));
        }
        self.check_input(x.len())?;
        let mut h = x.to_vec();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            h = layer.apply(&h);
            if l != last {
                for v in h.iter_mut() {
                    *v = act.eval_exact(v);
                }
            }
        }
        Ok(h.pop().expect("output width is 1"))
    }

    /// Output as a computable real, for computable inputs.
    pub fn realize_creal_name(
        &self,
        act: &Activation,
        x: &CRealVector,
    ) -> Result<CReal, NetworkError> {
        self.check_input(x.dim())?;
        let mut h: Vec<CReal> = x.components().to_vec();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            h = (0..layer.rows)
                .map(|i| {
                    let terms = (0..layer.cols)
                        .map(|j| (layer.weight(i, j).clone(), h[j].clone()))
                        .collect();
                    let pre = CReal::linear_combination(terms, layer.bias[i].clone());
                    if l == last {
                        pre
                    } else {
                        act.apply_creal(&pre)
                    }
                })
                .collect();
        }
        Ok(h.pop().expect("output width is 1"))
    }

    /// A rational within `2^-k` of the realization at a computable input.
    pub fn realize_creal(
        &self,
        act: &Activation,
        x: &CRealVector,
        k: Precision,
    ) -> Result<Rational, NetworkError> {
        Ok(self.realize_creal_name(act, x)?.approx(k))
    }

    /// Upper bound on the Euclidean Lipschitz constant of the realization:
    /// `Lip(σ)^(L-1) · prod_l sqrt(N_l N_{l-1})_ub · max|A_l|`, using
    /// `‖A‖_2 <= ‖A‖_F <= sqrt(mn) max|A_ij|`.
    pub fn lipschitz_bound(&self, act: &Activation) -> Rational {
        self.lipschitz_bound_with(act, &default_sqrt_ub)
    }

    /// [`Network::lipschitz_bound`] with a caller-supplied square-root upper bound.
    pub fn lipschitz_bound_with(
        &self,
        act: &Activation,
        sqrt_ub: &dyn Fn(&Rational) -> Rational,
    ) -> Rational {
        let roots = self.architecture.layer_sqrt_bounds(sqrt_ub);
        let act_factor = act
            .lipschitz_constant()
            .pow(self.architecture.depth() as u32 - 1);
        self.layers
            .iter()
            .zip(roots)
            .map(|(layer, root)| root * layer.max_abs_weight())
            .fold(act_factor, |acc, f| acc * f)
    }

    fn check_input(&self, got: usize) -> Result<(), NetworkError> {
        let expected = self.architecture.input_dim();
        if got != expected {
            return Err(NetworkError::ShapeMismatch { expected, got });
        }
        Ok(())
    }
}

pub(crate) fn default_sqrt_ub(q: &Rational) -> Rational {
    q.sqrt_upper(SQRT_BOUND_BITS)
}

pub(crate) fn default_sqrt_lb(q: &Rational) -> Rational {
    q.sqrt_lower(SQRT_BOUND_BITS)
}

/// Worst-case Lipschitz bound over every network of this architecture whose
/// weight entries are bounded by `a_max` in magnitude.
pub fn admissible_lipschitz_bound(
    architecture: &Architecture,
    act: &Activation,
    a_max: &Rational,
) -> Rational {
    let depth = architecture.depth() as u32;
    architecture
        .layer_sqrt_bounds(&default_sqrt_ub)
        .into_iter()
        .fold(act.lipschitz_constant().pow(depth - 1), |acc, r| acc * r)
        * a_max.pow(depth)
}

/// Scalar activation functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Relu,
    /// `x` for `x >= 0`, `slope · x` otherwise.
    LeakyRelu(Rational),
    /// Piecewise-linear sigmoid surrogate `clamp(x/4 + 1/2, 0, 1)`.
    HardSigmoid,
    /// `arctan`, only available through interval evaluation.
    Atan,
}

impl Activation {
    pub fn exact_on_rationals(&self) -> bool {
        !matches!(self, Activation::Atan)
    }

    /// σ maps integers to integers, so integer networks have integer outputs.
    pub fn preserves_integers(&self) -> bool {
        match self {
            Activation::Relu => true,
            Activation::LeakyRelu(s) => s.is_integer(),
            Activation::HardSigmoid | Activation::Atan => false,
        }
    }

    pub fn eval_rational(&self, x: &Rational) -> Option<Rational> {
        self.exact_on_rationals().then(|| self.eval_exact(x))
    }

    fn eval_exact(&self, x: &Rational) -> Rational {
        match self {
            Activation::Relu => {
                if x.is_negative() {
                    Rational::zero()
                } else {
                    x.clone()
                }
            }
            Activation::LeakyRelu(s) => {
                if x.is_negative() {
                    s * x
                } else {
                    x.clone()
                }
            }
            Activation::HardSigmoid => {
                let v = x * &Rational::new(1, 4) + Rational::new(1, 2);
                v.max(Rational::zero()).min(Rational::one())
            }
            Activation::Atan => unreachable!("atan has no exact rational path"),
        }
    }

    /// For every `u` with `|u - center| <= radius`, the result is within
    /// `lipschitz_constant() · radius + 2^-k` of `σ(u)`.
    pub fn eval_interval(&self, center: &Rational, _radius: &Rational, k: Precision) -> Rational {
        match self {
            Activation::Atan => {
                // shrink the center first; atan is 1-Lipschitz
                let c = center.floor_dyadic(k + 2);
                CReal::atan_rational(&c).approx(k + 2)
            }
            _ => self.eval_exact(center),
        }
    }

    pub fn lipschitz_constant(&self) -> Rational {
        match self {
            Activation::Relu | Activation::Atan => Rational::one(),
            Activation::LeakyRelu(s) => s.abs().max(Rational::one()),
            Activation::HardSigmoid => Rational::new(1, 4),
        }
    }

    /// `σ(x)` as a computable real.
    pub fn apply_creal(&self, x: &CReal) -> CReal {
        let act = self.clone();
        let x = x.clone();
        let lip = self.lipschitz_constant();
        let extra = if lip.is_zero() {
            0
        } else {
            lip.ceil_log2().max(0) as u32
        };
        CReal::from_fn(move |k| {
            let q = k + 1 + extra;
            let center = x.approx(q);
            act.eval_interval(&center, &Rational::pow2(-(q as i64)), k + 1)
        })
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Relu => write!(f, "relu"),
            Activation::LeakyRelu(s) => write!(f, "leaky_relu:{s}"),
            Activation::HardSigmoid => write!(f, "hard_sigmoid"),
            Activation::Atan => write!(f, "atan"),
        }
    }
}

impl FromStr for Activation {
    type Err = NetworkError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || NetworkError::UnknownActivation(s.to_string());
        match s {
            "relu" => Ok(Activation::Relu),
            "hard_sigmoid" => Ok(Activation::HardSigmoid),
            "atan" => Ok(Activation::Atan),
            _ => {
                let slope = s.strip_prefix("leaky_relu:").ok_or_else(unknown)?;
                Ok(Activation::LeakyRelu(slope.parse().map_err(|_| unknown())?))
            }
        }
    }
}

impl Serialize for Activation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Activation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Seeded rational samples inside the balls `B_radius(x_i)` around the
/// dataset inputs, labelled by the exact realization of `net`.
pub fn sample_generalization_ball(
    net: &Network,
    act: &Activation,
    dataset: &Dataset,
    radius: &Rational,
    samples_per_point: usize,
    seed: u64,
) -> Result<Dataset, NetworkError> {
    assert!(!radius.is_negative(), "radius must be non-negative");
    let d = dataset.dim();
    net.check_input(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(dataset.len() * samples_per_point);
    for sample in dataset.pairs() {
        for _ in 0..samples_per_point {
            let x = ball_point(&mut rng, &sample.x, radius);
            let y = net.realize(act, &x)?;
            out.push(Sample { x, y });
        }
    }
    Dataset::new(d, out)
}

// center + radius · t · u / ‖u‖_ub with t in [0, 1]; since ‖u‖_ub >= ‖u‖ the
// offset never exceeds the radius.
fn ball_point(rng: &mut ChaCha8Rng, center: &[Rational], radius: &Rational) -> Vec<Rational> {
    const DIRECTION_RANGE: i64 = 64;
    const STEPS: i64 = 1024;
    let u: Vec<Rational> = center
        .iter()
        .map(|_| Rational::from(rng.gen_range(-DIRECTION_RANGE..=DIRECTION_RANGE)))
        .collect();
    let norm_sq: Rational = u.iter().map(|v| v * v).sum();
    if norm_sq.is_zero() || radius.is_zero() {
        return center.to_vec();
    }
    let t = Rational::new(rng.gen_range(0..=STEPS), STEPS);
    let factor = radius * &t / norm_sq.sqrt_upper(SQRT_BOUND_BITS);
    center
        .iter()
        .zip(&u)
        .map(|(c, v)| c + &(v * &factor))
        .collect()
}

#[derive(Serialize, Deserialize)]
struct RawLayer {
    #[serde(rename = "A")]
    a: Vec<Rational>,
    b: Vec<Rational>,
}

/// On-disk network document: architecture, row-major layers and activation.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkFile {
    pub network: Network,
    pub activation: Activation,
}

#[derive(Serialize, Deserialize)]
struct RawNetworkFile {
    architecture: Architecture,
    layers: Vec<RawLayer>,
    activation: Activation,
}

impl Serialize for NetworkFile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawNetworkFile {
            architecture: self.network.architecture.clone(),
            layers: self
                .network
                .layers
                .iter()
                .map(|l| RawLayer {
                    a: l.weights.clone(),
                    b: l.bias.clone(),
                })
                .collect(),
            activation: self.activation.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NetworkFile {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawNetworkFile::deserialize(deserializer)?;
        let network = Network::new(
            raw.architecture,
            raw.layers.into_iter().map(|l| (l.a, l.b)).collect(),
        )
        .map_err(serde::de::Error::custom)?;
        Ok(NetworkFile {
            network,
            activation: raw.activation,
        })
    }
}
