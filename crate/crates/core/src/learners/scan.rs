//! Plain enumeration scan, shared by every enumeration learner.

use crate::dataset::Dataset;
use crate::enumeration::{Mode, ShellScan, ShellValues};
use crate::network::{Activation, Architecture, Layer, Network};
use crate::rational::Rational;

pub(crate) enum ScanOutcome {
    Found { network: Network, steps: u128 },
    Exhausted { last: Network, steps: u128 },
}

/// Walks the enumeration in order and returns the first network whose
/// output at every dataset input satisfies `accept(output, label)`.
///
/// Consecutive candidates usually differ only in the output layer, so the
/// hidden activations are cached per prefix of the parameter vector.
pub(crate) fn first_accepted(
    arch: &Architecture,
    mode: Mode,
    dataset: &Dataset,
    act: &Activation,
    max_steps: Option<u128>,
    accept: impl Fn(&Rational, &Rational) -> bool,
) -> ScanOutcome {
    let n = arch.free_param_count();
    let out_width = arch.dims()[arch.depth() - 1];
    let prefix_len = n - out_width;
    let mut steps: u128 = 0;
    let mut last_idx: Vec<usize> = Vec::new();
    let mut last_shell = ShellValues::new(mode, 0);
    for s in 0u64.. {
        let shell = ShellValues::new(mode, s);
        let mut cached_prefix: Option<Vec<usize>> = None;
        let mut hidden: Vec<Vec<Rational>> = Vec::new();
        let mut examined_here = false;
        for idx in ShellScan::new(&shell, n) {
            if max_steps.is_some_and(|m| steps >= m) {
                let from = if examined_here { &shell } else { &last_shell };
                let last = to_network(arch, from, &last_idx);
                return ScanOutcome::Exhausted { last, steps };
            }
            steps += 1;
            if cached_prefix.as_deref() != Some(&idx[..prefix_len]) {
                let prefix_net = hidden_network(arch, &shell, &idx);
                hidden = dataset
                    .pairs()
                    .iter()
                    .map(|p| hidden_features(&prefix_net, act, &p.x))
                    .collect();
                cached_prefix = Some(idx[..prefix_len].to_vec());
            }
            let out_weights = &idx[prefix_len..];
            let fits = dataset.pairs().iter().zip(&hidden).all(|(p, h)| {
                let mut y = Rational::zero();
                for (&w, v) in out_weights.iter().zip(h) {
                    let w = &shell.values[w];
                    if !w.is_zero() && !v.is_zero() {
                        y += &(w * v);
                    }
                }
                accept(&y, &p.y)
            });
            if fits {
                return ScanOutcome::Found {
                    network: to_network(arch, &shell, &idx),
                    steps,
                };
            }
            last_idx = idx;
            examined_here = true;
        }
        last_shell = shell;
    }
    unreachable!("shell loop is unbounded")
}

fn to_network(arch: &Architecture, shell: &ShellValues, idx: &[usize]) -> Network {
    let params: Vec<Rational> = idx.iter().map(|&i| shell.values[i].clone()).collect();
    Network::from_free_params(arch, &params).expect("arity fixed by the architecture")
}

// The candidate with its output weights zeroed: only the hidden layers matter.
fn hidden_network(arch: &Architecture, shell: &ShellValues, idx: &[usize]) -> Vec<Layer> {
    let net = to_network(arch, shell, idx);
    let layers = net.layers();
    layers[..layers.len() - 1].to_vec()
}

fn hidden_features(hidden: &[Layer], act: &Activation, x: &[Rational]) -> Vec<Rational> {
    let mut h = x.to_vec();
    for layer in hidden {
        h = layer
            .apply(&h)
            .iter()
            .map(|v| {
                act.eval_rational(v)
                    .expect("learners require exact activations")
            })
            .collect();
    }
    h
}
