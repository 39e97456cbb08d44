//! Exact integer search for one-hidden-layer networks.
//!
//! For `S = (d, N, 1)` the output is `sum_i a_i σ(w_i · x + b_i)`, a sum of
//! independent per-unit contribution vectors over the dataset inputs. Within
//! an integer shell we tabulate every distinct contribution `a σ(w · X + b)`
//! once, then match sums against the labels. The flattened parameter order
//! is `(w_1..w_N, b_1..b_N, a_1..a_N)`, and because each unit's entries only
//! interleave with other units' entries and never with its own, the
//! lexicographically smallest solution for a fixed tuple of contributions
//! takes the smallest `(w, b, a)` per contribution. The result is therefore
//! the same network the plain scan would return first, found without
//! visiting the whole shell.

use std::collections::HashMap;

use crate::enumeration::{shells_before, Mode, ShellValues};
use crate::network::{Activation, Architecture};

pub(crate) struct IntProblem {
    pub xs: Vec<Vec<i64>>,
    pub ys: Vec<i64>,
}

pub(crate) enum UnitSearch {
    /// Zero-based global enumeration index and flattened parameters.
    Found { index: u128, params: Vec<i64> },
    /// No solution before the budget boundary.
    BudgetReached,
    /// Values in the current shell could overflow `i64`; the caller must scan.
    Overflow,
}

const MAGNITUDE_LIMIT: i128 = 1 << 60;

/// Searches shells in order until a member fits exactly, or until the next
/// shell would start at or after `max_index`.
pub(crate) fn search(
    arch: &Architecture,
    act: &Activation,
    problem: &IntProblem,
    max_index: Option<u128>,
) -> UnitSearch {
    debug_assert_eq!(arch.depth(), 2);
    let width = arch.dims()[1];
    for s in 0u64.. {
        let start = shells_before(arch, Mode::Integer, s);
        if max_index.is_some_and(|m| start >= m) {
            return UnitSearch::BudgetReached;
        }
        if !fits_in_i64(act, problem, arch, s) {
            return UnitSearch::Overflow;
        }
        if let Some(params) = search_shell(width, act, problem, s as i64) {
            let shell = ShellValues::new(Mode::Integer, s);
            let idx: Vec<usize> = params.iter().map(|&v| (v + s as i64) as usize).collect();
            return UnitSearch::Found {
                index: start + shell.rank(&idx),
                params,
            };
        }
    }
    unreachable!("shell loop is unbounded")
}

fn fits_in_i64(act: &Activation, p: &IntProblem, arch: &Architecture, s: u64) -> bool {
    let slope = match act {
        Activation::LeakyRelu(q) => q
            .to_i64()
            .map_or(i128::MAX, |v| v.unsigned_abs().max(1) as i128),
        _ => 1,
    };
    let s = s as i128;
    let x_max =
        p.xs.iter()
            .flatten()
            .map(|v| v.unsigned_abs() as i128)
            .max()
            .unwrap_or(0);
    let y_max =
        p.ys.iter()
            .map(|v| v.unsigned_abs() as i128)
            .max()
            .unwrap_or(0);
    let d = arch.dims()[0] as i128;
    let n = arch.dims()[1] as i128;
    let bound = (|| {
        let pre = s.checked_mul(x_max)?.checked_mul(d)?.checked_add(s)?;
        let h = pre.checked_mul(slope)?;
        let c = h.checked_mul(s)?;
        c.checked_mul(n)?.checked_add(y_max)
    })();
    bound.is_some_and(|b| b < MAGNITUDE_LIMIT)
}

fn activate(act: &Activation, v: i64) -> i64 {
    match act {
        Activation::Relu => v.max(0),
        Activation::LeakyRelu(q) => {
            if v < 0 {
                v * q.to_i64().expect("integer slope")
            } else {
                v
            }
        }
        _ => unreachable!("integer search needs an integer-preserving activation"),
    }
}

/// Per-unit parameters `(w_1..w_d, b, a)` in the unit's own lexicographic order.
type UnitKey = Vec<i64>;

fn search_shell(width: usize, act: &Activation, p: &IntProblem, s: i64) -> Option<Vec<i64>> {
    let d = p.xs.first().map_or(0, Vec::len);
    let contributions = unit_contributions(act, p, d, s);
    let mut table: Vec<(&Vec<i64>, &UnitKey)> = contributions.iter().collect();
    // ascending unit key, so the first unit's loop can stop early
    table.sort_by(|a, b| a.1.cmp(b.1));

    let mut best: Option<Vec<i64>> = None;
    let mut chosen: Vec<&UnitKey> = Vec::with_capacity(width);
    let mut residual = p.ys.clone();
    descend(
        width,
        d,
        &table,
        &contributions,
        &mut chosen,
        &mut residual,
        &mut best,
    );
    best
}

#[allow(clippy::too_many_arguments)]
fn descend<'a>(
    width: usize,
    d: usize,
    table: &[(&'a Vec<i64>, &'a UnitKey)],
    lookup: &'a HashMap<Vec<i64>, UnitKey>,
    chosen: &mut Vec<&'a UnitKey>,
    residual: &mut Vec<i64>,
    best: &mut Option<Vec<i64>>,
) {
    if chosen.len() + 1 == width {
        if let Some(key) = lookup.get(residual.as_slice()) {
            chosen.push(key);
            let full = assemble(chosen, d);
            chosen.pop();
            if best.as_ref().is_none_or(|b| &full < b) {
                *best = Some(full);
            }
        }
        return;
    }
    for (contrib, key) in table {
        if chosen.is_empty() {
            if let Some(b) = best {
                // the full key starts with the first unit's weights
                if key[..d] > b[..d] {
                    break;
                }
            }
        }
        for (r, c) in residual.iter_mut().zip(contrib.iter()) {
            *r -= c;
        }
        chosen.push(key);
        descend(width, d, table, lookup, chosen, residual, best);
        chosen.pop();
        for (r, c) in residual.iter_mut().zip(contrib.iter()) {
            *r += c;
        }
    }
}

// flattened order: all unit weights, then all biases, then output weights
fn assemble(units: &[&UnitKey], d: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(units.len() * (d + 2));
    for u in units {
        out.extend_from_slice(&u[..d]);
    }
    for u in units {
        out.push(u[d]);
    }
    for u in units {
        out.push(u[d + 1]);
    }
    out
}

/// Every distinct contribution vector `a σ(w · x_j + b)` with entries in
/// `[-s, s]`, mapped to its smallest unit key.
fn unit_contributions(
    act: &Activation,
    p: &IntProblem,
    d: usize,
    s: i64,
) -> HashMap<Vec<i64>, UnitKey> {
    let mut out: HashMap<Vec<i64>, UnitKey> = HashMap::new();
    let mut wb = vec![-s; d + 1];
    loop {
        let hidden: Vec<i64> =
            p.xs.iter()
                .map(|x| {
                    let pre = x.iter().zip(&wb[..d]).map(|(xi, wi)| xi * wi).sum::<i64>() + wb[d];
                    activate(act, pre)
                })
                .collect();
        for a in -s..=s {
            let c: Vec<i64> = hidden.iter().map(|h| a * h).collect();
            let mut key = wb.clone();
            key.push(a);
            match out.get_mut(&c) {
                Some(existing) => {
                    if key < *existing {
                        *existing = key;
                    }
                }
                None => {
                    out.insert(c, key);
                }
            }
        }
        // odometer over (w, b)
        let mut i = d + 1;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            wb[i] += 1;
            if wb[i] <= s {
                break;
            }
            wb[i] = -s;
        }
    }
}
