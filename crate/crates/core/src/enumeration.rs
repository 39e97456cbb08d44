//! Fair enumerations of parameter vectors and the integer Gödel encoding.
//!
//! Parameter vectors are enumerated shell by shell. Integer mode measures a
//! vector by its largest absolute entry; rational mode by the largest
//! `max(|p|, q)` over its entries (zero has measure 0). Shell `s` holds
//! exactly the vectors of measure `s`, listed in lexicographic order of the
//! flattened free parameters (layer-major, row-major, weights before biases,
//! final bias excluded) with each coordinate ordered by numeric value. Every
//! vector therefore appears exactly once, at a finite index, and the order
//! starts with the all-zero network.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::DecodeError;
use crate::network::{Architecture, Network};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Integer,
    Rational,
}

/// Measure of a single entry under `mode`; `None` if the entry is not
/// representable (a fraction in integer mode).
pub fn entry_measure(mode: Mode, q: &Rational) -> Option<u64> {
    if q.is_zero() {
        return Some(0);
    }
    match mode {
        Mode::Integer => q
            .to_integer()
            .and_then(|n| u64::try_from(n.magnitude().clone()).ok()),
        Mode::Rational => u64::try_from(q.height()).ok(),
    }
}

/// The sorted coordinate values allowed in shell `s` and, for each, whether
/// it has measure exactly `s`.
#[derive(Clone, Debug)]
pub struct ShellValues {
    pub values: Vec<Rational>,
    pub top: Vec<bool>,
}

impl ShellValues {
    pub fn new(mode: Mode, s: u64) -> Self {
        let s_i = s as i64;
        let values: Vec<Rational> = match mode {
            Mode::Integer => (-s_i..=s_i).map(Rational::from).collect(),
            Mode::Rational => {
                let mut v = vec![Rational::zero()];
                for q in 1..=s_i {
                    for p in -s_i..=s_i {
                        if p != 0 && p.gcd(&q) == 1 {
                            v.push(Rational::new(p, q));
                        }
                    }
                }
                v.sort();
                v
            }
        };
        let top = values
            .iter()
            .map(|q| entry_measure(mode, q) == Some(s))
            .collect();
        ShellValues { values, top }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn top_count(&self) -> usize {
        self.top.iter().filter(|&&t| t).count()
    }

    pub fn index_of(&self, q: &Rational) -> Option<usize> {
        self.values.binary_search(q).ok()
    }

    /// Number of length-`r` suffixes that complete a prefix into a shell
    /// member; `seen_top` says whether the prefix already has a top entry.
    fn completions(&self, r: u32, seen_top: bool) -> u128 {
        let m = self.len() as u128;
        let t = self.top_count() as u128;
        let all = checked_pow(m, r);
        if seen_top {
            all
        } else {
            all - checked_pow(m - t, r)
        }
    }

    /// Number of vectors of length `n` in this shell.
    pub fn shell_size(&self, n: usize) -> u128 {
        self.completions(n as u32, false)
    }

    /// Lexicographic rank of an index vector among shell members.
    pub fn rank(&self, idx: &[usize]) -> u128 {
        let n = idx.len();
        let mut seen = false;
        let mut rank = 0u128;
        for (i, &v) in idx.iter().enumerate() {
            let r = (n - i - 1) as u32;
            for smaller in 0..v {
                rank += self.completions(r, seen || self.top[smaller]);
            }
            seen |= self.top[v];
        }
        rank
    }

    /// Inverse of [`ShellValues::rank`].
    pub fn unrank(&self, n: usize, mut pos: u128) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        let mut seen = false;
        for i in 0..n {
            let r = (n - i - 1) as u32;
            let mut chosen = None;
            for v in 0..self.len() {
                let c = self.completions(r, seen || self.top[v]);
                if pos < c {
                    chosen = Some(v);
                    break;
                }
                pos -= c;
            }
            let v = chosen.expect("position lies inside the shell");
            seen |= self.top[v];
            out.push(v);
        }
        out
    }
}

fn checked_pow(base: u128, exp: u32) -> u128 {
    base.checked_pow(exp)
        .expect("enumeration index overflows u128")
}

/// Resumable position in the enumeration of all networks of one architecture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationCursor {
    pub architecture: Architecture,
    pub mode: Mode,
    pub shell_index: u64,
    pub position_in_shell: u128,
}

impl EnumerationCursor {
    pub fn new(architecture: Architecture, mode: Mode) -> Self {
        EnumerationCursor {
            architecture,
            mode,
            shell_index: 0,
            position_in_shell: 0,
        }
    }

    /// The network at the cursor and the advanced cursor.
    pub fn next_network(&self) -> (Network, EnumerationCursor) {
        let n = self.architecture.free_param_count();
        let shell = ShellValues::new(self.mode, self.shell_index);
        let idx = shell.unrank(n, self.position_in_shell);
        let params: Vec<Rational> = idx.iter().map(|&i| shell.values[i].clone()).collect();
        let net = Network::from_free_params(&self.architecture, &params)
            .expect("free parameter count matches the architecture");
        let mut next = self.clone();
        next.position_in_shell += 1;
        if next.position_in_shell == shell.shell_size(n) {
            next.shell_index += 1;
            next.position_in_shell = 0;
        }
        (net, next)
    }

    /// Zero-based global index of the cursor position.
    pub fn global_index(&self) -> u128 {
        shells_before(&self.architecture, self.mode, self.shell_index) + self.position_in_shell
    }
}

/// Total size of shells `0..s`.
pub fn shells_before(architecture: &Architecture, mode: Mode, s: u64) -> u128 {
    let n = architecture.free_param_count();
    (0..s)
        .map(|t| ShellValues::new(mode, t).shell_size(n))
        .fold(0u128, |acc, x| {
            acc.checked_add(x)
                .expect("enumeration index overflows u128")
        })
}

/// Shell and in-shell position of a network, or `None` if it has entries
/// that `mode` does not enumerate.
pub fn locate(net: &Network, mode: Mode) -> Option<(u64, u128)> {
    let params = net.free_params();
    let s = params
        .iter()
        .map(|q| entry_measure(mode, q))
        .collect::<Option<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let shell = ShellValues::new(mode, s);
    let idx = params
        .iter()
        .map(|q| shell.index_of(q))
        .collect::<Option<Vec<_>>>()?;
    Some((s, shell.rank(&idx)))
}

/// Iterates the index vectors of one shell in lexicographic order.
pub(crate) struct ShellScan {
    m: usize,
    top: Vec<bool>,
    current: Option<Vec<usize>>,
}

impl ShellScan {
    pub fn new(shell: &ShellValues, n: usize) -> Self {
        let first = shell.unrank(n, 0);
        ShellScan {
            m: shell.len(),
            top: shell.top.clone(),
            current: Some(first),
        }
    }

    fn advance(&mut self) {
        let Some(cur) = self.current.as_mut() else {
            return;
        };
        loop {
            // odometer increment, last coordinate fastest
            let mut i = cur.len();
            loop {
                if i == 0 {
                    self.current = None;
                    return;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < self.m {
                    break;
                }
                cur[i] = 0;
            }
            if cur.iter().any(|&v| self.top[v]) {
                return;
            }
        }
    }
}

impl Iterator for ShellScan {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        self.advance();
        Some(out)
    }
}

/// `0, -1, 1, -2, 2, ...  ->  0, 1, 2, 3, 4, ...`
pub fn zigzag_encode(z: &BigInt) -> BigUint {
    match z.sign() {
        Sign::Minus => (z.magnitude() << 1usize) - 1u32,
        _ => z.magnitude() << 1usize,
    }
}

pub fn zigzag_decode(n: &BigUint) -> BigInt {
    let half = BigInt::from(n >> 1usize);
    if n.is_odd() {
        -half - 1
    } else {
        half
    }
}

/// Cantor pairing `(a + b)(a + b + 1)/2 + b`.
pub fn cantor_pair(a: &BigUint, b: &BigUint) -> BigUint {
    let w = a + b;
    ((&w * (&w + 1u32)) >> 1usize) + b
}

pub fn cantor_unpair(z: &BigUint) -> (BigUint, BigUint) {
    // w = floor((sqrt(8z + 1) - 1) / 2)
    let w = (((z << 3usize) + 1u32).sqrt() - 1u32) >> 1usize;
    let t = (&w * (&w + 1u32)) >> 1usize;
    let b = z - t;
    let a = &w - &b;
    (a, b)
}

/// Left-associated iterated pairing; a bijection `N^n -> N` for each fixed `n >= 1`.
pub fn tuple_encode(v: &[BigUint]) -> BigUint {
    match v.split_first() {
        None => BigUint::zero(),
        Some((first, rest)) => rest
            .iter()
            .fold(first.clone(), |acc, x| cantor_pair(&acc, x)),
    }
}

pub fn tuple_decode(mut z: BigUint, n: usize) -> Vec<BigUint> {
    if n == 0 {
        return Vec::new();
    }
    let mut out = vec![BigUint::zero(); n];
    for i in (1..n).rev() {
        let (a, b) = cantor_unpair(&z);
        out[i] = b;
        z = a;
    }
    out[0] = z;
    out
}

/// Encodes an integer parameter vector into `Z^d`: the tuple code of the
/// zigzagged parameters goes in the first coordinate, zeros elsewhere.
pub fn godel_encode(params: &[BigInt], d: usize) -> Result<Vec<BigInt>, DecodeError> {
    if d == 0 {
        return Err(DecodeError::ZeroDimension);
    }
    let zz: Vec<BigUint> = params.iter().map(zigzag_encode).collect();
    let mut out = vec![BigInt::zero(); d];
    out[0] = BigInt::from(tuple_encode(&zz));
    Ok(out)
}

/// Inverse of [`godel_encode`] for parameter vectors of length `n`.
pub fn godel_decode(x: &[Rational], n: usize) -> Result<Vec<BigInt>, DecodeError> {
    let (first, rest) = x.split_first().ok_or(DecodeError::ZeroDimension)?;
    if let Some(i) = rest.iter().position(|v| !v.is_zero()) {
        return Err(DecodeError::NonzeroPadding(i + 1));
    }
    let code = first
        .to_integer()
        .and_then(|z| z.to_biguint())
        .ok_or_else(|| DecodeError::NotNatural(first.to_string()))?;
    if n == 0 {
        return if code.is_zero() {
            Ok(Vec::new())
        } else {
            Err(DecodeError::WrongLength(0))
        };
    }
    Ok(tuple_decode(code, n).iter().map(zigzag_decode).collect())
}

/// Lexicographic comparison of two parameter vectors by value.
pub fn lex_cmp(a: &[Rational], b: &[Rational]) -> Ordering {
    a.cmp(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::tests::arch;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn big(z: i64) -> BigInt {
        BigInt::from(z)
    }

    #[test]
    fn zigzag_table() {
        assert_eq!(zigzag_encode(&big(0)), BigUint::from(0u32));
        assert_eq!(zigzag_encode(&big(-1)), BigUint::from(1u32));
        assert_eq!(zigzag_encode(&big(1)), BigUint::from(2u32));
        assert_eq!(zigzag_encode(&big(3)), BigUint::from(6u32));
        // brute-force oracle: the n-th element of 0, -1, 1, -2, 2, ... maps to n
        let mut seq = vec![0i64];
        for k in 1..=100 {
            seq.push(-k);
            seq.push(k);
        }
        for (n, z) in seq.iter().enumerate() {
            assert_eq!(zigzag_encode(&big(*z)), BigUint::from(n));
        }
        for z in -10_000i64..=10_000 {
            assert_eq!(zigzag_decode(&zigzag_encode(&big(z))), big(z));
        }
    }

    #[test]
    fn cantor_round_trip() {
        for a in 0u32..50 {
            for b in 0u32..50 {
                let z = cantor_pair(&a.into(), &b.into());
                assert_eq!(cantor_unpair(&z), (a.into(), b.into()));
            }
        }
        // bijection on an initial segment
        let codes: HashSet<BigUint> = (0u32..60)
            .flat_map(|a| (0u32..60).map(move |b| (a, b)))
            .filter(|(a, b)| a + b < 60)
            .map(|(a, b)| cantor_pair(&a.into(), &b.into()))
            .collect();
        assert_eq!(codes, (0u32..1830).map(BigUint::from).collect());
    }

    #[test]
    fn godel_examples() {
        assert_eq!(
            godel_encode(&[big(0), big(0)], 2).unwrap(),
            vec![big(0), big(0)]
        );
        assert_eq!(godel_encode(&[big(3)], 1).unwrap(), vec![big(6)]);
        assert_eq!(godel_encode(&[big(1)], 0), Err(DecodeError::ZeroDimension));
        let x = vec![Rational::from(6)];
        assert_eq!(godel_decode(&x, 1).unwrap(), vec![big(3)]);
        assert!(matches!(
            godel_decode(&[Rational::from(-4)], 3),
            Err(DecodeError::NotNatural(_))
        ));
        assert!(matches!(
            godel_decode(&[Rational::new(1, 2)], 3),
            Err(DecodeError::NotNatural(_))
        ));
        assert_eq!(
            godel_decode(&[Rational::from(5), Rational::from(1)], 3),
            Err(DecodeError::NonzeroPadding(1))
        );
    }

    proptest! {
        #[test]
        fn godel_round_trip(v in proptest::collection::vec(-5i64..=5, 8), d in 1usize..4) {
            let params: Vec<BigInt> = v.iter().map(|&z| big(z)).collect();
            let enc = godel_encode(&params, d).unwrap();
            prop_assert_eq!(enc.len(), d);
            let as_rat: Vec<Rational> = enc.into_iter().map(Rational::from).collect();
            prop_assert_eq!(godel_decode(&as_rat, 8).unwrap(), params);
        }

        #[test]
        fn tuple_code_is_bijective_prefix(z in 0u64..1_000_000, n in 1usize..6) {
            let z = BigUint::from(z);
            prop_assert_eq!(tuple_encode(&tuple_decode(z.clone(), n)), z);
        }
    }

    #[test]
    fn first_network_is_zero() {
        let a = arch(&[1, 1, 1]);
        for mode in [Mode::Integer, Mode::Rational] {
            let (net, next) = EnumerationCursor::new(a.clone(), mode).next_network();
            assert_eq!(net, Network::zero(&a));
            assert_eq!((next.shell_index, next.position_in_shell), (1, 0));
        }
    }

    #[test]
    fn shell_one_is_ternary_cube() {
        // free params A1, b1, A2: the first 27 networks cover {-1,0,1}^3 exactly
        let a = arch(&[1, 1, 1]);
        let mut cursor = EnumerationCursor::new(a.clone(), Mode::Integer);
        let mut seen = HashSet::new();
        for _ in 0..27 {
            let (net, next) = cursor.next_network();
            seen.insert(net.free_params());
            cursor = next;
        }
        let mut brute = HashSet::new();
        for x in -1..=1 {
            for y in -1..=1 {
                for z in -1..=1 {
                    brute.insert(vec![
                        Rational::from(x),
                        Rational::from(y),
                        Rational::from(z),
                    ]);
                }
            }
        }
        assert_eq!(seen, brute);
        assert_eq!(cursor.shell_index, 2);
    }

    #[test]
    fn rational_half_index() {
        // single free parameter: architecture (1, 1)
        let a = arch(&[1, 1]);
        let mut cursor = EnumerationCursor::new(a, Mode::Rational);
        let target = Rational::new(1, 2);
        let mut index = 0;
        loop {
            let (net, next) = cursor.next_network();
            if net.free_params()[0] == target {
                break;
            }
            cursor = next;
            index += 1;
        }
        // 0 | -1 1 | -2 -1/2 1/2 2  (order-specific fixture)
        assert_eq!(index, 5);
    }

    #[test]
    fn no_duplicates_and_sorted_shells() {
        let a = arch(&[1, 2, 1]);
        for mode in [Mode::Integer, Mode::Rational] {
            let mut cursor = EnumerationCursor::new(a.clone(), mode);
            let mut seen = HashSet::new();
            let mut prev: Option<(u64, Vec<Rational>)> = None;
            for i in 0..10_000u128 {
                assert_eq!(cursor.global_index(), i);
                let shell = cursor.shell_index;
                let (net, next) = cursor.next_network();
                let p = net.free_params();
                assert_eq!(locate(&net, mode), Some((shell, cursor.position_in_shell)));
                if let Some((ps, pp)) = &prev {
                    if *ps == shell {
                        assert_eq!(lex_cmp(pp, &p), Ordering::Less);
                    }
                }
                assert!(seen.insert(p.clone()));
                prev = Some((shell, p));
                cursor = next;
            }
        }
    }

    #[test]
    fn completeness_small_shells() {
        // every integer network with entries in [-2, 2] is reached by shell 2
        let a = arch(&[1, 1, 1]);
        let mut cursor = EnumerationCursor::new(a, Mode::Integer);
        let mut seen = HashSet::new();
        while cursor.shell_index <= 2 {
            let (net, next) = cursor.next_network();
            seen.insert(net.free_params());
            cursor = next;
        }
        assert_eq!(seen.len(), 125);
    }

    #[test]
    fn scan_matches_unrank() {
        for mode in [Mode::Integer, Mode::Rational] {
            for s in 0..4 {
                let shell = ShellValues::new(mode, s);
                let scanned: Vec<Vec<usize>> = ShellScan::new(&shell, 3).collect();
                assert_eq!(scanned.len() as u128, shell.shell_size(3));
                for (pos, idx) in scanned.iter().enumerate() {
                    assert_eq!(&shell.unrank(3, pos as u128), idx);
                    assert_eq!(shell.rank(idx), pos as u128);
                }
            }
        }
    }

    #[test]
    fn checkpoint_resume() {
        let a = arch(&[2, 1]);
        let mut cursor = EnumerationCursor::new(a, Mode::Rational);
        for _ in 0..137 {
            cursor = cursor.next_network().1;
        }
        let text = serde_json::to_string(&cursor).unwrap();
        assert_eq!(
            text,
            format!(
                r#"{{"architecture":[2,1],"mode":"rational","shell_index":{},"position_in_shell":{}}}"#,
                cursor.shell_index, cursor.position_in_shell
            )
        );
        let mut resumed: EnumerationCursor = serde_json::from_str(&text).unwrap();
        for _ in 0..50 {
            let (a, na) = cursor.next_network();
            let (b, nb) = resumed.next_network();
            assert_eq!(a, b);
            cursor = na;
            resumed = nb;
        }
    }
}
