//! ReLU spike networks whose realizations shrink to zero in sup norm while
//! their Lipschitz constants, and with them the weights of every network
//! realizing the same function, grow without bound.

use serde::Serialize;

use crate::network::{default_sqrt_lb, default_sqrt_ub, Activation, Architecture, Network};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpikeFamilyMember {
    /// Family index; 0 marks the degenerate zero member.
    pub k: u32,
    pub network: Network,
    pub exact_sup: Rational,
    pub exact_lip: Rational,
}

fn spike_architecture() -> Architecture {
    Architecture::new(vec![1, 3, 1]).expect("static architecture")
}

/// Hat of height `2^-k` and half-width `2^(-2k-1)` centred at `1/2`.
pub fn build_spike(k: u32) -> SpikeFamilyMember {
    assert!(k >= 1, "spike index starts at 1");
    let k = i64::from(k);
    let half = Rational::new(1, 2);
    let w = Rational::pow2(-2 * k - 1);
    let s = Rational::pow2(k + 1);
    let network = Network::new(
        spike_architecture(),
        vec![
            (
                vec![Rational::one(), Rational::one(), Rational::one()],
                vec![-(&half - &w), -half.clone(), -(&half + &w)],
            ),
            (
                vec![s.clone(), -(&s * &Rational::from(2)), s.clone()],
                vec![Rational::zero()],
            ),
        ],
    )
    .expect("spike shape is valid");
    SpikeFamilyMember {
        k: k as u32,
        network,
        exact_sup: Rational::pow2(-k),
        exact_lip: s,
    }
}

/// The zero network in the same architecture, the limit of the family.
pub fn degenerate_member() -> SpikeFamilyMember {
    SpikeFamilyMember {
        k: 0,
        network: Network::zero(&spike_architecture()),
        exact_sup: Rational::zero(),
        exact_lip: Rational::zero(),
    }
}

impl SpikeFamilyMember {
    /// Closed-form `h · max(0, 1 - |x - 1/2| / w)`.
    pub fn hat(&self, x: &Rational) -> Rational {
        if self.k == 0 {
            return Rational::zero();
        }
        let w = Rational::pow2(-2 * i64::from(self.k) - 1);
        let off = (x - &Rational::new(1, 2)).abs();
        let t = Rational::one() - off / w;
        if t.is_positive() {
            &self.exact_sup * &t
        } else {
            Rational::zero()
        }
    }

    /// The three kinks and the apex: `1/2 - w`, `1/2`, `1/2 + w`, plus `1/2 ± w/2`.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let half = Rational::new(1, 2);
        let w = Rational::pow2(-2 * i64::from(self.k.max(1)) - 1);
        let q = &w / &Rational::from(2);
        vec![&half - &w, &half - &q, half.clone(), &half + &q, &half + &w]
    }
}

/// Lower bound on `prod_l max|A'_l|` over every ReLU network `Φ'` of the
/// member's architecture realizing the same function.
pub fn product_lower_bound_with(
    member: &SpikeFamilyMember,
    sqrt_ub: &dyn Fn(&Rational) -> Rational,
) -> Rational {
    let arch = member.network.architecture();
    let act = Activation::Relu;
    let depth = arch.depth() as u32;
    let denom = arch
        .dims()
        .windows(2)
        .map(|p| sqrt_ub(&Rational::from((p[0] * p[1]) as i64)))
        .fold(act.lipschitz_constant().pow(depth - 1), |acc, r| acc * r);
    &member.exact_lip / &denom
}

/// Lower bound on the scaling norm of any two-layer network realizing the
/// member: the scaling norm squared dominates the two-factor product.
pub fn scaling_norm_lower_bound_with(
    member: &SpikeFamilyMember,
    sqrt_ub: &dyn Fn(&Rational) -> Rational,
    sqrt_lb: &dyn Fn(&Rational) -> Rational,
) -> Rational {
    debug_assert_eq!(member.network.architecture().depth(), 2);
    sqrt_lb(&product_lower_bound_with(member, sqrt_ub))
}

pub fn scaling_norm_lower_bound(member: &SpikeFamilyMember) -> Rational {
    scaling_norm_lower_bound_with(member, &default_sqrt_ub, &default_sqrt_lb)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TopologyRow {
    pub k: u32,
    pub sup_norm: Rational,
    pub lipschitz: Rational,
    pub scaling_lower_bound: Rational,
}

pub fn topology_table(ks: impl IntoIterator<Item = u32>) -> Vec<TopologyRow> {
    ks.into_iter()
        .map(|k| {
            let m = build_spike(k);
            TopologyRow {
                k,
                scaling_lower_bound: scaling_norm_lower_bound(&m),
                sup_norm: m.exact_sup,
                lipschitz: m.exact_lip,
            }
        })
        .collect()
}
