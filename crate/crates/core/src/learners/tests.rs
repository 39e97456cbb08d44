use super::*;
use crate::enumeration::locate;
use crate::network::tests::{arch, small_net};
use crate::rational::rat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&n| Rational::from(n)).collect()
}

fn dataset(points: &[(i64, i64)]) -> Dataset {
    Dataset::from_pairs(
        1,
        points.iter().map(|&(x, y)| (ints(&[x]), Rational::from(y))),
    )
    .unwrap()
}

fn relu_cfg(eps: Rational) -> LearnerConfig {
    LearnerConfig::new(eps, Activation::Relu)
}

#[test]
fn enum_learn_zero_data() {
    let ds = dataset(&[(0, 0), (1, 0)]);
    let r = enum_learn(&ds, &arch(&[1, 1, 1]), &relu_cfg(rat(1, 4))).unwrap();
    assert_eq!(r.learned, Network::zero(&arch(&[1, 1, 1])));
    assert_eq!(r.steps, 1);
    assert!(!r.budget_exhausted);
}

#[test]
fn enum_learn_small_net() {
    let ds = dataset(&[(1, 9), (-1, 0), (0, 3)]);
    let eps = rat(1, 8);
    let r = enum_learn(&ds, &arch(&[1, 1, 1]), &relu_cfg(eps.clone())).unwrap();
    for p in ds.pairs() {
        let out = r.learned.realize(&Activation::Relu, &p.x).unwrap();
        assert!((out - &p.y).abs() < eps);
    }
    // the generator itself sits in rational shell 3, so the learner halts by then
    let (shell, _) = locate(&small_net(), Mode::Rational).unwrap();
    assert!(locate(&r.learned, Mode::Rational).unwrap().0 <= shell);
}

#[test]
fn enum_learn_inconsistent() {
    let ds = dataset(&[(0, 0), (0, 1)]);
    assert!(matches!(
        enum_learn(&ds, &arch(&[1, 1, 1]), &relu_cfg(rat(1, 2))),
        Err(LearnError::InconsistentData {
            first: 0,
            second: 1
        })
    ));
}

#[test]
fn enum_learn_budget() {
    let ds = dataset(&[(1, 9), (-1, 0), (0, 3)]);
    let cfg = relu_cfg(rat(1, 8)).with_max_steps(10);
    match enum_learn(&ds, &arch(&[1, 1, 1]), &cfg) {
        Err(LearnError::BudgetExhausted(r)) => {
            assert_eq!(r.steps, 10);
            assert!(r.budget_exhausted);
            assert_eq!(r.learned, network_at(&arch(&[1, 1, 1]), Mode::Rational, 9));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn config_validation() {
    let ds = dataset(&[(0, 0)]);
    let a = arch(&[1, 1, 1]);
    assert!(matches!(
        enum_learn(&ds, &a, &relu_cfg(rat(0, 1))),
        Err(LearnError::InvalidConfig(_))
    ));
    assert!(matches!(
        enum_learn(&ds, &a, &relu_cfg(rat(1, 2)).with_max_steps(0)),
        Err(LearnError::InvalidConfig(_))
    ));
    assert!(matches!(
        enum_learn(&ds, &a, &LearnerConfig::new(rat(1, 2), Activation::Atan)),
        Err(LearnError::Network(NetworkError::InexactActivation(_)))
    ));
    assert!(matches!(
        enum_learn(&ds, &arch(&[2, 1, 1]), &relu_cfg(rat(1, 2))),
        Err(LearnError::Network(NetworkError::ShapeMismatch { .. }))
    ));
}

#[test]
fn psi_for_zero_net() {
    let ds = dataset(&[(0, 0), (1, 0)]);
    let cfg = relu_cfg(rat(1, 1)).with_a_max(1);
    let r = lipschitz_enum_learn(&ds, &arch(&[1, 1, 1]), &cfg).unwrap();
    assert_eq!(r.learned, Network::zero(&arch(&[1, 1, 1])));
    assert_eq!(r.psi_radius, Some(rat(1, 2)));
}

#[test]
fn psi_antitone_in_learned_bound() {
    let a = arch(&[1, 1, 1]);
    let steep = small_net();
    let flat = Network::zero(&a);
    let relu = Activation::Relu;
    assert!(steep.lipschitz_bound(&relu) > flat.lipschitz_bound(&relu));
    assert!(psi_radius(&steep, &relu, &rat(1, 4), 2) < psi_radius(&flat, &relu, &rat(1, 4), 2));
}

#[test]
fn psi_guarantee_small_net() {
    let relu = Activation::Relu;
    let truth = Network::new(
        arch(&[1, 1, 1]),
        vec![(ints(&[2]), ints(&[1])), (ints(&[-1]), ints(&[0]))],
    )
    .unwrap();
    let xs = [-1i64, 0, 1, 2];
    let ds = Dataset::from_pairs(
        1,
        xs.iter()
            .map(|&x| (ints(&[x]), truth.realize(&relu, &ints(&[x])).unwrap())),
    )
    .unwrap();
    let eps = rat(1, 16);
    let cfg = relu_cfg(eps.clone()).with_a_max(2);
    let r = lipschitz_enum_learn(&ds, &arch(&[1, 1, 1]), &cfg).unwrap();
    let psi = r.psi_radius.clone().unwrap();
    assert!(psi.is_positive());
    let balls =
        crate::network::sample_generalization_ball(&truth, &relu, &ds, &psi, 13, 5).unwrap();
    for s in balls.pairs() {
        let got = r.learned.realize(&relu, &s.x).unwrap();
        assert!((got - &s.y).abs() < eps);
    }
}

#[test]
fn encoded_dataset_examples() {
    let relu = Activation::Relu;
    let zero = IntegerNetwork::try_from(Network::zero(&arch(&[2, 1, 1]))).unwrap();
    let ds = make_encoded_dataset(&zero, 2, &relu).unwrap();
    for p in ds.pairs() {
        assert_eq!(p.x, ints(&[0, 0]));
        assert_eq!(p.y, rat(0, 1));
    }
    let small = IntegerNetwork::try_from(small_net()).unwrap();
    let ds = make_encoded_dataset(&small, 3, &relu).unwrap();
    let code = &ds.pairs()[0].x;
    // params (2, 1, 3) zigzag to (4, 2, 6); pair(pair(4, 2), 6)
    let inner = (4 + 2) * (4 + 2 + 1) / 2 + 2;
    let expected = (inner + 6) * (inner + 6 + 1) / 2 + 6;
    assert_eq!(code, &ints(&[expected]));
    assert_eq!(ds.pairs()[0].y, small_net().realize(&relu, code).unwrap());
    assert_eq!(ds.pairs()[1].y, rat(3, 1));
    let back = quantized_learn_encode(&ds, &arch(&[1, 1, 1]), &relu).unwrap();
    assert_eq!(back, small);
    let zero_back = quantized_learn_encode(
        &make_encoded_dataset(&zero, 1, &relu).unwrap(),
        &arch(&[2, 1, 1]),
        &relu,
    )
    .unwrap();
    assert_eq!(zero_back, zero);
}

#[test]
fn corrupted_code_rejected() {
    let relu = Activation::Relu;
    let small = IntegerNetwork::try_from(small_net()).unwrap();
    let ds = make_encoded_dataset(&small, 2, &relu).unwrap();
    let mut pairs = ds.pairs().to_vec();
    pairs[0].x[0] = &pairs[0].x[0] + &Rational::one();
    let corrupted = Dataset::new(1, pairs.clone()).unwrap();
    assert!(matches!(
        quantized_learn_encode(&corrupted, &arch(&[1, 1, 1]), &relu),
        Err(LearnError::Decode(DecodeError::LabelMismatch(_)))
    ));
    pairs[0].x[0] = rat(-3, 1);
    let negative = Dataset::new(1, pairs).unwrap();
    assert!(matches!(
        quantized_learn_encode(&negative, &arch(&[1, 1, 1]), &relu),
        Err(LearnError::Decode(DecodeError::NotNatural(_)))
    ));
}

#[test]
fn quantized_examples() {
    let a = arch(&[1, 1, 1]);
    let ds = dataset(&[(0, 3), (1, 9), (-1, 0)]);
    let r = quantized_enum_learn(&ds, &a, &relu_cfg(rat(1, 1))).unwrap();
    for p in ds.pairs() {
        assert_eq!(r.learned.realize(&Activation::Relu, &p.x).unwrap(), p.y);
    }
    assert_eq!(r.epsilon, rat(0, 1));
    let z = quantized_enum_learn(&dataset(&[(0, 0), (5, 0)]), &a, &relu_cfg(rat(1, 1))).unwrap();
    assert_eq!((z.learned, z.steps), (Network::zero(&a), 1));
    assert!(matches!(
        quantized_enum_learn(&dataset(&[(0, 0), (0, 1)]), &a, &relu_cfg(rat(1, 1))),
        Err(LearnError::InconsistentData { .. })
    ));
    let frac = Dataset::from_pairs(1, vec![(vec![rat(1, 2)], rat(0, 1))]).unwrap();
    assert!(matches!(
        quantized_enum_learn(&frac, &a, &relu_cfg(rat(1, 1))),
        Err(LearnError::NonIntegerData(0))
    ));
}

fn scan_only(
    ds: &Dataset,
    a: &Architecture,
    cfg: &LearnerConfig,
) -> Result<LearnReport, LearnError> {
    let outcome = first_accepted(
        a,
        Mode::Integer,
        ds,
        &cfg.activation,
        budget(cfg),
        |o, y| o == y,
    );
    report_from_scan(outcome, cfg, Rational::zero())
}

fn random_int_dataset(
    rng: &mut ChaCha8Rng,
    a: &Architecture,
    range: i64,
    points: usize,
) -> Dataset {
    let params: Vec<Rational> = (0..a.free_param_count())
        .map(|_| Rational::from(rng.gen_range(-range..=range)))
        .collect();
    let net = Network::from_free_params(a, &params).unwrap();
    let d = a.input_dim();
    let pairs = (0..points)
        .map(|_| {
            let x: Vec<Rational> = (0..d)
                .map(|_| Rational::from(rng.gen_range(-3..=3)))
                .collect();
            let y = net.realize(&Activation::Relu, &x).unwrap();
            (x, y)
        })
        .collect::<Vec<_>>();
    Dataset::from_pairs(d, pairs).unwrap()
}

#[test]
fn unit_search_agrees_with_plain_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dims in [[1usize, 2, 1], [2, 1, 1], [1, 3, 1]] {
        let a = arch(&dims);
        for _ in 0..12 {
            let ds = random_int_dataset(&mut rng, &a, 1, 3);
            let cfg = relu_cfg(rat(1, 1));
            let fast = quantized_enum_learn(&ds, &a, &cfg).unwrap();
            let slow = scan_only(&ds, &a, &cfg).unwrap();
            assert_eq!(fast, slow, "{dims:?}");
        }
    }
}

#[test]
fn unit_search_budget_agrees_with_plain_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = arch(&[1, 2, 1]);
    for _ in 0..10 {
        let ds = random_int_dataset(&mut rng, &a, 1, 3);
        for budget in [1u64, 7, 40, 200] {
            let cfg = relu_cfg(rat(1, 1)).with_max_steps(budget);
            let fast = quantized_enum_learn(&ds, &a, &cfg);
            let slow = scan_only(&ds, &a, &cfg);
            match (fast, slow) {
                (Ok(f), Ok(s)) => assert_eq!(f, s),
                (Err(LearnError::BudgetExhausted(f)), Err(LearnError::BudgetExhausted(s))) => {
                    assert_eq!(f, s)
                }
                (f, s) => panic!("fast {f:?} vs slow {s:?}"),
            }
        }
    }
}

#[test]
fn deep_architecture_uses_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = arch(&[1, 1, 1, 1]);
    for _ in 0..5 {
        let ds = random_int_dataset(&mut rng, &a, 1, 3);
        let r = quantized_enum_learn(&ds, &a, &relu_cfg(rat(1, 1))).unwrap();
        for p in ds.pairs() {
            assert_eq!(r.learned.realize(&Activation::Relu, &p.x).unwrap(), p.y);
        }
    }
}

#[test]
fn leaky_integer_slope_fast_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = arch(&[1, 2, 1]);
    let cfg = LearnerConfig::new(rat(1, 1), Activation::LeakyRelu(rat(2, 1)));
    for _ in 0..6 {
        let params: Vec<Rational> = (0..a.free_param_count())
            .map(|_| Rational::from(rng.gen_range(-1..=1)))
            .collect();
        let net = Network::from_free_params(&a, &params).unwrap();
        let ds = Dataset::from_pairs(
            1,
            [-2i64, 0, 3].iter().map(|&x| {
                (
                    ints(&[x]),
                    net.realize(&cfg.activation, &ints(&[x])).unwrap(),
                )
            }),
        )
        .unwrap();
        let fast = quantized_enum_learn(&ds, &a, &cfg).unwrap();
        assert_eq!(fast, scan_only(&ds, &a, &cfg).unwrap());
    }
}

#[test]
fn report_document() {
    let ds = dataset(&[(0, 0)]);
    let r = lipschitz_enum_learn(&ds, &arch(&[1, 1, 1]), &relu_cfg(rat(1, 1))).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    assert_eq!(
        text,
        r#"{"learned":{"architecture":[1,1,1],"layers":[{"A":["0/1"],"b":["0/1"]},{"A":["0/1"],"b":["0/1"]}],"activation":"relu"},"steps":1,"epsilon":"1/1","psi_radius":"1/2","budget_exhausted":false}"#
    );
    let back: LearnReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn encode_decode_identity(params in proptest::collection::vec(-3i64..=3, 12), n in 1usize..4) {
        let a = arch(&[2, 3, 1]);
        let big: Vec<BigInt> = params.iter().map(|&v| BigInt::from(v)).collect();
        let net = IntegerNetwork::from_int_params(&a, &big).unwrap();
        let ds = make_encoded_dataset(&net, n, &Activation::Relu).unwrap();
        let back = quantized_learn_encode(&ds, &a, &Activation::Relu).unwrap();
        prop_assert_eq!(back.int_params(), big);
    }

    #[test]
    fn learners_are_deterministic(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = arch(&[1, 2, 1]);
        let ds = random_int_dataset(&mut rng, &a, 1, 3);
        let cfg = relu_cfg(rat(1, 1));
        prop_assert_eq!(quantized_enum_learn(&ds, &a, &cfg).unwrap(), quantized_enum_learn(&ds, &a, &cfg).unwrap());
    }
}
