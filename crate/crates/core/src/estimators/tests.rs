use super::*;
use crate::oracles::{exact_noise_sensitivity, exact_score, TruthTable};

fn model(dsl: &str) -> BlackboxModel {
    BlackboxModel::parse(dsl).unwrap()
}

fn cfg(samples: usize, seed: u64, p: f64) -> EstimatorConfig {
    EstimatorConfig::new(samples, seed, p).unwrap()
}

#[test]
fn perturb_edge_rates() {
    let mut rng = rng_at(1, 0);
    let x = random_instance(12, &mut rng);
    // p = 0: identical output
    assert_eq!(perturb(&x, 0.0, &mut rng), x);
    // p = 0.2: per-coordinate agreement 1 - p/2 = 0.9 within 0.01
    let draws = 100_000;
    let mut agree = 0u64;
    for _ in 0..draws {
        let y = perturb(&x, 0.2, &mut rng);
        agree += (0..12).filter(|&i| y.get(i) == x.get(i)).count() as u64;
    }
    let rate = agree as f64 / (draws * 12) as f64;
    assert!((rate - 0.9).abs() < 0.01, "agreement rate {rate}");
    // p = 1: uniform output; each coordinate agrees half the time
    let mut agree = 0u64;
    for _ in 0..draws {
        let y = perturb(&x, 1.0, &mut rng);
        agree += (0..12).filter(|&i| y.get(i) == x.get(i)).count() as u64;
    }
    let rate = agree as f64 / (draws * 12) as f64;
    assert!((rate - 0.5).abs() < 0.01, "agreement rate {rate}");
}

#[test]
fn ns_estimate_known_values() {
    // constant: exactly 0, not approximately
    let c = model("(const +1) d=6");
    let r = estimate_noise_sensitivity(&c, &cfg(1000, 3, 0.5)).unwrap();
    assert_eq!(r.estimate, 0.0);

    // dictator at p = 0.2: flips with probability p/2 = 0.1
    let dict = model("x0 d=5");
    let r = estimate_noise_sensitivity(&dict, &cfg(100_000, 5, 0.2)).unwrap();
    assert!((r.estimate - 0.1).abs() < 0.005, "estimate {}", r.estimate);

    // 2-parity at p = 0.1 against the exact oracle (0.095)
    let par = model("(xor x0 x1) d=2");
    let exact = exact_noise_sensitivity(&TruthTable::parse("(xor x0 x1) d=2").unwrap(), 0.1)
        .unwrap();
    assert!((exact - 0.095).abs() < 1e-12);
    let r = estimate_noise_sensitivity(&par, &cfg(100_000, 7, 0.1)).unwrap();
    assert!((r.estimate - exact).abs() < 0.005, "estimate {}", r.estimate);
}

#[test]
fn score_estimate_known_values() {
    let par = model("(xor x2 x5) d=8");
    let t = TruthTable::parse("(xor x2 x5) d=8").unwrap();
    // relevant feature: exact oracle gives p(1-p)/2 = 0.045
    let exact = exact_score(&t, 2, 0.1).unwrap();
    assert!((exact - 0.045).abs() < 1e-12);
    let r = estimate_score(&par, 2, &cfg(100_000, 11, 0.1)).unwrap();
    assert!((r.estimate - exact).abs() < 0.005, "estimate {}", r.estimate);
    // irrelevant feature: true score 0
    let r = estimate_score(&par, 4, &cfg(100_000, 13, 0.1)).unwrap();
    assert!(r.estimate.abs() < 0.005, "estimate {}", r.estimate);
    // dictator feature at p = 0.2: score 0.1
    let dict = model("x1 d=4");
    let r = estimate_score(&dict, 1, &cfg(100_000, 17, 0.2)).unwrap();
    assert!((r.estimate - 0.1).abs() < 0.005, "estimate {}", r.estimate);
}

#[test]
fn precision_error_estimates() {
    let par = model("(xor x1 x6) d=8");
    let x = Instance::parse_bitstring("01000010").unwrap();
    let both = Restriction::from_pairs([(1, x.get(1)), (6, x.get(6))]).unwrap();
    let r = estimate_precision_error(&par, &x, &both, &cfg(1000, 19, 0.5)).unwrap();
    assert_eq!(r.estimate, 0.0);

    let one = Restriction::from_pairs([(1, x.get(1))]).unwrap();
    let r = estimate_precision_error(&par, &x, &one, &cfg(10_000, 23, 0.5)).unwrap();
    assert!((r.estimate - 0.5).abs() < 0.01, "estimate {}", r.estimate);

    let c = model("(const -1) d=4");
    let y = Instance::parse_bitstring("0000").unwrap();
    let r = estimate_precision_error(&c, &y, &Restriction::new(), &cfg(500, 29, 0.5)).unwrap();
    assert_eq!(r.estimate, 0.0);

    // C disagreeing with x is rejected
    let bad = Restriction::from_pairs([(1, x.get(1).flip())]).unwrap();
    assert!(matches!(
        estimate_precision_error(&par, &x, &bad, &cfg(10, 1, 0.5)),
        Err(Error::RestrictionMismatch { feature: 1 })
    ));
}

#[test]
fn mean_estimates() {
    let c = model("(const +1) d=5");
    let r = estimate_mean(&c, &cfg(200, 31, 0.5)).unwrap();
    assert_eq!(r.estimate, 1.0);

    let par = model("(xor x0 x4) d=5");
    let r = estimate_mean(&par, &cfg(100_000, 37, 0.5)).unwrap();
    assert!(r.estimate.abs() < 0.02, "estimate {}", r.estimate);

    // E[OR_3] = 0.75
    let or3 = model("(or x0 x1 x2) d=3");
    let r = estimate_mean(&or3, &cfg(10_000, 41, 0.5)).unwrap();
    assert!((r.estimate - 0.75).abs() < 0.02, "estimate {}", r.estimate);
}

#[test]
fn hoeffding_sample_counts() {
    assert_eq!(hoeffding_samples(0.05, 0.01).unwrap(), 1060);
    assert_eq!(hoeffding_samples(0.5, 0.5).unwrap(), 3);
    assert!(hoeffding_samples(0.1, 1.0).is_err());
    assert!(hoeffding_samples(0.1, 0.0).is_err());
    assert!(hoeffding_samples(0.0, 0.1).is_err());
    assert!(hoeffding_samples(1.0, 0.1).is_err());
}

#[test]
fn estimators_are_deterministic() {
    let f = model("(maj x0 (xor x1 x2) x3) d=4");
    let c = cfg(5000, 123, 0.3);
    let a = estimate_noise_sensitivity(&f, &c).unwrap();
    let b = estimate_noise_sensitivity(&f, &c).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());

    let a = estimate_score(&f, 2, &c).unwrap();
    let b = estimate_score(&f, 2, &c).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());

    let a = estimate_mean(&f, &c).unwrap();
    let b = estimate_mean(&f, &c).unwrap();
    assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
}

#[test]
fn query_accounting_is_exact() {
    let f = model("(xor x0 x3) d=6");
    let m = 777;
    let c = cfg(m, 9, 0.25);

    f.counter().reset();
    estimate_noise_sensitivity(&f, &c).unwrap();
    assert_eq!(f.queries(), 2 * m as u64);

    f.counter().reset();
    estimate_score(&f, 3, &c).unwrap();
    assert_eq!(f.queries(), 6 * m as u64);

    f.counter().reset();
    estimate_mean(&f, &c).unwrap();
    assert_eq!(f.queries(), m as u64);

    f.counter().reset();
    let x = Instance::parse_bitstring("000000").unwrap();
    estimate_precision_error(&f, &x, &Restriction::new(), &c).unwrap();
    assert_eq!(f.queries(), m as u64 + 1);
}

#[test]
fn node_seed_is_order_canonical() {
    let a = Restriction::from_pairs([(3, Sign::Plus), (7, Sign::Minus)]).unwrap();
    let b = Restriction::from_pairs([(7, Sign::Minus), (3, Sign::Plus)]).unwrap();
    assert_eq!(node_seed(42, &a), node_seed(42, &b));
    // value matters, not just the index set
    let c = Restriction::from_pairs([(3, Sign::Minus), (7, Sign::Minus)]).unwrap();
    assert_ne!(node_seed(42, &a), node_seed(42, &c));
    // empty restriction is stable and seed-dependent
    assert_eq!(
        node_seed(42, &Restriction::new()),
        node_seed(42, &Restriction::new())
    );
    assert_ne!(
        node_seed(42, &Restriction::new()),
        node_seed(43, &Restriction::new())
    );
}

#[test]
fn node_seed_collision_spot_check() {
    // distinct global seeds should essentially never collide on one alpha
    let alpha = Restriction::from_pairs([(1, Sign::Plus), (4, Sign::Minus)]).unwrap();
    let mut seen = std::collections::HashSet::new();
    for s in 0..10_000u64 {
        seen.insert(node_seed(s, &alpha));
    }
    assert_eq!(seen.len(), 10_000);
}

#[test]
fn mean_and_precision_estimators_calibrate() {
    // the other two estimators under the same Hoeffding budget: misses of
    // more than eta in at most a 2*delta fraction of seeds
    let eta = 0.05;
    let m = hoeffding_samples(eta, 0.1).unwrap();
    let f = model("(or x0 x1 x2) d=3");
    let t = f.to_truth_table().unwrap();
    let exact_mean = t.mean();
    let x = Instance::parse_bitstring("000").unwrap();
    let c = Restriction::from_pairs([(0, Sign::Minus), (1, Sign::Minus)]).unwrap();
    let exact_err =
        crate::oracles::exact_precision_error(&t, &x, &c).unwrap();

    let runs = 200;
    let mut mean_misses = 0;
    let mut precision_misses = 0;
    for seed in 0..runs {
        let cfg = cfg(m, seed, 0.5);
        // the mean lives in [-1,1], so the [0,1]-budget resolves 2*eta
        if (estimate_mean(&f, &cfg).unwrap().estimate - exact_mean).abs() > 2.0 * eta {
            mean_misses += 1;
        }
        if (estimate_precision_error(&f, &x, &c, &cfg).unwrap().estimate - exact_err).abs() > eta
        {
            precision_misses += 1;
        }
    }
    let allowed = runs / 5;
    assert!(mean_misses <= allowed, "mean missed {mean_misses}/{runs}");
    assert!(
        precision_misses <= allowed,
        "precision missed {precision_misses}/{runs}"
    );
}

#[test]
fn config_validation() {
    assert!(EstimatorConfig::new(0, 1, 0.5).is_err());
    assert!(EstimatorConfig::new(10, 1, 0.0).is_err());
    assert!(EstimatorConfig::new(10, 1, 1.5).is_err());
    assert!(EstimatorConfig::new(1, 1, 1.0).is_ok());
}

mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn estimates_are_pure_functions_of_config(
            samples in 1usize..200,
            seed in any::<u64>(),
            p in 0.01f64..=1.0,
        ) {
            let f = BlackboxModel::parse("(maj x0 (xor x1 x3) x2) d=4").unwrap();
            let cfg = EstimatorConfig::new(samples, seed, p).unwrap();
            let a = estimate_noise_sensitivity(&f, &cfg).unwrap().estimate;
            let b = estimate_noise_sensitivity(&f, &cfg).unwrap().estimate;
            prop_assert_eq!(a.to_bits(), b.to_bits());
            let a = estimate_score(&f, 1, &cfg).unwrap().estimate;
            let b = estimate_score(&f, 1, &cfg).unwrap().estimate;
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn node_seed_ignores_insertion_order(
            perm_seed in any::<u64>(),
            global in any::<u64>(),
            mask in 1usize..64,
            vals in 0usize..64,
        ) {
            let pairs: Vec<(usize, Sign)> = (0..6)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| (i, Sign::from_bool(vals >> i & 1 == 1)))
                .collect();
            let forward = Restriction::from_pairs(pairs.clone()).unwrap();
            // a deterministic shuffle of the insertion order
            let mut shuffled = pairs;
            let mut state = perm_seed;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                shuffled.swap(i, (state >> 33) as usize % (i + 1));
            }
            let backward = Restriction::from_pairs(shuffled).unwrap();
            prop_assert_eq!(node_seed(global, &forward), node_seed(global, &backward));
        }

        #[test]
        fn hoeffding_count_is_monotone(
            eta_a in 0.01f64..0.5,
            eta_b in 0.01f64..0.5,
            delta in 0.01f64..0.5,
        ) {
            let (lo, hi) = if eta_a <= eta_b { (eta_a, eta_b) } else { (eta_b, eta_a) };
            // tighter accuracy never needs fewer samples
            prop_assert!(
                hoeffding_samples(lo, delta).unwrap() >= hoeffding_samples(hi, delta).unwrap()
            );
        }
    }
}
