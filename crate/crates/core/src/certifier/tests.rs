use super::*;
use crate::oracles::{exact_precision_error, TruthTable};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn model(dsl: &str) -> BlackboxModel {
    BlackboxModel::parse(dsl).unwrap()
}

#[test]
fn wiring_formula() {
    let cfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_d_bound(2.0)
        .with_mode(ScoreMode::ExactOracle);
    let params = wire_parameters(&cfg, 10).unwrap();
    // k = ceil((2 / 0.1)^3) = 8000, capped at d = 10
    assert_eq!(params.depth_budget, 10);
    assert!((params.score_tolerance - 0.1).abs() < 1e-12);
    assert!((params.noise_rate - 0.05).abs() < 1e-12);
}

#[test]
fn wiring_explicit_depth_overrides() {
    let cfg = CertifierConfig::new(0.1, 0.1).unwrap().with_depth(2);
    let params = wire_parameters(&cfg, 10).unwrap();
    assert_eq!(params.depth_budget, 2);
    assert!((params.score_tolerance - 0.5).abs() < 1e-12);
    // with no d_bound, the explicit depth stands in for D
    assert!((params.noise_rate - 0.05).abs() < 1e-12);
}

#[test]
fn wiring_rejects_bad_inputs() {
    // neither d_bound nor explicit depth
    assert!(wire_parameters(&CertifierConfig::new(0.1, 0.1).unwrap(), 8).is_err());
    // d_bound = 0
    let cfg = CertifierConfig::new(0.1, 0.1).unwrap().with_d_bound(0.0);
    assert!(wire_parameters(&cfg, 8).is_err());
    // explicit depth beyond the dimension
    let cfg = CertifierConfig::new(0.1, 0.1).unwrap().with_depth(9);
    assert!(wire_parameters(&cfg, 8).is_err());
    // config-level domain checks
    assert!(CertifierConfig::new(0.0, 0.1).is_err());
    assert!(CertifierConfig::new(0.1, 1.0).is_err());
}

#[test]
fn certificate_guess_route_is_conservative() {
    let b = d_bound_from_certificate_guess(2.0, 0.1, 0.1).unwrap();
    assert!((b - 4e18).abs() / 4e18 < 1e-9);
    assert!(d_bound_from_certificate_guess(0.0, 0.1, 0.1).is_err());
}

#[test]
fn constant_model_empty_certificate() {
    let f = model("(const +1) d=6");
    let cfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_depth(0)
        .with_mode(ScoreMode::ExactOracle);
    let params = wire_parameters(&cfg, 6).unwrap();
    let out = find_certificate(&f, &Instance::from_code(5, 6), &cfg, &params).unwrap();
    let cert = out.certificate().expect("accepted");
    assert_eq!(cert.size(), 0);
    assert_eq!(cert.empirical_error, 0.0);
}

#[test]
fn parity_certificate_in_walk_order() {
    let f = model("(xor x3 x7) d=10");
    let cfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_depth(2)
        .with_mode(ScoreMode::ExactOracle)
        .with_seed(7);
    let params = wire_parameters(&cfg, 10).unwrap();
    let x = Instance::parse_bitstring("1010110010").unwrap();
    let out = find_certificate(&f, &x, &cfg, &params).unwrap();
    let cert = out.certificate().expect("accepted");
    let path: Vec<usize> = cert.features.indices().collect();
    assert_eq!(path, vec![3, 7]);
    assert!(cert.features.agrees_with(&x));
    assert_eq!(cert.empirical_error, 0.0);
}

#[test]
fn too_shallow_budget_yields_bottom() {
    // a single-feature certificate for a 2-parity has true error 1/2
    let f = model("(xor x3 x7) d=10");
    let cfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_depth(1)
        .with_mode(ScoreMode::ExactOracle)
        .with_seed(3);
    let params = wire_parameters(&cfg, 10).unwrap();
    let out = find_certificate(&f, &Instance::from_code(0, 10), &cfg, &params).unwrap();
    match out {
        CertifyOutcome::Bottom(b) => {
            assert!((b.empirical_error - 0.5).abs() < 0.1, "{}", b.empirical_error)
        }
        CertifyOutcome::Accepted(c) => panic!("accepted a bad certificate: {c:?}"),
    }
}

#[test]
fn verifier_accepts_zero_error_always() {
    let f = model("(xor x1 x4) d=6");
    for seed in 0..100 {
        let x = Instance::from_code(19, 6);
        let c = Restriction::from_pairs([(1, x.get(1)), (4, x.get(4))]).unwrap();
        let v = verify_certificate(&f, &x, &c, 0.1, 0.1, seed).unwrap();
        assert!(v.accepted);
        assert_eq!(v.empirical_error, 0.0);
    }
}

#[test]
fn verifier_rejects_planted_half_error() {
    // C = {x1} leaves the other parity variable free: true error 1/2
    let f = model("(xor x1 x4) d=6");
    let x = Instance::from_code(19, 6);
    let c = Restriction::from_pairs([(1, x.get(1))]).unwrap();
    let mut rejected = 0;
    for seed in 0..100 {
        let v = verify_certificate(&f, &x, &c, 0.1, 0.1, seed).unwrap();
        if !v.accepted {
            rejected += 1;
        }
    }
    // at m = 600 samples the acceptance tail is astronomically small
    assert_eq!(rejected, 100);
}

#[test]
fn verifier_sample_count_matches_formula() {
    let f = model("(const -1) d=4");
    let x = Instance::from_code(0, 4);
    let v = verify_certificate(&f, &x, &Restriction::new(), 0.1, 0.1, 1).unwrap();
    // ceil(2 ln(2/delta) / eps^2) = ceil(599.15)
    assert_eq!(v.samples, 600);
}

#[test]
fn batch_constant_all_instances() {
    let f = model("(const -1) d=6");
    let cfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_depth(0)
        .with_mode(ScoreMode::ExactOracle);
    let params = wire_parameters(&cfg, 6).unwrap();
    let instances: Vec<Instance> = (0..64).map(|c| Instance::from_code(c, 6)).collect();
    let out = certify_batch(&f, &instances, &cfg, &params).unwrap();
    assert_eq!(out.summary.bottom_rate, 0.0);
    assert_eq!(out.summary.accepted, 64);
    assert_eq!(out.summary.size_histogram.get(&0), Some(&64));
}

#[test]
fn batch_parity_all_instances() {
    let f = model("(xor x3 x7) d=10");
    let cfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_depth(2)
        .with_mode(ScoreMode::ExactOracle)
        .with_seed(11);
    let params = wire_parameters(&cfg, 10).unwrap();
    let instances: Vec<Instance> = (0..1024).map(|c| Instance::from_code(c, 10)).collect();
    let out = certify_batch(&f, &instances, &cfg, &params).unwrap();
    assert_eq!(out.summary.bottom_rate, 0.0);
    assert_eq!(out.summary.size_histogram.get(&2), Some(&1024));
    // every certificate fixes exactly the two relevant features
    for r in &out.results {
        let cert = r.certificate().expect("accepted");
        let mut idx: Vec<usize> = cert.features.indices().collect();
        idx.sort_unstable();
        assert_eq!(idx, vec![3, 7]);
    }
}

fn random_tree_dsl(d: usize, depth: usize, rng: &mut impl Rng) -> String {
    fn gen(d: usize, depth: usize, rng: &mut impl Rng) -> String {
        if depth == 0 {
            return format!("(const {})", if rng.random() { "+1" } else { "-1" });
        }
        format!(
            "(tree {} {} {})",
            rng.random_range(0..d),
            gen(d, depth - 1, rng),
            gen(d, depth - 1, rng)
        )
    }
    format!("{} d={d}", gen(d, depth, rng))
}

#[test]
fn batch_auto_wired_random_trees() {
    // auto wiring with D_bound = 3 at eps = delta = 0.2 caps k at d = 8, so
    // walks fix every feature and verification always accepts
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..5 {
        let dsl = random_tree_dsl(8, 3, &mut rng);
        let f = model(&dsl);
        let cfg = CertifierConfig::new(0.2, 0.2)
            .unwrap()
            .with_d_bound(3.0)
            .with_mode(ScoreMode::ExactOracle)
            .with_seed(rng.random());
        let params = wire_parameters(&cfg, 8).unwrap();
        assert_eq!(params.depth_budget, 8);
        let instances: Vec<Instance> = (0..256).map(|c| Instance::from_code(c, 8)).collect();
        let out = certify_batch(&f, &instances, &cfg, &params).unwrap();
        assert_eq!(out.summary.bottom_rate, 0.0, "model {dsl}");
    }
}

#[test]
fn size_bound_holds_structurally() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..10 {
        let dsl = random_tree_dsl(8, 3, &mut rng);
        let f = model(&dsl);
        let k = rng.random_range(0..=4usize);
        let cfg = CertifierConfig::new(0.2, 0.2)
            .unwrap()
            .with_depth(k)
            .with_seed(trial);
        let params = wire_parameters(&cfg, 8).unwrap();
        let x = Instance::from_code(rng.random_range(0..256), 8);
        let out = find_certificate(&f, &x, &cfg, &params).unwrap();
        if let Some(cert) = out.certificate() {
            assert!(cert.size() <= k);
        }
    }
}

#[test]
fn accepted_certificates_meet_precision_band() {
    // among accepted certificates, the exact conditional error stays below
    // 3 eps / 2 for at least a 1 - 2 delta fraction of seeded runs
    let epsilon = 0.1;
    let delta = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut accepted = 0usize;
    let mut precise = 0usize;
    for run in 0..200u64 {
        let dsl = random_tree_dsl(8, 3, &mut rng);
        let f = model(&dsl);
        let t = TruthTable::parse(&dsl).unwrap();
        let cfg = CertifierConfig::new(epsilon, delta)
            .unwrap()
            .with_depth(3)
            .with_seed(run);
        let params = wire_parameters(&cfg, 8).unwrap();
        let x = Instance::from_code(rng.random_range(0..256), 8);
        let out = find_certificate(&f, &x, &cfg, &params).unwrap();
        if let Some(cert) = out.certificate() {
            accepted += 1;
            if exact_precision_error(&t, &x, &cert.features).unwrap() <= 1.5 * epsilon {
                precise += 1;
            }
        }
    }
    assert!(accepted > 0);
    let fraction = precise as f64 / accepted as f64;
    assert!(
        fraction >= 1.0 - 2.0 * delta,
        "only {precise}/{accepted} accepted certificates met the band"
    );
}

#[test]
fn parity_junta_batch_has_zero_bottom_rate() {
    // exact-mode fidelity holds on parity juntas, so the walk always finds
    // the exact certificate and verification never rejects
    let f = model("(xor x2 x5 x9) d=12");
    let cfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_depth(3)
        .with_mode(ScoreMode::ExactOracle)
        .with_seed(5);
    let params = wire_parameters(&cfg, 12).unwrap();
    let instances: Vec<Instance> = (0..1usize << 12)
        .step_by(7)
        .map(|c| Instance::from_code(c, 12))
        .collect();
    let out = certify_batch(&f, &instances, &cfg, &params).unwrap();
    assert_eq!(out.summary.bottom_rate, 0.0);
    for r in &out.results {
        assert_eq!(r.certificate().unwrap().empirical_error, 0.0);
    }
}

#[test]
fn shared_prefix_consistency_across_instances() {
    let f = model("(maj x1 (xor x2 x6) x4) d=8");
    let cfg = CertifierConfig::new(0.2, 0.2)
        .unwrap()
        .with_depth(3)
        .with_seed(31);
    let params = wire_parameters(&cfg, 8).unwrap();
    let instances: Vec<Instance> = (0..256).map(|c| Instance::from_code(c, 8)).collect();
    let out = certify_batch(&f, &instances, &cfg, &params).unwrap();
    // group certificates by their first assignment; the queried root feature
    // must be unique
    let mut roots = std::collections::HashSet::new();
    for r in &out.results {
        if let Some(cert) = r.certificate() {
            if let Some((i, _)) = cert.features.iter().next() {
                roots.insert(i);
            }
        }
    }
    assert!(roots.len() <= 1, "root queried with different features");
}
