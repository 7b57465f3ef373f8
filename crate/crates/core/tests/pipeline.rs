//! End-to-end exercises of the public library surface: parse a model, wire
//! parameters, certify, and cross-check the outcome against the exact
//! oracles.

use implicert_core::baseline::{greedy_precision_certificate, BaselineConfig, PrecisionMode};
use implicert_core::certifier::{
    certify_batch, d_bound_from_certificate_guess, find_certificate, wire_parameters,
    CertifierConfig,
};
use implicert_core::oracles::{exact_certificate_complexity, exact_precision_error};
use implicert_core::{BlackboxModel, Instance, ScoreMode, TruthTable};

#[test]
fn monte_carlo_pipeline_on_embedded_parity() {
    // query access only: Monte-Carlo scores, no truth table anywhere
    let f = BlackboxModel::parse("(xor x2 x9) d=12").unwrap();
    let cfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_depth(2)
        .with_seed(71);
    let mut params = wire_parameters(&cfg, f.dimension()).unwrap();
    // strong separation for the two relevant features
    params.noise_rate = 0.5;
    params.score_tolerance = 0.05;

    let x = Instance::parse_bitstring("011010011010").unwrap();
    let before = f.queries();
    let outcome = find_certificate(&f, &x, &cfg, &params).unwrap();
    assert!(f.queries() > before, "query accounting is live");

    let cert = outcome.certificate().expect("parity certificate accepted");
    let mut found: Vec<usize> = cert.features.indices().collect();
    found.sort_unstable();
    assert_eq!(found, vec![2, 9]);
    assert!(cert.features.agrees_with(&x));

    // the exact oracle confirms both size optimality and zero error
    let t = TruthTable::parse("(xor x2 x9) d=12").unwrap();
    assert_eq!(exact_certificate_complexity(&t, &x, 0.0).unwrap(), 2);
    assert_eq!(exact_precision_error(&t, &x, &cert.features).unwrap(), 0.0);
}

#[test]
fn batch_report_matches_per_instance_runs() {
    let f = BlackboxModel::parse("(tree 1 (xor x0 x3) (const +1)) d=5").unwrap();
    let cfg = CertifierConfig::new(0.15, 0.1)
        .unwrap()
        .with_depth(3)
        .with_mode(ScoreMode::ExactOracle)
        .with_seed(5);
    let params = wire_parameters(&cfg, 5).unwrap();
    let instances: Vec<Instance> = (0..32).map(|c| Instance::from_code(c, 5)).collect();
    let batch = certify_batch(&f, &instances, &cfg, &params).unwrap();
    assert_eq!(batch.results.len(), 32);

    // batch outcomes coincide with isolated single-instance runs
    for (x, from_batch) in instances.iter().zip(&batch.results) {
        let single = find_certificate(&f, x, &cfg, &params).unwrap();
        assert_eq!(
            serde_json::to_string(&single).unwrap(),
            serde_json::to_string(from_batch).unwrap()
        );
    }

    let histogram_total: usize = batch.summary.size_histogram.values().sum();
    assert_eq!(histogram_total, batch.summary.accepted);
}

#[test]
fn certificate_guess_wiring_caps_at_dimension() {
    // the conservative route: a certificate-complexity guess becomes a
    // depth bound so large that the wiring caps the tree at full depth
    let bound = d_bound_from_certificate_guess(2.0, 0.2, 0.2).unwrap();
    assert!(bound > 1e10);
    let cfg = CertifierConfig::new(0.2, 0.2)
        .unwrap()
        .with_d_bound(bound)
        .with_mode(ScoreMode::ExactOracle);
    let params = wire_parameters(&cfg, 6).unwrap();
    assert_eq!(params.depth_budget, 6);

    // full-depth certificates are exact, so nothing is ever rejected
    let f = BlackboxModel::parse("(maj x0 x2 x4) d=6").unwrap();
    let instances: Vec<Instance> = (0..64).map(|c| Instance::from_code(c, 6)).collect();
    let batch = certify_batch(&f, &instances, &cfg, &params).unwrap();
    assert_eq!(batch.summary.bottom_rate, 0.0);
}

#[test]
fn pruning_shrinks_certificates_on_constant_branches() {
    // under x1 = +1 the model is constant, so pruning can stop early there
    let f = BlackboxModel::parse("(tree 1 (xor x0 x3) (const +1)) d=5").unwrap();
    let cfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_depth(3)
        .with_mode(ScoreMode::ExactOracle)
        .with_prune(true)
        .with_seed(9);
    let mut params = wire_parameters(&cfg, 5).unwrap();
    // keep the early-leaf threshold 1 - 2*eta close to 1 so only truly
    // constant subfunctions prune
    params.score_tolerance = 0.05;
    assert!(params.prune_constant);

    let constant_side = Instance::parse_bitstring("01000").unwrap(); // x1 = +1
    let out = find_certificate(&f, &constant_side, &cfg, &params).unwrap();
    let cert = out.certificate().expect("accepted");
    assert!(cert.size() < 3, "pruned early, got size {}", cert.size());

    let parity_side = Instance::parse_bitstring("10010").unwrap(); // x1 = -1
    let out = find_certificate(&f, &parity_side, &cfg, &params).unwrap();
    let cert = out.certificate().expect("accepted");
    assert_eq!(cert.empirical_error, 0.0);
}

#[test]
fn baseline_and_certifier_agree_on_easy_instances() {
    // when a single feature forces the function, both methods find it
    let f = BlackboxModel::parse("(or x0 x1 x2 x3) d=4").unwrap();
    let x = Instance::parse_bitstring("1000").unwrap();
    let bcfg = BaselineConfig::new(0.0, 100, PrecisionMode::ExactOracle).unwrap();
    let baseline = greedy_precision_certificate(&f, &x, &bcfg).unwrap();
    assert_eq!(baseline.features.indices().collect::<Vec<_>>(), vec![0]);

    let ccfg = CertifierConfig::new(0.1, 0.1)
        .unwrap()
        .with_depth(1)
        .with_mode(ScoreMode::ExactOracle)
        .with_prune(true);
    let params = wire_parameters(&ccfg, 4).unwrap();
    let out = find_certificate(&f, &x, &ccfg, &params).unwrap();
    let cert = out.certificate().expect("accepted");
    assert!(cert.size() <= 1);
}
