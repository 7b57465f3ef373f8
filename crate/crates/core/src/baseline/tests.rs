use super::*;
use crate::certifier::{find_certificate, wire_parameters, CertifierConfig};
use crate::tree::ScoreMode;

fn model(dsl: &str) -> BlackboxModel {
    BlackboxModel::parse(dsl).unwrap()
}

#[test]
fn constant_model_gets_empty_certificate() {
    let f = model("(const +1) d=5");
    let cfg = BaselineConfig::new(0.0, 100, PrecisionMode::ExactOracle).unwrap();
    let cert = greedy_precision_certificate(&f, &Instance::from_code(7, 5), &cfg).unwrap();
    assert_eq!(cert.size(), 0);
    assert_eq!(cert.error_estimate, 0.0);
}

#[test]
fn or3_picks_the_forcing_feature() {
    let f = model("(or x0 x1 x2) d=3");
    let x = Instance::parse_bitstring("100").unwrap();
    let cfg = BaselineConfig::new(0.0, 100, PrecisionMode::ExactOracle).unwrap();
    let cert = greedy_precision_certificate(&f, &x, &cfg).unwrap();
    let picked: Vec<usize> = cert.features.indices().collect();
    assert_eq!(picked, vec![0]);
    assert_eq!(cert.error_estimate, 0.0);
}

#[test]
fn parity_drags_in_every_feature() {
    // f = x6 xor x7 in d=8: every proper subset missing a relevant variable
    // has error 1/2, so no candidate ever shows a gain and the lexicographic
    // tie rule adds all 8 features
    let f = model("(xor x6 x7) d=8");
    let x = Instance::from_code(0b10110101, 8);
    let cfg = BaselineConfig::new(0.1, 100, PrecisionMode::ExactOracle).unwrap();
    let cert = greedy_precision_certificate(&f, &x, &cfg).unwrap();
    let picked: Vec<usize> = cert.features.indices().collect();
    assert_eq!(picked, vec![0, 1, 2, 3, 4, 5, 6, 7]);
    assert_eq!(cert.error_estimate, 0.0);
}

#[test]
fn baseline_always_meets_epsilon_in_exact_mode() {
    let f = model("(maj x0 (xor x1 x3) x4) d=5");
    let cfg = BaselineConfig::new(0.1, 100, PrecisionMode::ExactOracle).unwrap();
    for code in 0..32 {
        let cert =
            greedy_precision_certificate(&f, &Instance::from_code(code, 5), &cfg).unwrap();
        assert!(cert.error_estimate <= 0.1);
    }
}

#[test]
fn succinctness_contrast_with_the_certifier() {
    // the headline contrast: baseline size d versus implicit size 2
    for d in [6usize, 8, 10] {
        let dsl = format!("(xor x{} x{}) d={d}", d - 2, d - 1);
        let f = model(&dsl);
        let x = Instance::from_code(0, d);

        let bcfg = BaselineConfig::new(0.1, 100, PrecisionMode::ExactOracle).unwrap();
        let baseline = greedy_precision_certificate(&f, &x, &bcfg).unwrap();
        assert_eq!(baseline.size(), d);

        let ccfg = CertifierConfig::new(0.1, 0.1)
            .unwrap()
            .with_depth(2)
            .with_mode(ScoreMode::ExactOracle)
            .with_seed(1);
        let params = wire_parameters(&ccfg, d).unwrap();
        let out = find_certificate(&f, &x, &ccfg, &params).unwrap();
        assert_eq!(out.certificate().expect("accepted").size(), 2);
    }
}

#[test]
fn monte_carlo_mode_stops_only_with_both_parity_features() {
    // sampling noise breaks the all-equal ties arbitrarily, so the size
    // varies run to run; but estimates of the 1/2-error subsets never dip
    // below epsilon = 0.1 at this sample count, so the loop cannot stop
    // before both relevant features are in
    let f = model("(xor x4 x5) d=6");
    let x = Instance::from_code(21, 6);
    for seed in [13, 14, 15] {
        let cfg = BaselineConfig::new(0.1, 2000, PrecisionMode::MonteCarlo)
            .unwrap()
            .with_seed(seed);
        let cert = greedy_precision_certificate(&f, &x, &cfg).unwrap();
        assert!(cert.features.contains(4) && cert.features.contains(5));
        assert!(cert.error_estimate <= 0.1);
    }
}

#[test]
fn randomized_ties_still_satisfy_epsilon() {
    let f = model("(xor x4 x5) d=6");
    let x = Instance::from_code(40, 6);
    let cfg = BaselineConfig::new(0.0, 100, PrecisionMode::ExactOracle)
        .unwrap()
        .with_seed(5)
        .with_randomized_ties(true);
    let cert = greedy_precision_certificate(&f, &x, &cfg).unwrap();
    // a random tie order can stop early once both parity features are in,
    // but the certificate always contains them and meets the target
    assert!(cert.size() >= 2);
    assert!(cert.features.contains(4) && cert.features.contains(5));
    assert_eq!(cert.error_estimate, 0.0);
}
