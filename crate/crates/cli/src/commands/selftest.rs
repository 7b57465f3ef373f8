//! `selftest`: the oracle-vs-estimator cross-check suite. Exits 0 when all
//! checks pass, 2 otherwise (a failed check is a broken invariant, not a
//! usage error).

use clap::Args;
use serde::Serialize;

use implicert_core::certifier::{find_certificate, wire_parameters, CertifierConfig};
use implicert_core::estimators::{
    estimate_noise_sensitivity, estimate_score, hoeffding_samples, EstimatorConfig,
};
use implicert_core::oracles::{
    exact_avg_certificate_complexity, exact_dt_complexity, exact_noise_sensitivity, exact_score,
    ns_by_pair_enumeration, TruthTable,
};
use implicert_core::tree::{ImplicitTree, ScoreMode, TreeParams};
use implicert_core::{BlackboxModel, Instance, Restriction};

use crate::report::Emitter;
use crate::{CliError, CliResult, OutputArgs};

#[derive(Args, Serialize)]
pub struct SelftestArgs {
    #[arg(long, env = "IMPLICERT_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads: 1 = serial (default), 0 = one per core
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Serialize)]
struct SelftestResults {
    checks: Vec<Check>,
    all_passed: bool,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

fn spectral_vs_enumeration() -> CliResult<Check> {
    let families = [
        "(const +1) d=4",
        "x2 d=4",
        "(xor x0 x3) d=4",
        "(xor x0 x1 x2 x3) d=4",
        "(or x0 x1 x2) d=3",
        "(and x0 x1 x2 x3) d=4",
        "(maj x0 x1 x2) d=3",
        "(tree 1 (xor x0 x2) (or x0 x3)) d=4",
    ];
    let mut worst = 0.0f64;
    for dsl in families {
        let t = TruthTable::parse(dsl)?;
        for p in [0.1, 0.5] {
            let gap = (exact_noise_sensitivity(&t, p)? - ns_by_pair_enumeration(&t, p)?).abs();
            worst = worst.max(gap);
        }
    }
    Ok(check(
        "spectral-ns-matches-pair-enumeration",
        worst < 1e-9,
        format!("worst gap {worst:.3e} (tolerance 1e-9)"),
    ))
}

fn known_values() -> CliResult<Check> {
    let parity = TruthTable::parse("(xor x0 x1) d=2")?;
    let or3 = TruthTable::parse("(or x0 x1 x2) d=3")?;
    let mut failures = Vec::new();
    if (exact_noise_sensitivity(&parity, 0.1)? - 0.095).abs() > 1e-9 {
        failures.push("NS_0.1(2-parity) != 0.095");
    }
    if (exact_score(&parity, 0, 0.1)? - 0.045).abs() > 1e-9 {
        failures.push("score of a relevant parity feature != 0.045");
    }
    let embedded = TruthTable::parse("(xor x0 x1) d=4")?;
    if exact_score(&embedded, 3, 0.1)? != 0.0 {
        failures.push("score of an irrelevant feature != 0");
    }
    if (exact_avg_certificate_complexity(&or3, 0.0)? - 1.25).abs() > 1e-9 {
        failures.push("avg certificate complexity of OR_3 != 1.25");
    }
    if exact_dt_complexity(&parity, 0.0)? != 2 {
        failures.push("dt complexity of 2-parity != 2");
    }
    if exact_dt_complexity(&or3, 0.0)? != 3 {
        failures.push("dt complexity of OR_3 != 3");
    }
    if hoeffding_samples(0.05, 0.01)? != 1060 {
        failures.push("hoeffding_samples(0.05, 0.01) != 1060");
    }
    Ok(check(
        "known-values",
        failures.is_empty(),
        if failures.is_empty() {
            "all frozen values reproduced".to_string()
        } else {
            failures.join("; ")
        },
    ))
}

fn estimator_calibration(seed: u64) -> CliResult<Check> {
    // quick version of the calibration property: eta = 0.05, delta = 0.1,
    // 100 seeds, at most 20% misses allowed per estimator
    let eta = 0.05;
    let m = hoeffding_samples(eta, 0.1)?;
    let f = BlackboxModel::parse("(xor x2 x5) d=8")?;
    let t = f.to_truth_table()?;
    let p = 0.1;
    let ns_exact = exact_noise_sensitivity(&t, p)?;
    let score_exact = exact_score(&t, 2, p)?;
    let mut ns_misses = 0;
    let mut score_misses = 0;
    let runs = 100;
    for i in 0..runs {
        let cfg = EstimatorConfig::new(m, seed.wrapping_add(i), p)?;
        if (estimate_noise_sensitivity(&f, &cfg)?.estimate - ns_exact).abs() > eta {
            ns_misses += 1;
        }
        if (estimate_score(&f, 2, &cfg)?.estimate - score_exact).abs() > eta {
            score_misses += 1;
        }
    }
    let allowed = runs / 5;
    Ok(check(
        "estimator-calibration",
        ns_misses <= allowed && score_misses <= allowed,
        format!("ns misses {ns_misses}/{runs}, score misses {score_misses}/{runs}, allowed {allowed}"),
    ))
}

fn certify_determinism(seed: u64) -> CliResult<Check> {
    let f = BlackboxModel::parse("(maj x1 (xor x2 x6) x4) d=8")?;
    let cfg = CertifierConfig::new(0.1, 0.1)?.with_depth(3).with_seed(seed);
    let params = wire_parameters(&cfg, 8)?;
    let x = Instance::parse_bitstring("10110100")
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let a = serde_json::to_string(&find_certificate(&f, &x, &cfg, &params)?)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let b = serde_json::to_string(&find_certificate(&f, &x, &cfg, &params)?)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(check(
        "certify-determinism",
        a == b,
        if a == b {
            "two identical runs produced byte-identical outcomes".to_string()
        } else {
            "outcomes differ between identical runs".to_string()
        },
    ))
}

fn walk_consistency(seed: u64) -> CliResult<Check> {
    let d = 6;
    let f = BlackboxModel::parse("(tree 2 (xor x0 x4) (maj x1 x3 x5)) d=6")?;
    let params = TreeParams::new(3, 0.3, 0.3, seed, ScoreMode::MonteCarlo);
    let tree = ImplicitTree::new(params, f)?;
    let mut features: std::collections::HashMap<Vec<(usize, implicert_core::Sign)>, usize> =
        std::collections::HashMap::new();
    let mut conflicts = 0usize;
    for code in 0..1usize << d {
        let x = Instance::from_code(code, d);
        let mut alpha = Restriction::new();
        while !tree.is_leaf(&alpha)? {
            let i = tree.query(&alpha)?;
            match features.get(&alpha.canonical()) {
                Some(&prev) if prev != i => conflicts += 1,
                _ => {
                    features.insert(alpha.canonical(), i);
                }
            }
            alpha.push(i, x.get(i))?;
        }
    }
    Ok(check(
        "walk-consistency",
        conflicts == 0,
        format!(
            "{} distinct internal nodes, {conflicts} conflicts",
            features.len()
        ),
    ))
}

pub fn run(args: SelftestArgs) -> CliResult<()> {
    args.output.require_json("selftest")?;
    crate::install_thread_pool(args.threads)?;
    let emitter = Emitter::new("selftest", args.seed);

    let checks = vec![
        spectral_vs_enumeration()?,
        known_values()?,
        estimator_calibration(args.seed)?,
        certify_determinism(args.seed)?,
        walk_consistency(args.seed)?,
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    let results = SelftestResults { checks, all_passed };
    emitter.emit(&args.output, &args, &results, 0)?;
    if all_passed {
        Ok(())
    } else {
        Err(CliError::Internal(
            "selftest found failing cross-checks (see report)".into(),
        ))
    }
}
