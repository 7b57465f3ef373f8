//! `certify` and `certify-batch`.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use implicert_core::baseline::{
    greedy_precision_certificate, BaselineCertificate, BaselineConfig, PrecisionMode,
};
use implicert_core::certifier::{certify_batch, find_certificate, BatchSummary, CertifyOutcome};
use implicert_core::estimators::{hoeffding_samples, mix_seed, sample_instances};
use implicert_core::{BlackboxModel, Instance, Restriction, TreeParams};

use super::{parse_instance, CertifyKnobs};
use crate::report::{Emitter, ModelEcho};
use crate::{CliError, CliResult, ModeArg, ModelArgs, OutputArgs};

#[derive(Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Instance as a '0'/'1' string, index 0 leftmost, '1' = +1
    #[arg(long, value_name = "BITS")]
    instance: String,
    #[command(flatten)]
    knobs: CertifyKnobs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Serialize)]
struct CertifyJob<'a> {
    model: ModelEcho,
    instance: &'a str,
    #[serde(flatten)]
    knobs: &'a CertifyKnobs,
    params: &'a TreeParams,
}

#[derive(Serialize)]
struct BaselineReport {
    features: Restriction,
    size: usize,
    error_estimate: f64,
    queries: u64,
}

#[derive(Serialize)]
struct CertifyResults {
    #[serde(flatten)]
    outcome: CertifyOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<BaselineReport>,
}

fn run_baseline(
    f: &BlackboxModel,
    x: &Instance,
    knobs: &CertifyKnobs,
    seed: u64,
) -> CliResult<BaselineReport> {
    let mode = match knobs.mode {
        ModeArg::Mc => PrecisionMode::MonteCarlo,
        ModeArg::Exact => PrecisionMode::ExactOracle,
    };
    // precision estimates reuse the verification sample count
    let samples = hoeffding_samples(knobs.epsilon / 2.0, knobs.delta)
        .unwrap_or(1000)
        .max(1);
    let cfg = BaselineConfig::new(knobs.epsilon, samples, mode)?.with_seed(seed);
    let before = f.queries();
    let cert: BaselineCertificate = greedy_precision_certificate(f, x, &cfg)?;
    Ok(BaselineReport {
        size: cert.size(),
        features: cert.features,
        error_estimate: cert.error_estimate,
        queries: f.queries() - before,
    })
}

pub fn run_certify(args: CertifyArgs) -> CliResult<()> {
    args.output.require_json("certify")?;
    crate::install_thread_pool(args.knobs.threads)?;
    let emitter = Emitter::new("certify", args.knobs.seed);

    let expr = args.model.load()?;
    let echo = ModelEcho::new(&args.model, &expr);
    let f = BlackboxModel::from_expr(expr);
    let x = parse_instance(&args.instance, f.dimension())?;
    let (cfg, params) = args.knobs.build(f.dimension())?;

    let outcome = find_certificate(&f, &x, &cfg, &params)?;
    let baseline = if args.knobs.baseline {
        Some(run_baseline(&f, &x, &args.knobs, args.knobs.seed)?)
    } else {
        None
    };

    let job = CertifyJob {
        model: echo,
        instance: &args.instance,
        knobs: &args.knobs,
        params: &params,
    };
    let results = CertifyResults { outcome, baseline };
    emitter.emit(&args.output, &job, &results, f.queries())
}

#[derive(Args)]
pub struct BatchArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// File with one instance bitstring per line
    #[arg(long, value_name = "PATH", conflicts_with_all = ["all", "sample"])]
    instances: Option<PathBuf>,
    /// Enumerate all 2^d instances (d <= 16)
    #[arg(long, conflicts_with = "sample")]
    all: bool,
    /// Certify N uniformly sampled instances (seeded)
    #[arg(long, value_name = "N")]
    sample: Option<usize>,
    #[command(flatten)]
    knobs: CertifyKnobs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Serialize)]
struct BatchJob<'a> {
    model: ModelEcho,
    instance_source: String,
    #[serde(flatten)]
    knobs: &'a CertifyKnobs,
    params: &'a TreeParams,
}

/// Compact per-instance row; the shared params live in the job echo.
#[derive(Serialize)]
struct OutcomeRow {
    instance: String,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    features: Option<Restriction>,
    empirical_error: f64,
}

#[derive(Serialize)]
struct BatchResults {
    summary: BatchSummary,
    rows: Vec<OutcomeRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<BatchBaselineReport>,
}

#[derive(Serialize)]
struct BatchBaselineReport {
    mean_size: f64,
    size_histogram: std::collections::BTreeMap<usize, usize>,
    total_queries: u64,
}

const BATCH_ALL_CAP: usize = 16;

fn batch_instances(args: &BatchArgs, f: &BlackboxModel) -> CliResult<(Vec<Instance>, String)> {
    let d = f.dimension();
    if let Some(path) = &args.instances {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let mut out = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            out.push(parse_instance(line.trim(), d)?);
        }
        if out.is_empty() {
            return Err(CliError::Usage(format!(
                "{} contains no instances",
                path.display()
            )));
        }
        Ok((out, format!("file:{}", path.display())))
    } else if args.all {
        if d > BATCH_ALL_CAP {
            return Err(CliError::Usage(format!(
                "--all enumerates 2^d instances and is capped at d <= {BATCH_ALL_CAP}, got d = {d}"
            )));
        }
        let out = (0..1usize << d).map(|c| Instance::from_code(c, d)).collect();
        Ok((out, "all".to_string()))
    } else if let Some(n) = args.sample {
        if n == 0 {
            return Err(CliError::Usage("--sample needs at least 1 instance".into()));
        }
        let out = sample_instances(d, n, mix_seed(args.knobs.seed, [0x62617463 /* "batc" */]));
        Ok((out, format!("sample:{n}")))
    } else {
        Err(CliError::Usage(
            "give one of --instances / --all / --sample".into(),
        ))
    }
}

pub fn run_batch(args: BatchArgs) -> CliResult<()> {
    args.output.require_json("certify-batch")?;
    crate::install_thread_pool(args.knobs.threads)?;
    let emitter = Emitter::new("certify-batch", args.knobs.seed);

    let expr = args.model.load()?;
    let echo = ModelEcho::new(&args.model, &expr);
    let f = BlackboxModel::from_expr(expr);
    let (instances, source) = batch_instances(&args, &f)?;
    let (cfg, params) = args.knobs.build(f.dimension())?;

    let batch = certify_batch(&f, &instances, &cfg, &params)?;
    let rows = batch
        .results
        .iter()
        .zip(&instances)
        .map(|(outcome, x)| match outcome {
            CertifyOutcome::Accepted(c) => OutcomeRow {
                instance: x.to_bitstring(),
                verdict: "accepted",
                size: Some(c.size()),
                features: Some(c.features.clone()),
                empirical_error: c.empirical_error,
            },
            CertifyOutcome::Bottom(b) => OutcomeRow {
                instance: x.to_bitstring(),
                verdict: "bottom",
                size: None,
                features: None,
                empirical_error: b.empirical_error,
            },
        })
        .collect();

    let baseline = if args.knobs.baseline {
        let before = f.queries();
        let mut histogram = std::collections::BTreeMap::new();
        let mut total_size = 0usize;
        for (i, x) in instances.iter().enumerate() {
            let per_instance = mix_seed(args.knobs.seed, [i as u64]);
            let report = run_baseline(&f, x, &args.knobs, per_instance)?;
            *histogram.entry(report.size).or_insert(0usize) += 1;
            total_size += report.size;
        }
        Some(BatchBaselineReport {
            mean_size: total_size as f64 / instances.len() as f64,
            size_histogram: histogram,
            total_queries: f.queries() - before,
        })
    } else {
        None
    };

    let job = BatchJob {
        model: echo,
        instance_source: source,
        knobs: &args.knobs,
        params: &params,
    };
    let results = BatchResults {
        summary: batch.summary,
        rows,
        baseline,
    };
    emitter.emit(&args.output, &job, &results, f.queries())
}
