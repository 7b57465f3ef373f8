//! `bench parity`: the succinctness contrast table. For each dimension the
//! target is f = x_{d-2} xor x_{d-1}: the implicit certifier at depth 2
//! returns size-2 certificates while the greedy precision baseline drags in
//! every feature under the lexicographic tie rule.

use clap::{Args, Subcommand};
use serde::Serialize;

use implicert_core::baseline::{greedy_precision_certificate, BaselineConfig, PrecisionMode};
use implicert_core::certifier::{certify_batch, wire_parameters, CertifierConfig};
use implicert_core::estimators::{hoeffding_samples, mix_seed};
use implicert_core::oracles::{exact_avg_certificate_complexity, TruthTable};
use implicert_core::{BlackboxModel, Instance};

use crate::report::Emitter;
use crate::{CliError, CliResult, FormatArg, ModeArg, OutputArgs};

#[derive(Args)]
pub struct BenchArgs {
    #[command(subcommand)]
    which: BenchCommand,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Two-feature parity: implicit certifier vs greedy precision baseline
    Parity(ParityArgs),
}

#[derive(Args, Serialize)]
struct ParityArgs {
    /// Dimension grid
    #[arg(long, value_delimiter = ',', default_values_t = vec![6usize, 8, 10])]
    dims: Vec<usize>,
    /// Independent seeds per dimension
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Base RNG seed; run j uses seed + j
    #[arg(long, env = "IMPLICERT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Score estimation mode
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Noise rate override (Monte-Carlo default 0.5, exact default wired)
    #[arg(long)]
    p: Option<f64>,
    /// Score tolerance override (Monte-Carlo default 0.05)
    #[arg(long)]
    eta: Option<f64>,
    /// Worker threads: 1 = serial (default), 0 = one per core
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    #[serde(skip)]
    output: OutputArgs,
}

/// One (dimension, seed) cell of the table.
#[derive(Serialize)]
struct ParityRow {
    d: usize,
    seed: u64,
    implicit_mean_size: f64,
    implicit_bottom_rate: f64,
    implicit_queries: u64,
    baseline_mean_size: f64,
    baseline_queries: u64,
    exact_cert_complexity: f64,
}

#[derive(Serialize)]
struct ParityResults {
    rows: Vec<ParityRow>,
}

const BENCH_DIM_CAP: usize = 12;

pub fn run(args: BenchArgs) -> CliResult<()> {
    match args.which {
        BenchCommand::Parity(p) => run_parity(p),
    }
}

fn run_parity(args: ParityArgs) -> CliResult<()> {
    if args.dims.is_empty() {
        return Err(CliError::Usage("--dims needs at least one dimension".into()));
    }
    for &d in &args.dims {
        if !(2..=BENCH_DIM_CAP).contains(&d) {
            return Err(CliError::Usage(format!(
                "bench parity enumerates all 2^d instances; d must be in [2, {BENCH_DIM_CAP}], got {d}"
            )));
        }
    }
    crate::install_thread_pool(args.threads)?;
    let emitter = Emitter::new("bench-parity", args.seed);

    let mut rows = Vec::new();
    let mut total_queries = 0u64;
    for &d in &args.dims {
        for j in 0..args.seeds {
            let row = parity_cell(&args, d, args.seed + j)?;
            total_queries += row.implicit_queries + row.baseline_queries;
            rows.push(row);
        }
    }

    let results = ParityResults { rows };
    match args.output.format() {
        FormatArg::Json => emitter.emit(&args.output, &args, &results, total_queries),
        FormatArg::Csv => args.output.write(&to_csv(&results)),
    }
}

fn parity_cell(args: &ParityArgs, d: usize, seed: u64) -> CliResult<ParityRow> {
    let dsl = format!("(xor x{} x{}) d={d}", d - 2, d - 1);
    let f = BlackboxModel::parse(&dsl)?;
    let table = TruthTable::parse(&dsl)?;
    let instances: Vec<Instance> = (0..1usize << d).map(|c| Instance::from_code(c, d)).collect();

    // implicit certifier at depth 2
    let cfg = CertifierConfig::new(args.epsilon, args.delta)?
        .with_depth(2)
        .with_seed(seed)
        .with_mode(args.mode.to_score_mode());
    let mut params = wire_parameters(&cfg, d)?;
    if args.mode == ModeArg::Mc {
        // defaults picked for a clear score separation on parities
        params.noise_rate = args.p.unwrap_or(0.5);
        params.score_tolerance = args.eta.unwrap_or(0.05);
    } else {
        if let Some(p) = args.p {
            params.noise_rate = p;
        }
        if let Some(eta) = args.eta {
            params.score_tolerance = eta;
        }
    }
    params.validate(d)?;
    let batch = certify_batch(&f, &instances, &cfg, &params)?;
    let accepted_sizes: Vec<usize> = batch
        .results
        .iter()
        .filter_map(|r| r.certificate().map(|c| c.size()))
        .collect();
    let implicit_mean_size = if accepted_sizes.is_empty() {
        0.0
    } else {
        accepted_sizes.iter().sum::<usize>() as f64 / accepted_sizes.len() as f64
    };

    // greedy precision baseline over the same instances
    let mode = match args.mode {
        ModeArg::Mc => PrecisionMode::MonteCarlo,
        ModeArg::Exact => PrecisionMode::ExactOracle,
    };
    let samples = hoeffding_samples(args.epsilon / 2.0, args.delta)?;
    let before = f.queries();
    let mut baseline_total = 0usize;
    for (i, x) in instances.iter().enumerate() {
        let cfg = BaselineConfig::new(args.epsilon, samples, mode)?
            .with_seed(mix_seed(seed, [i as u64]));
        baseline_total += greedy_precision_certificate(&f, x, &cfg)?.size();
    }
    let baseline_queries = f.queries() - before;

    Ok(ParityRow {
        d,
        seed,
        implicit_mean_size,
        implicit_bottom_rate: batch.summary.bottom_rate,
        implicit_queries: batch.summary.total_queries,
        baseline_mean_size: baseline_total as f64 / instances.len() as f64,
        baseline_queries,
        exact_cert_complexity: exact_avg_certificate_complexity(&table, args.epsilon)?,
    })
}

fn to_csv(results: &ParityResults) -> String {
    let mut out = String::from(
        "d,seed,implicit_mean_size,implicit_bottom_rate,implicit_queries,\
         baseline_mean_size,baseline_queries,exact_cert_complexity\n",
    );
    for r in &results.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.d,
            r.seed,
            r.implicit_mean_size,
            r.implicit_bottom_rate,
            r.implicit_queries,
            r.baseline_mean_size,
            r.baseline_queries,
            r.exact_cert_complexity
        ));
    }
    out
}
