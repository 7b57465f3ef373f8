//! `oracle <quantity>`: exact small-dimension computations.

use clap::{Args, ValueEnum};
use serde::Serialize;

use implicert_core::oracles::{
    exact_avg_certificate_complexity, exact_certificate_complexity, exact_dt_complexity,
    exact_greedy_tree_query, exact_noise_sensitivity, exact_precision_error, exact_score,
    TruthTable,
};
use implicert_core::{Instance, Restriction, Sign};

use super::parse_instance;
use crate::report::{Emitter, ModelEcho};
use crate::{CliError, CliResult, ModelArgs, OutputArgs};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// Noise sensitivity NS_p(f)
    Ns,
    /// Noise-stabilizing score of --feature
    Score,
    /// Conditional error of the certificate --features on --instance
    Precision,
    /// Smallest eps-error certificate size for --instance
    CertComplexity,
    /// Mean certificate complexity over all instances
    AvgCertComplexity,
    /// Smallest eps-error decision-tree depth
    DtComplexity,
    /// Feature the exact greedy tree queries at the node --assign
    GreedyTree,
}

#[derive(Args)]
pub struct OracleArgs {
    /// Which quantity to compute
    #[arg(value_enum)]
    quantity: Quantity,
    #[command(flatten)]
    model: ModelArgs,
    /// Noise rate for ns / score / greedy-tree
    #[arg(long, default_value_t = 0.1)]
    p: f64,
    /// Error budget for the complexity quantities
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    /// Feature index for score
    #[arg(long)]
    feature: Option<usize>,
    /// Instance bitstring for precision / cert-complexity
    #[arg(long, value_name = "BITS")]
    instance: Option<String>,
    /// Certificate content for precision: comma-separated feature indices,
    /// values taken from --instance
    #[arg(long, value_delimiter = ',', value_name = "I,J,..")]
    features: Vec<usize>,
    /// Node restriction for greedy-tree, e.g. "3=1,7=0" ('1' = +1)
    #[arg(long, value_name = "I=B,..")]
    assign: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Serialize)]
struct OracleJob<'a> {
    model: ModelEcho,
    quantity: Quantity,
    p: f64,
    epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    feature: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    instance: &'a Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    features: &'a Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    assign: &'a Option<String>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum OracleValue {
    Real(f64),
    Integer(usize),
}

#[derive(Serialize)]
struct OracleResults {
    value: OracleValue,
}

fn parse_assignments(text: &str) -> CliResult<Restriction> {
    let mut r = Restriction::new();
    for part in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (idx, val) = part.trim().split_once('=').ok_or_else(|| {
            CliError::Usage(format!("bad assignment '{part}', expected I=0 or I=1"))
        })?;
        let i: usize = idx
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad feature index '{idx}'")))?;
        let sign = match val.trim() {
            "0" => Sign::Minus,
            "1" => Sign::Plus,
            other => {
                return Err(CliError::Usage(format!(
                    "bad value '{other}' for feature {i}, expected 0 or 1"
                )))
            }
        };
        r.push(i, sign)?;
    }
    Ok(r)
}

fn need_instance(args: &OracleArgs, table: &TruthTable) -> CliResult<Instance> {
    let text = args.instance.as_ref().ok_or_else(|| {
        CliError::Usage("this quantity needs --instance".to_string())
    })?;
    parse_instance(text, table.dimension())
}

pub fn run(args: OracleArgs) -> CliResult<()> {
    args.output.require_json("oracle")?;
    let emitter = Emitter::new("oracle", 0);

    let expr = args.model.load()?;
    let echo = ModelEcho::new(&args.model, &expr);
    let table = TruthTable::from_expr(&expr)?;

    let value = match args.quantity {
        Quantity::Ns => OracleValue::Real(exact_noise_sensitivity(&table, args.p)?),
        Quantity::Score => {
            let feature = args
                .feature
                .ok_or_else(|| CliError::Usage("score needs --feature".to_string()))?;
            OracleValue::Real(exact_score(&table, feature, args.p)?)
        }
        Quantity::Precision => {
            let x = need_instance(&args, &table)?;
            let mut c = Restriction::new();
            for &i in &args.features {
                if i >= x.dimension() {
                    return Err(CliError::Usage(format!(
                        "--features index {i} out of range for dimension {}",
                        x.dimension()
                    )));
                }
                c.push(i, x.get(i))?;
            }
            OracleValue::Real(exact_precision_error(&table, &x, &c)?)
        }
        Quantity::CertComplexity => {
            let x = need_instance(&args, &table)?;
            OracleValue::Integer(exact_certificate_complexity(&table, &x, args.epsilon)?)
        }
        Quantity::AvgCertComplexity => {
            OracleValue::Real(exact_avg_certificate_complexity(&table, args.epsilon)?)
        }
        Quantity::DtComplexity => {
            OracleValue::Integer(exact_dt_complexity(&table, args.epsilon)?)
        }
        Quantity::GreedyTree => {
            let alpha = match &args.assign {
                Some(text) => parse_assignments(text)?,
                None => Restriction::new(),
            };
            OracleValue::Integer(exact_greedy_tree_query(&table, &alpha, args.p)?)
        }
    };

    let job = OracleJob {
        model: echo,
        quantity: args.quantity,
        p: args.p,
        epsilon: args.epsilon,
        feature: args.feature,
        instance: &args.instance,
        features: &args.features,
        assign: &args.assign,
    };
    emitter.emit(&args.output, &job, &OracleResults { value }, 0)
}
