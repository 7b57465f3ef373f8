//! The report envelope: schema-versioned, deterministic given seed and job.
//!
//! The `results` section is a pure function of the job spec (including the
//! seed); wall time and other non-reproducible fields live outside it.

use std::time::Instant;

use serde::Serialize;

use crate::{CliError, CliResult, OutputArgs};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Serialize)]
struct Report<'a, J: Serialize, R: Serialize> {
    schema_version: &'static str,
    tool_version: &'static str,
    command: &'static str,
    seed: u64,
    job: &'a J,
    results: &'a R,
    query_count: u64,
    wall_time_ms: u64,
}

/// Echo of the model actually used, for exact re-runs.
#[derive(Serialize, Clone)]
pub struct ModelEcho {
    pub source: String,
    pub canonical: String,
    pub dimension: usize,
}

impl ModelEcho {
    pub fn new(args: &crate::ModelArgs, expr: &implicert_core::ModelExpr) -> ModelEcho {
        let source = match (&args.model, &args.model_inline) {
            (Some(p), _) => format!("file:{}", p.display()),
            (_, Some(_)) => "inline".to_string(),
            _ => "unknown".to_string(),
        };
        ModelEcho {
            source,
            canonical: expr.to_string(),
            dimension: expr.dimension(),
        }
    }
}

pub struct Emitter {
    command: &'static str,
    seed: u64,
    started: Instant,
}

impl Emitter {
    pub fn new(command: &'static str, seed: u64) -> Emitter {
        Emitter {
            command,
            seed,
            started: Instant::now(),
        }
    }

    pub fn emit<J: Serialize, R: Serialize>(
        self,
        output: &OutputArgs,
        job: &J,
        results: &R,
        query_count: u64,
    ) -> CliResult<()> {
        let report = Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.seed,
            job,
            results,
            query_count,
            wall_time_ms: self.started.elapsed().as_millis() as u64,
        };
        let payload = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Internal(format!("report serialization: {e}")))?;
        output.write(&payload)
    }
}
