//! The greedy precision-gain heuristic: iteratively add the feature with
//! the largest gain in estimated precision until the error target is met.
//!
//! Kept as the comparison point for the succinctness contrast: on a
//! two-feature parity every single feature has zero gain, so a fixed tie
//! rule drags in all the irrelevant features before the relevant pair.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{mix_seed, precision_error_raw, rng_at};
use crate::model::{BlackboxModel, Instance, Restriction};
use crate::oracles::{exact_precision_error, TruthTable};

/// How candidate precisions are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    MonteCarlo,
    ExactOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineConfig {
    pub epsilon: f64,
    /// Samples per precision estimate (Monte-Carlo mode).
    pub samples: usize,
    pub precision_mode: PrecisionMode,
    pub seed: u64,
    /// Break exact ties uniformly at random instead of by lowest index.
    pub randomized_ties: bool,
}

impl BaselineConfig {
    pub fn new(epsilon: f64, samples: usize, precision_mode: PrecisionMode) -> Result<BaselineConfig> {
        // epsilon = 0 is meaningful in exact mode: stop only at zero error
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::invalid_param(
                "epsilon",
                format!("{epsilon} is not in [0,1)"),
            ));
        }
        if samples == 0 {
            return Err(Error::invalid_param("samples", "must be at least 1"));
        }
        Ok(BaselineConfig {
            epsilon,
            samples,
            precision_mode,
            seed: 0,
            randomized_ties: false,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> BaselineConfig {
        self.seed = seed;
        self
    }

    pub fn with_randomized_ties(mut self, on: bool) -> BaselineConfig {
        self.randomized_ties = on;
        self
    }
}

/// A baseline certificate with its final error estimate.
#[derive(Debug, Clone, Serialize)]
pub struct BaselineCertificate {
    /// Features with values, in the order the greedy loop added them.
    pub features: Restriction,
    pub error_estimate: f64,
}

impl BaselineCertificate {
    pub fn size(&self) -> usize {
        self.features.len()
    }
}

const BASELINE_TAG: u64 = 0x6261_7365_6c69_6e65; // "baseline"
const TIE_TAG: u64 = 0x7469_6572_6e67_3030; // "tierng00"

struct ErrorOracle<'a> {
    f: &'a BlackboxModel,
    table: Option<TruthTable>,
    cfg: &'a BaselineConfig,
}

impl ErrorOracle<'_> {
    /// Error of candidate C at a given round; `slot` separates the sampling
    /// streams of concurrent candidates.
    fn error(&self, x: &Instance, c: &Restriction, round: usize, slot: usize) -> Result<f64> {
        match &self.table {
            Some(t) => exact_precision_error(t, x, c),
            None => {
                let seed = mix_seed(
                    self.cfg.seed ^ BASELINE_TAG,
                    [round as u64, slot as u64],
                );
                precision_error_raw(self.f, x, c, self.cfg.samples, seed, 0)
            }
        }
    }
}

/// Starting from the empty certificate, repeatedly adds the feature whose
/// addition maximizes estimated precision (ties to the lowest index, or
/// uniformly at random behind the flag) until the estimated error is at
/// most epsilon or every feature is used.
pub fn greedy_precision_certificate(
    f: &BlackboxModel,
    x: &Instance,
    cfg: &BaselineConfig,
) -> Result<BaselineCertificate> {
    let d = f.dimension();
    if x.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.dimension(),
        });
    }
    let oracle = ErrorOracle {
        f,
        table: match cfg.precision_mode {
            PrecisionMode::ExactOracle => Some(f.to_truth_table()?),
            PrecisionMode::MonteCarlo => None,
        },
        cfg,
    };

    let mut certificate = Restriction::new();
    // slot d is reserved for the current certificate's own estimate
    let mut current = oracle.error(x, &certificate, 0, d)?;
    let mut round = 0usize;
    while current > cfg.epsilon && certificate.len() < d {
        round += 1;
        let mut best: Option<(usize, f64)> = None;
        let mut tied: Vec<usize> = Vec::new();
        for j in 0..d {
            if certificate.contains(j) {
                continue;
            }
            let candidate = certificate.extended(j, x.get(j))?;
            let err = oracle.error(x, &candidate, round, j)?;
            match best {
                None => {
                    best = Some((j, err));
                    tied = vec![j];
                }
                Some((_, b)) if err < b => {
                    best = Some((j, err));
                    tied = vec![j];
                }
                Some((_, b)) if err == b => tied.push(j),
                _ => {}
            }
        }
        let (mut pick, err) = best.expect("loop runs only while features remain");
        if cfg.randomized_ties && tied.len() > 1 {
            let mut rng = rng_at(mix_seed(cfg.seed ^ TIE_TAG, [round as u64]), 0);
            pick = tied[rng.random_range(0..tied.len())];
        }
        certificate.push(pick, x.get(pick))?;
        current = err;
    }
    Ok(BaselineCertificate {
        features: certificate,
        error_estimate: current,
    })
}

#[cfg(test)]
mod tests;
