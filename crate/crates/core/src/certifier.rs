//! Certificate finding over the implicit tree: walk to a leaf, then verify
//! the path statistically. Verification failure is a first-class Bottom
//! result, never an error.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{hoeffding_samples, precision_error_raw, verification_seed};
use crate::model::{BlackboxModel, Instance, Restriction};
use crate::tree::{ImplicitTree, ScoreMode, TreeParams};

/// Target precision/confidence plus the wiring knobs that turn them into
/// tree parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifierConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub depth_budget: DepthBudget,
    /// Wiring constants for k, eta and p (defaults 1.0).
    pub c_k: f64,
    pub c_eta: f64,
    pub c_p: f64,
    /// User-supplied bound on the eps-error decision-tree depth of f.
    pub d_bound: Option<f64>,
    pub seed: u64,
    pub score_mode: ScoreMode,
    pub prune_constant: bool,
    pub node_confidence: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthBudget {
    /// Derive k from d_bound.
    Auto,
    /// Fixed depth, overriding the wiring formula.
    Explicit(usize),
}

impl CertifierConfig {
    pub fn new(epsilon: f64, delta: f64) -> Result<CertifierConfig> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid_param(
                "epsilon",
                format!("{epsilon} is not in (0,1)"),
            ));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid_param(
                "delta",
                format!("{delta} is not in (0,1)"),
            ));
        }
        Ok(CertifierConfig {
            epsilon,
            delta,
            depth_budget: DepthBudget::Auto,
            c_k: 1.0,
            c_eta: 1.0,
            c_p: 1.0,
            d_bound: None,
            seed: 0,
            score_mode: ScoreMode::MonteCarlo,
            prune_constant: false,
            node_confidence: None,
        })
    }

    pub fn with_depth(mut self, k: usize) -> CertifierConfig {
        self.depth_budget = DepthBudget::Explicit(k);
        self
    }

    pub fn with_d_bound(mut self, bound: f64) -> CertifierConfig {
        self.d_bound = Some(bound);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> CertifierConfig {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: ScoreMode) -> CertifierConfig {
        self.score_mode = mode;
        self
    }

    pub fn with_constants(mut self, c_k: f64, c_eta: f64, c_p: f64) -> CertifierConfig {
        self.c_k = c_k;
        self.c_eta = c_eta;
        self.c_p = c_p;
        self
    }

    pub fn with_prune(mut self, prune: bool) -> CertifierConfig {
        self.prune_constant = prune;
        self
    }
}

/// Turns a depth bound on f into a decision-tree depth bound via the
/// certificate-complexity route: c_hat^2 / (epsilon * delta)^9.
///
/// Astronomically conservative; practical runs pass an explicit depth.
pub fn d_bound_from_certificate_guess(c_hat: f64, epsilon: f64, delta: f64) -> Result<f64> {
    if c_hat <= 0.0 {
        return Err(Error::invalid_param("c_hat", "must be positive"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid_param(
            "epsilon/delta",
            "must be in (0,1)",
        ));
    }
    Ok(c_hat * c_hat / (epsilon * delta).powi(9))
}

/// Wires (epsilon, delta, D_bound) into tree parameters:
/// k = ceil(c_k (D/eps)^3) capped at d, eta = c_eta / k, p = c_p eps / D
/// capped at 1. An explicit depth budget overrides k (and stands in for D
/// when no bound was given).
pub fn wire_parameters(cfg: &CertifierConfig, dimension: usize) -> Result<TreeParams> {
    if cfg.c_k <= 0.0 || cfg.c_eta <= 0.0 || cfg.c_p <= 0.0 {
        return Err(Error::invalid_param(
            "wiring constants",
            "c_k, c_eta, c_p must be positive",
        ));
    }
    if let Some(b) = cfg.d_bound {
        if b <= 0.0 {
            return Err(Error::invalid_param(
                "d_bound",
                format!("{b} is not positive"),
            ));
        }
    }
    let (k, d_eff) = match cfg.depth_budget {
        DepthBudget::Explicit(k) => {
            if k > dimension {
                return Err(Error::invalid_param(
                    "depth_budget",
                    format!("depth {k} exceeds dimension {dimension}"),
                ));
            }
            (k, cfg.d_bound.unwrap_or(k.max(1) as f64))
        }
        DepthBudget::Auto => {
            let bound = cfg.d_bound.ok_or_else(|| {
                Error::invalid_param(
                    "depth_budget",
                    "auto wiring requires d_bound (or pass an explicit depth)",
                )
            })?;
            let raw = (cfg.c_k * (bound / cfg.epsilon).powi(3)).ceil();
            let k = if raw >= dimension as f64 {
                dimension
            } else {
                raw as usize
            };
            (k, bound)
        }
    };
    let eta = (cfg.c_eta / k.max(1) as f64).min(0.5);
    let p = (cfg.c_p * cfg.epsilon / d_eff).min(1.0);
    let mut params = TreeParams::new(k, eta, p, cfg.seed, cfg.score_mode);
    params.prune_constant = cfg.prune_constant;
    params.node_confidence = cfg.node_confidence;
    params.validate(dimension)?;
    Ok(params)
}

/// An accepted certificate: the walk's restriction in root-to-leaf order,
/// with the verification estimate that admitted it.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    /// Features with values, in walk order; values agree with the instance.
    pub features: Restriction,
    pub instance: Instance,
    pub empirical_error: f64,
    /// Queries spent verifying this certificate. Walk queries are shared
    /// across a batch through the node cache and reported per job.
    pub verify_queries: u64,
    pub params: TreeParams,
}

impl Certificate {
    pub fn size(&self) -> usize {
        self.features.len()
    }
}

/// The explicit "no certificate found" output of a failed verification.
#[derive(Debug, Clone, Serialize)]
pub struct Bottom {
    pub reason: String,
    pub empirical_error: f64,
}

/// Result of one certification: an accepted certificate or Bottom.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CertifyOutcome {
    Accepted(Certificate),
    Bottom(Bottom),
}

impl CertifyOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            CertifyOutcome::Accepted(c) => Some(c),
            CertifyOutcome::Bottom(_) => None,
        }
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, CertifyOutcome::Bottom(_))
    }

    pub fn empirical_error(&self) -> f64 {
        match self {
            CertifyOutcome::Accepted(c) => c.empirical_error,
            CertifyOutcome::Bottom(b) => b.empirical_error,
        }
    }
}

/// Outcome of the statistical precision check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Verification {
    pub accepted: bool,
    pub empirical_error: f64,
    pub samples: usize,
}

/// Checks Pr[f(y) != f(x) | y_C = x_C] <= epsilon with confidence 1 - delta:
/// draws ceil(2 ln(2/delta) / epsilon^2) conditional samples and rejects
/// only when the empirical error is confidently above the target, i.e.
/// accepts iff it is at most epsilon + epsilon/2 (the one-sided deviation
/// these many samples resolve at confidence delta). If the true error is
/// <= epsilon this accepts with probability >= 1 - delta; if it is
/// >= 2 epsilon it rejects with probability >= 1 - delta.
pub fn verify_certificate(
    f: &BlackboxModel,
    x: &Instance,
    c: &Restriction,
    epsilon: f64,
    delta: f64,
    seed: u64,
) -> Result<Verification> {
    let samples = hoeffding_samples(epsilon / 2.0, delta)?;
    let empirical_error = precision_error_raw(f, x, c, samples, seed, 0)?;
    Ok(Verification {
        accepted: empirical_error <= 1.5 * epsilon,
        empirical_error,
        samples,
    })
}

/// FindCertificate: walk x to its leaf, then verify the path restriction.
pub fn find_certificate(
    f: &BlackboxModel,
    x: &Instance,
    cfg: &CertifierConfig,
    params: &TreeParams,
) -> Result<CertifyOutcome> {
    let tree = ImplicitTree::new(params.clone(), f.clone())?;
    find_certificate_with_tree(&tree, x, cfg)
}

/// Same, sharing one implicit tree (and its node cache) across calls.
pub fn find_certificate_with_tree(
    tree: &ImplicitTree,
    x: &Instance,
    cfg: &CertifierConfig,
) -> Result<CertifyOutcome> {
    let candidate = tree.walk(x)?;
    debug_assert!(candidate.len() <= tree.params().depth_budget);
    let seed = verification_seed(tree.params().global_seed, x);
    let v = verify_certificate(tree.model(), x, &candidate, cfg.epsilon, cfg.delta, seed)?;
    if v.accepted {
        Ok(CertifyOutcome::Accepted(Certificate {
            features: candidate,
            instance: x.clone(),
            empirical_error: v.empirical_error,
            verify_queries: v.samples as u64 + 1,
            params: tree.params().clone(),
        }))
    } else {
        Ok(CertifyOutcome::Bottom(Bottom {
            reason: format!(
                "verification failed: empirical error {:.6} is confidently above epsilon {}",
                v.empirical_error, cfg.epsilon
            ),
            empirical_error: v.empirical_error,
        }))
    }
}

/// Aggregates over a batch of instances.
#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub instances: usize,
    pub accepted: usize,
    pub bottom_rate: f64,
    /// Accepted certificate sizes -> counts.
    pub size_histogram: BTreeMap<usize, usize>,
    pub total_queries: u64,
    pub mean_queries: f64,
}

#[derive(Debug, Serialize)]
pub struct BatchOutcome {
    pub results: Vec<CertifyOutcome>,
    pub summary: BatchSummary,
}

/// Certifies every instance against one shared implicit tree; walks reuse
/// the node cache, so batch query cost is verification plus one computation
/// per distinct tree node.
pub fn certify_batch(
    f: &BlackboxModel,
    instances: &[Instance],
    cfg: &CertifierConfig,
    params: &TreeParams,
) -> Result<BatchOutcome> {
    let tree = ImplicitTree::new(params.clone(), f.clone())?;
    let before = f.queries();
    let results: Vec<CertifyOutcome> = instances
        .par_iter()
        .map(|x| find_certificate_with_tree(&tree, x, cfg))
        .collect::<Result<_>>()?;
    let total_queries = f.queries() - before;
    Ok(BatchOutcome {
        summary: summarize(&results, total_queries),
        results,
    })
}

fn summarize(results: &[CertifyOutcome], total_queries: u64) -> BatchSummary {
    let instances = results.len();
    let mut size_histogram = BTreeMap::new();
    let mut accepted = 0usize;
    for r in results {
        if let Some(cert) = r.certificate() {
            accepted += 1;
            *size_histogram.entry(cert.size()).or_insert(0) += 1;
        }
    }
    let bottoms = instances - accepted;
    BatchSummary {
        instances,
        accepted,
        bottom_rate: if instances == 0 {
            0.0
        } else {
            bottoms as f64 / instances as f64
        },
        size_histogram,
        total_queries,
        mean_queries: if instances == 0 {
            0.0
        } else {
            total_queries as f64 / instances as f64
        },
    }
}

#[cfg(test)]
mod tests;
