//! Implicit navigation of the depth-k eta-approximate greedy
//! noise-stabilizing decision tree: IsLeaf / Query / LeafValue plus the
//! root-to-leaf walk, without ever materializing the tree.
//!
//! The tree is pinned to one fixed object per global seed: every node
//! decision is computed from a seed derived from the node's canonical
//! restriction, and cached first-write-wins, so concurrent walks agree with
//! serial ones bit for bit.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    hoeffding_samples, mean_raw, mean_stream, node_seed, ns_raw, score_against_parent,
    PARENT_STREAM,
};
use crate::model::{BlackboxModel, Instance, Restriction, Sign};
use crate::oracles::{exact_greedy_tree_query, TruthTable};

/// How node decisions are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Seeded Monte-Carlo score estimates through query access.
    MonteCarlo,
    /// Exact scores over a materialized truth table (validation mode).
    ExactOracle,
}

/// The (k, eta, p, seed) bundle defining one implicit tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeParams {
    /// Tree depth k; every path has length exactly k unless pruning is on.
    pub depth_budget: usize,
    /// Score tolerance eta; per-estimate accuracy is eta/2.
    pub score_tolerance: f64,
    /// Noise rate p of the perturbation distribution.
    pub noise_rate: f64,
    pub global_seed: u64,
    pub score_mode: ScoreMode,
    /// When on, a node whose estimated |mean| exceeds 1 - 2*eta becomes an
    /// early leaf. Off by default: the tree is the complete depth-k object.
    pub prune_constant: bool,
    /// Per-estimate confidence override; defaults to 0.01 / (d * k).
    pub node_confidence: Option<f64>,
}

impl TreeParams {
    pub fn new(
        depth_budget: usize,
        score_tolerance: f64,
        noise_rate: f64,
        global_seed: u64,
        score_mode: ScoreMode,
    ) -> TreeParams {
        TreeParams {
            depth_budget,
            score_tolerance,
            noise_rate,
            global_seed,
            score_mode,
            prune_constant: false,
            node_confidence: None,
        }
    }

    pub fn validate(&self, dimension: usize) -> Result<()> {
        if self.depth_budget > dimension {
            return Err(Error::invalid_param(
                "depth_budget",
                format!(
                    "depth {} exceeds dimension {dimension}",
                    self.depth_budget
                ),
            ));
        }
        if !(self.score_tolerance > 0.0 && self.score_tolerance < 1.0) {
            return Err(Error::invalid_param(
                "score_tolerance",
                format!("{} is not in (0,1)", self.score_tolerance),
            ));
        }
        if !(self.noise_rate > 0.0 && self.noise_rate <= 1.0) {
            return Err(Error::invalid_param(
                "noise_rate",
                format!("{} is not in (0,1]", self.noise_rate),
            ));
        }
        if let Some(dn) = self.node_confidence {
            if !(dn > 0.0 && dn < 1.0) {
                return Err(Error::invalid_param(
                    "node_confidence",
                    format!("{dn} is not in (0,1)"),
                ));
            }
        }
        Ok(())
    }

    /// Per-estimate confidence: a crude union bound across the <= d*k
    /// estimates on one walk.
    pub fn node_delta(&self, dimension: usize) -> f64 {
        self.node_confidence
            .unwrap_or(0.01 / (dimension * self.depth_budget).max(1) as f64)
    }
}

type NodeKey = Vec<(usize, Sign)>;

/// Per-node memo shared by all walks of one job. Entries are computed at
/// most once and never change afterwards; racing readers block on the
/// first writer's cell.
#[derive(Debug, Default)]
pub struct NodeCache {
    features: Mutex<HashMap<NodeKey, Arc<OnceLock<usize>>>>,
    means: Mutex<HashMap<NodeKey, Arc<OnceLock<f64>>>>,
}

impl NodeCache {
    fn cell<T>(map: &Mutex<HashMap<NodeKey, Arc<OnceLock<T>>>>, key: NodeKey) -> Arc<OnceLock<T>> {
        let mut guard = map.lock().expect("node cache poisoned");
        Arc::clone(guard.entry(key).or_default())
    }

    /// Number of internal nodes decided so far.
    pub fn decided_features(&self) -> usize {
        self.features.lock().expect("node cache poisoned").len()
    }
}

/// Def-style navigation handle over one implicit tree.
pub struct ImplicitTree {
    params: TreeParams,
    model: BlackboxModel,
    table: Option<TruthTable>,
    /// Monte-Carlo samples per NS/mean estimate at a node.
    samples: usize,
    cache: NodeCache,
}

impl ImplicitTree {
    pub fn new(params: TreeParams, model: BlackboxModel) -> Result<ImplicitTree> {
        let d = model.dimension();
        params.validate(d)?;
        let table = match params.score_mode {
            ScoreMode::ExactOracle => Some(model.to_truth_table()?),
            ScoreMode::MonteCarlo => None,
        };
        let samples = hoeffding_samples(params.score_tolerance / 2.0, params.node_delta(d))?;
        Ok(ImplicitTree {
            params,
            model,
            table,
            samples,
            cache: NodeCache::default(),
        })
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn model(&self) -> &BlackboxModel {
        &self.model
    }

    pub fn samples_per_estimate(&self) -> usize {
        self.samples
    }

    pub fn cache(&self) -> &NodeCache {
        &self.cache
    }

    fn check_node(&self, alpha: &Restriction) -> Result<()> {
        if let Some(max) = alpha.max_index() {
            if max >= self.model.dimension() {
                return Err(Error::VariableOutOfRange {
                    index: max,
                    dimension: self.model.dimension(),
                });
            }
        }
        if alpha.len() > self.params.depth_budget {
            return Err(Error::PathTooLong {
                len: alpha.len(),
                depth: self.params.depth_budget,
            });
        }
        Ok(())
    }

    /// Whether alpha is a leaf: a path of length exactly k, or (with
    /// pruning) a node whose subfunction is already near-constant.
    pub fn is_leaf(&self, alpha: &Restriction) -> Result<bool> {
        self.check_node(alpha)?;
        if alpha.len() == self.params.depth_budget {
            return Ok(true);
        }
        if self.params.prune_constant {
            let mean = self.node_mean(alpha);
            return Ok(mean.abs() > 1.0 - 2.0 * self.params.score_tolerance);
        }
        Ok(false)
    }

    /// The feature queried at internal node alpha: the empirical argmax of
    /// the per-feature noise-stabilizing scores (exact argmax in oracle
    /// mode), lowest index on ties. Cached and identical on every call.
    pub fn query(&self, alpha: &Restriction) -> Result<usize> {
        if self.is_leaf(alpha)? {
            return Err(Error::NotInternal);
        }
        let cell = NodeCache::cell(&self.cache.features, alpha.canonical());
        Ok(*cell.get_or_init(|| match self.params.score_mode {
            ScoreMode::ExactOracle => exact_greedy_tree_query(
                self.table.as_ref().expect("exact mode has a table"),
                alpha,
                self.params.noise_rate,
            )
            .expect("internal node has free features"),
            ScoreMode::MonteCarlo => self.query_monte_carlo(alpha),
        }))
    }

    fn query_monte_carlo(&self, alpha: &Restriction) -> usize {
        let d = self.model.dimension();
        let p = self.params.noise_rate;
        let seed = node_seed(self.params.global_seed, alpha);
        let f_alpha = self
            .model
            .restrict(alpha)
            .expect("node indices validated");
        let parent_ns = ns_raw(&f_alpha, self.samples, p, seed, PARENT_STREAM)
            .expect("dimensions validated at construction");
        let free: Vec<usize> = (0..d).filter(|&i| !alpha.contains(i)).collect();
        let scores: Vec<(usize, f64)> = free
            .par_iter()
            .map(|&i| {
                let s = score_against_parent(&f_alpha, i, parent_ns, self.samples, p, seed)
                    .expect("dimensions validated at construction");
                (i, s)
            })
            .collect();
        let mut best = scores[0];
        for &(i, s) in &scores[1..] {
            if s > best.1 {
                best = (i, s);
            }
        }
        best.0
    }

    /// The label of leaf alpha: the sign of the (estimated or exact) mean
    /// of f_alpha; a mean of exactly 0 resolves to +1.
    pub fn leaf_value(&self, alpha: &Restriction) -> Result<Sign> {
        if !self.is_leaf(alpha)? {
            return Err(Error::NotLeaf);
        }
        Ok(Sign::from_mean(self.node_mean(alpha)))
    }

    fn node_mean(&self, alpha: &Restriction) -> f64 {
        let cell = NodeCache::cell(&self.cache.means, alpha.canonical());
        *cell.get_or_init(|| match &self.table {
            Some(t) => t
                .restricted_mean(alpha)
                .expect("node indices validated"),
            None => {
                let seed = node_seed(self.params.global_seed, alpha);
                let f_alpha = self
                    .model
                    .restrict(alpha)
                    .expect("node indices validated");
                mean_raw(
                    &f_alpha,
                    self.samples,
                    seed,
                    mean_stream(self.model.dimension()),
                )
                .expect("dimensions validated at construction")
            }
        })
    }

    /// The root-to-leaf path of x: repeatedly queries and extends alpha with
    /// x's value until a leaf is reached. The result doubles as the
    /// candidate certificate, features in walk order.
    pub fn walk(&self, x: &Instance) -> Result<Restriction> {
        if x.dimension() != self.model.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.model.dimension(),
                got: x.dimension(),
            });
        }
        let mut alpha = Restriction::new();
        while !self.is_leaf(&alpha)? {
            let i = self.query(&alpha)?;
            alpha.push(i, x.get(i))?;
        }
        Ok(alpha)
    }

    /// The tree's prediction for x: the label of the leaf its walk reaches.
    pub fn classify(&self, x: &Instance) -> Result<Sign> {
        let leaf = self.walk(x)?;
        self.leaf_value(&leaf)
    }
}
