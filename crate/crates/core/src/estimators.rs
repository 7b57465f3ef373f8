//! Seeded Monte-Carlo estimation of noise sensitivity, noise-stabilizing
//! scores, conditional precision error and restricted means.
//!
//! All randomness flows from a 64-bit seed through a counter-based generator
//! (ChaCha8), with one stream per estimate, so every estimator is a pure
//! function of (model, config) and parallel score estimation reproduces the
//! serial result bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BlackboxModel, Instance, Restriction, Sign};

/// Sample count, seed and noise rate for one estimation job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorConfig {
    pub samples: usize,
    pub seed: u64,
    pub noise_rate: f64,
}

impl EstimatorConfig {
    pub fn new(samples: usize, seed: u64, noise_rate: f64) -> Result<EstimatorConfig> {
        if samples == 0 {
            return Err(Error::invalid_param("samples", "must be at least 1"));
        }
        if !(noise_rate > 0.0 && noise_rate <= 1.0) {
            return Err(Error::invalid_param(
                "noise_rate",
                format!("{noise_rate} is not in (0,1]"),
            ));
        }
        Ok(EstimatorConfig {
            samples,
            seed,
            noise_rate,
        })
    }
}

/// A point estimate with its sampling cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub samples: usize,
    pub queries: u64,
}

/// Per-feature stream layout at one node: stream 0 is the parent estimate,
/// streams 2i+1 / 2i+2 are the two restrictions of feature i, and
/// [`mean_stream`] is reserved for the node mean.
pub(crate) const PARENT_STREAM: u64 = 0;

pub(crate) fn minus_stream(feature: usize) -> u64 {
    2 * feature as u64 + 1
}

pub(crate) fn plus_stream(feature: usize) -> u64 {
    2 * feature as u64 + 2
}

pub(crate) fn mean_stream(dimension: usize) -> u64 {
    2 * dimension as u64 + 1
}

pub(crate) fn rng_at(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A uniform point of the d-dimensional hypercube.
pub fn random_instance(dimension: usize, rng: &mut impl Rng) -> Instance {
    Instance::new((0..dimension).map(|_| Sign::from_bool(rng.random())).collect())
}

/// A seeded batch of uniform instances.
pub fn sample_instances(dimension: usize, count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = rng_at(seed, 0);
    (0..count).map(|_| random_instance(dimension, &mut rng)).collect()
}

/// Independently rerandomizes each coordinate with probability p (so each
/// coordinate flips with probability p/2).
pub fn perturb(x: &Instance, p: f64, rng: &mut impl Rng) -> Instance {
    assert!((0.0..=1.0).contains(&p), "noise rate {p} is not in [0,1]");
    let mut y = x.clone();
    for i in 0..x.dimension() {
        if rng.random::<f64>() < p {
            y.set(i, Sign::from_bool(rng.random()));
        }
    }
    y
}

/// Disagreement frequency over `samples` i.i.d. pairs (x, perturb(x, p)).
/// Issues exactly 2·samples model queries.
pub(crate) fn ns_raw(
    f: &BlackboxModel,
    samples: usize,
    p: f64,
    seed: u64,
    stream: u64,
) -> Result<f64> {
    let d = f.dimension();
    let mut rng = rng_at(seed, stream);
    let mut disagree = 0usize;
    for _ in 0..samples {
        let x = random_instance(d, &mut rng);
        let y = perturb(&x, p, &mut rng);
        if f.evaluate(&x)? != f.evaluate(&y)? {
            disagree += 1;
        }
    }
    Ok(disagree as f64 / samples as f64)
}

/// Monte-Carlo estimate of NS_p(f), deterministic given the config.
pub fn estimate_noise_sensitivity(
    f: &BlackboxModel,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport> {
    let estimate = ns_raw(f, cfg.samples, cfg.noise_rate, cfg.seed, PARENT_STREAM)?;
    Ok(EstimateReport {
        estimate,
        samples: cfg.samples,
        queries: 2 * cfg.samples as u64,
    })
}

/// Monte-Carlo estimate of the noise-stabilizing score of feature i:
/// NS_p(f) - 1/2 (NS_p(f_{i=-1}) + NS_p(f_{i=+1})), one fresh NS estimate
/// per term. Issues exactly 6·samples model queries.
pub fn estimate_score(
    f: &BlackboxModel,
    feature: usize,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport> {
    if feature >= f.dimension() {
        return Err(Error::VariableOutOfRange {
            index: feature,
            dimension: f.dimension(),
        });
    }
    let parent = ns_raw(f, cfg.samples, cfg.noise_rate, cfg.seed, PARENT_STREAM)?;
    let estimate = score_against_parent(f, feature, parent, cfg.samples, cfg.noise_rate, cfg.seed)?;
    Ok(EstimateReport {
        estimate,
        samples: cfg.samples,
        queries: 6 * cfg.samples as u64,
    })
}

/// The restricted half of a score estimate; the parent NS term is passed in
/// so one parent estimate can be shared across all features of a node.
pub(crate) fn score_against_parent(
    f: &BlackboxModel,
    feature: usize,
    parent_ns: f64,
    samples: usize,
    p: f64,
    seed: u64,
) -> Result<f64> {
    let minus = Restriction::from_pairs([(feature, Sign::Minus)])?;
    let plus = Restriction::from_pairs([(feature, Sign::Plus)])?;
    let ns_minus = ns_raw(&f.restrict(&minus)?, samples, p, seed, minus_stream(feature))?;
    let ns_plus = ns_raw(&f.restrict(&plus)?, samples, p, seed, plus_stream(feature))?;
    Ok(parent_ns - 0.5 * (ns_minus + ns_plus))
}

/// Disagreement frequency against f(x) over `samples` uniform completions
/// of the coordinates left free by C. Issues samples + 1 queries.
pub fn estimate_precision_error(
    f: &BlackboxModel,
    x: &Instance,
    c: &Restriction,
    cfg: &EstimatorConfig,
) -> Result<EstimateReport> {
    precision_error_raw(f, x, c, cfg.samples, cfg.seed, PARENT_STREAM).map(|estimate| {
        EstimateReport {
            estimate,
            samples: cfg.samples,
            queries: cfg.samples as u64 + 1,
        }
    })
}

pub(crate) fn precision_error_raw(
    f: &BlackboxModel,
    x: &Instance,
    c: &Restriction,
    samples: usize,
    seed: u64,
    stream: u64,
) -> Result<f64> {
    for (i, s) in c.iter() {
        if i >= f.dimension() {
            return Err(Error::VariableOutOfRange {
                index: i,
                dimension: f.dimension(),
            });
        }
        if x.get(i) != s {
            return Err(Error::RestrictionMismatch { feature: i });
        }
    }
    let target = f.evaluate(x)?;
    let free: Vec<usize> = (0..f.dimension()).filter(|&i| !c.contains(i)).collect();
    let mut rng = rng_at(seed, stream);
    let mut bad = 0usize;
    let mut y = x.clone();
    for _ in 0..samples {
        for &i in &free {
            y.set(i, Sign::from_bool(rng.random()));
        }
        if f.evaluate(&y)? != target {
            bad += 1;
        }
    }
    Ok(bad as f64 / samples as f64)
}

/// Sample mean of f over `samples` uniform instances.
pub fn estimate_mean(f: &BlackboxModel, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    let estimate = mean_raw(f, cfg.samples, cfg.seed, PARENT_STREAM)?;
    Ok(EstimateReport {
        estimate,
        samples: cfg.samples,
        queries: cfg.samples as u64,
    })
}

pub(crate) fn mean_raw(f: &BlackboxModel, samples: usize, seed: u64, stream: u64) -> Result<f64> {
    let d = f.dimension();
    let mut rng = rng_at(seed, stream);
    let mut sum = 0i64;
    for _ in 0..samples {
        let x = random_instance(d, &mut rng);
        sum += f.evaluate(&x)?.as_i8() as i64;
    }
    Ok(sum as f64 / samples as f64)
}

/// Two-sided Hoeffding count for a \[0,1\]-bounded mean:
/// ceil(ln(2/delta) / (2 eta^2)) samples give accuracy eta with
/// confidence 1 - delta.
pub fn hoeffding_samples(eta: f64, delta: f64) -> Result<usize> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::invalid_param("eta", format!("{eta} is not in (0,1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid_param(
            "delta",
            format!("{delta} is not in (0,1)"),
        ));
    }
    Ok(((2.0 / delta).ln() / (2.0 * eta * eta)).ceil() as usize)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into a stable 64-bit hash; the seed-derivation
/// primitive behind [`node_seed`] and per-purpose substreams.
pub fn mix_seed(base: u64, parts: impl IntoIterator<Item = u64>) -> u64 {
    let mut h = splitmix64(base);
    for part in parts {
        h = splitmix64(h ^ part);
    }
    h
}

const NODE_TAG: u64 = 0x6e6f_6465_7365_6564; // "nodeseed"

/// Deterministic per-node seed: a stable hash of the global seed and the
/// canonical (sorted) encoding of alpha, so equal restrictions get equal
/// seeds regardless of insertion order.
pub fn node_seed(global_seed: u64, alpha: &Restriction) -> u64 {
    let parts = alpha
        .canonical()
        .into_iter()
        .map(|(i, s)| ((i as u64) << 1) | s.is_plus() as u64);
    mix_seed(global_seed ^ NODE_TAG, parts)
}

const VERIFY_TAG: u64 = 0x7665_7269_6679_3031; // "verify01"

/// Per-instance seed for certificate verification sampling.
pub fn verification_seed(global_seed: u64, x: &Instance) -> u64 {
    // pack the instance bits into words, then fold
    let mut words = Vec::with_capacity(x.dimension() / 64 + 1);
    let mut cur = 0u64;
    for (i, s) in x.bits().iter().enumerate() {
        if s.is_plus() {
            cur |= 1 << (i % 64);
        }
        if i % 64 == 63 {
            words.push(cur);
            cur = 0;
        }
    }
    if !x.dimension().is_multiple_of(64) {
        words.push(cur);
    }
    mix_seed(global_seed ^ VERIFY_TAG, words)
}

#[cfg(test)]
mod tests;
