//! Ground-truth computations at small dimension: spectra, exact noise
//! sensitivity and scores, exact precision error, certificate complexity
//! and the exact greedy split choice.
//!
//! Everything here enumerates or transforms a materialized truth table; the
//! estimators in [`crate::estimators`] are validated against these values.

mod dt_depth;

pub use dt_depth::exact_dt_complexity;

use crate::error::{Error, Result};
use crate::model::{Instance, ModelExpr, Restriction, Sign};

/// Largest dimension for materialized tables and spectra.
pub const TABLE_CAP: usize = 20;
/// Largest dimension for the exhaustive certificate search.
pub const CERTIFICATE_CAP: usize = 16;
/// Largest dimension for decision-tree depth search.
pub const DT_CAP: usize = 14;
/// Largest dimension for the quadratic pair-enumeration cross-check.
pub const PAIR_ENUM_CAP: usize = 12;

fn check_cap(what: &'static str, cap: usize, got: usize) -> Result<()> {
    if got > cap {
        return Err(Error::DimensionOverCap { what, cap, got });
    }
    Ok(())
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid_param(name, format!("{p} is not in [0,1]")));
    }
    Ok(())
}

/// A fully materialized f: bits^d -> bits, labels indexed by instance code
/// (bit i of the code is 1 iff feature i is +1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    dimension: usize,
    labels: Vec<Sign>,
}

impl TruthTable {
    pub fn from_labels(dimension: usize, labels: Vec<Sign>) -> Result<TruthTable> {
        check_cap("truth table", TABLE_CAP, dimension)?;
        if labels.len() != 1 << dimension {
            return Err(Error::InvalidInput(format!(
                "expected {} labels for d={dimension}, got {}",
                1usize << dimension,
                labels.len()
            )));
        }
        Ok(TruthTable { dimension, labels })
    }

    pub fn from_fn(dimension: usize, mut f: impl FnMut(&Instance) -> Sign) -> Result<TruthTable> {
        check_cap("truth table", TABLE_CAP, dimension)?;
        let labels = (0..1usize << dimension)
            .map(|code| f(&Instance::from_code(code, dimension)))
            .collect();
        Ok(TruthTable { dimension, labels })
    }

    pub fn from_expr(expr: &ModelExpr) -> Result<TruthTable> {
        TruthTable::from_fn(expr.dimension(), |x| expr.evaluate_unchecked(x))
    }

    /// Parses the model DSL and materializes it.
    pub fn parse(text: &str) -> Result<TruthTable> {
        TruthTable::from_expr(&ModelExpr::parse(text)?)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn label(&self, code: usize) -> Sign {
        self.labels[code]
    }

    pub fn label_at(&self, x: &Instance) -> Sign {
        self.labels[x.code()]
    }

    pub fn labels(&self) -> &[Sign] {
        &self.labels
    }

    /// The restriction f_{i=b}, kept at full dimension: coordinate i is
    /// overridden, not removed, so labels where bit i disagrees with b are
    /// replaced by their partner's label.
    pub fn restrict(&self, feature: usize, value: Sign) -> Result<TruthTable> {
        if feature >= self.dimension {
            return Err(Error::VariableOutOfRange {
                index: feature,
                dimension: self.dimension,
            });
        }
        let bit = 1usize << feature;
        let labels = (0..self.labels.len())
            .map(|code| {
                let fixed = if value.is_plus() { code | bit } else { code & !bit };
                self.labels[fixed]
            })
            .collect();
        Ok(TruthTable {
            dimension: self.dimension,
            labels,
        })
    }

    /// f_alpha for a multi-feature restriction, full dimension.
    pub fn restrict_all(&self, alpha: &Restriction) -> Result<TruthTable> {
        let mut set_mask = 0usize;
        let mut val_mask = 0usize;
        for (i, s) in alpha.iter() {
            if i >= self.dimension {
                return Err(Error::VariableOutOfRange {
                    index: i,
                    dimension: self.dimension,
                });
            }
            set_mask |= 1 << i;
            if s.is_plus() {
                val_mask |= 1 << i;
            }
        }
        let labels = (0..self.labels.len())
            .map(|code| self.labels[(code & !set_mask) | val_mask])
            .collect();
        Ok(TruthTable {
            dimension: self.dimension,
            labels,
        })
    }

    /// E\[f\] over the uniform hypercube.
    pub fn mean(&self) -> f64 {
        let sum: i64 = self.labels.iter().map(|s| s.as_i8() as i64).sum();
        sum as f64 / self.labels.len() as f64
    }

    /// E\[f_alpha\]: the mean over the subcube selected by alpha.
    pub fn restricted_mean(&self, alpha: &Restriction) -> Result<f64> {
        let (set_mask, val_mask) = masks(alpha, self.dimension)?;
        let free = free_bits(set_mask, self.dimension);
        let mut sum = 0i64;
        for sub in 0..1usize << free.len() {
            let code = scatter(sub, &free) | val_mask;
            sum += self.labels[code].as_i8() as i64;
        }
        Ok(sum as f64 / (1u64 << free.len()) as f64)
    }

    /// True when the function's value never depends on `feature`.
    pub fn is_irrelevant(&self, feature: usize) -> bool {
        let bit = 1usize << feature;
        (0..self.labels.len())
            .filter(|code| code & bit == 0)
            .all(|code| self.labels[code] == self.labels[code | bit])
    }
}

fn masks(alpha: &Restriction, dimension: usize) -> Result<(usize, usize)> {
    let mut set_mask = 0usize;
    let mut val_mask = 0usize;
    for (i, s) in alpha.iter() {
        if i >= dimension {
            return Err(Error::VariableOutOfRange {
                index: i,
                dimension,
            });
        }
        set_mask |= 1 << i;
        if s.is_plus() {
            val_mask |= 1 << i;
        }
    }
    Ok((set_mask, val_mask))
}

fn free_bits(set_mask: usize, dimension: usize) -> Vec<usize> {
    (0..dimension).filter(|i| set_mask & (1 << i) == 0).collect()
}

/// Spreads the low bits of `sub` onto the listed bit positions.
fn scatter(sub: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0usize, |acc, (j, &pos)| acc | (((sub >> j) & 1) << pos))
}

/// All 2^d Fourier coefficients, indexed by subset mask.
#[derive(Debug, Clone)]
pub struct Spectrum {
    dimension: usize,
    coefficients: Vec<f64>,
}

impl Spectrum {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The coefficient of the parity over the subset encoded by `mask`.
    pub fn coefficient(&self, mask: usize) -> f64 {
        self.coefficients[mask]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Sum of squared coefficients; 1 for a ±1-valued function (Parseval).
    pub fn parseval_sum(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// Inverse transform back to labels (values are snapped to signs).
    pub fn to_table(&self) -> TruthTable {
        let d = self.dimension;
        let mut v = self.coefficients.clone();
        butterfly(&mut v);
        let all = (1usize << d) - 1;
        let labels = (0..1usize << d)
            .map(|code| Sign::from_mean(v[all ^ code]))
            .collect();
        TruthTable { dimension: d, labels }
    }
}

/// In-place Walsh-Hadamard butterfly with the symmetric (-1)^{|S ∩ c|}
/// kernel; self-inverse up to a factor of 2^d.
fn butterfly(v: &mut [f64]) {
    let n = v.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(half * 2) {
            for i in block..block + half {
                let (a, b) = (v[i], v[i + half]);
                v[i] = a + b;
                v[i + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// Computes the full Fourier spectrum: the coefficient of S is
/// E_x[f(x) · prod_{i in S} x_i].
///
/// Labels are indexed with bit=1 meaning +1, so the symmetric kernel applies
/// after a bit-complement reindexing.
pub fn walsh_hadamard(t: &TruthTable) -> Spectrum {
    let d = t.dimension;
    let n = 1usize << d;
    let all = n - 1;
    let mut v = vec![0.0f64; n];
    for code in 0..n {
        v[all ^ code] = t.labels[code].value();
    }
    butterfly(&mut v);
    let scale = 1.0 / n as f64;
    for c in v.iter_mut() {
        *c *= scale;
    }
    Spectrum {
        dimension: d,
        coefficients: v,
    }
}

/// Exact noise sensitivity via the spectral identity
/// NS_p(f) = 1/2 - 1/2 · sum_S (1-p)^{|S|} f̂(S)².
pub fn exact_noise_sensitivity(t: &TruthTable, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    let spec = walsh_hadamard(t);
    Ok(noise_sensitivity_from_spectrum(&spec, p))
}

/// Same identity, reusing an already-computed spectrum.
pub fn noise_sensitivity_from_spectrum(spec: &Spectrum, p: f64) -> f64 {
    let d = spec.dimension;
    let mut pow = vec![1.0f64; d + 1];
    for j in 1..=d {
        pow[j] = pow[j - 1] * (1.0 - p);
    }
    let stab: f64 = spec
        .coefficients
        .iter()
        .enumerate()
        .map(|(mask, c)| pow[mask.count_ones() as usize] * c * c)
        .sum();
    0.5 - 0.5 * stab
}

/// Independent O(4^d) cross-check: enumerates every (x, x') pair with its
/// exact transition weight (p/2)^h (1-p/2)^{d-h}, h the Hamming distance.
pub fn ns_by_pair_enumeration(t: &TruthTable, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    check_cap("pair enumeration", PAIR_ENUM_CAP, t.dimension)?;
    let d = t.dimension;
    let n = 1usize << d;
    let mut flip_pow = vec![1.0f64; d + 1];
    let mut keep_pow = vec![1.0f64; d + 1];
    for j in 1..=d {
        flip_pow[j] = flip_pow[j - 1] * (p / 2.0);
        keep_pow[j] = keep_pow[j - 1] * (1.0 - p / 2.0);
    }
    let mut total = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            if t.labels[x] != t.labels[y] {
                let h = (x ^ y).count_ones() as usize;
                total += flip_pow[h] * keep_pow[d - h];
            }
        }
    }
    Ok(total / n as f64)
}

/// Exact noise stabilizing score of feature i:
/// Score(i) = NS_p(f) - 1/2 (NS_p(f_{i=-1}) + NS_p(f_{i=+1})).
///
/// All three terms are computed over full-dimension tables, so an irrelevant
/// feature yields exactly 0.0, not merely a small value.
pub fn exact_score(t: &TruthTable, feature: usize, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if feature >= t.dimension {
        return Err(Error::VariableOutOfRange {
            index: feature,
            dimension: t.dimension,
        });
    }
    let parent = exact_noise_sensitivity(t, p)?;
    let minus = exact_noise_sensitivity(&t.restrict(feature, Sign::Minus)?, p)?;
    let plus = exact_noise_sensitivity(&t.restrict(feature, Sign::Plus)?, p)?;
    Ok(parent - 0.5 * (minus + plus))
}

/// Exact conditional error Pr[f(y) != f(x) | y_C = x_C] over the
/// 2^{d-|C|} completions.
pub fn exact_precision_error(t: &TruthTable, x: &Instance, c: &Restriction) -> Result<f64> {
    if x.dimension() != t.dimension {
        return Err(Error::DimensionMismatch {
            expected: t.dimension,
            got: x.dimension(),
        });
    }
    for (i, s) in c.iter() {
        if i >= t.dimension {
            return Err(Error::VariableOutOfRange {
                index: i,
                dimension: t.dimension,
            });
        }
        if x.get(i) != s {
            return Err(Error::RestrictionMismatch { feature: i });
        }
    }
    let (set_mask, _) = masks(c, t.dimension)?;
    Ok(precision_error_by_mask(t, x.code(), set_mask))
}

/// Core loop shared by the certificate search: `set_mask` marks the fixed
/// coordinates, whose values are read from `x_code`.
fn precision_error_by_mask(t: &TruthTable, x_code: usize, set_mask: usize) -> f64 {
    let free = free_bits(set_mask, t.dimension);
    let base = x_code & set_mask;
    let target = t.labels[x_code];
    let total = 1usize << free.len();
    let mut bad = 0usize;
    for sub in 0..total {
        let code = scatter(sub, &free) | base;
        if t.labels[code] != target {
            bad += 1;
        }
    }
    bad as f64 / total as f64
}

/// Comparison slack for "error <= eps" on exact dyadic fractions.
const EPS_SLACK: f64 = 1e-9;

/// Exact certificate complexity C(f, x, eps): subsets are enumerated in
/// increasing size, and the first size admitting a certificate (with values
/// taken from x) is returned. Size d always succeeds with error 0.
pub fn exact_certificate_complexity(t: &TruthTable, x: &Instance, eps: f64) -> Result<usize> {
    check_cap("certificate search", CERTIFICATE_CAP, t.dimension)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid_param("eps", format!("{eps} is not in [0,1)")));
    }
    if x.dimension() != t.dimension {
        return Err(Error::DimensionMismatch {
            expected: t.dimension,
            got: x.dimension(),
        });
    }
    let d = t.dimension;
    let x_code = x.code();
    for size in 0..=d {
        for mask in subsets_of_size(d, size) {
            if precision_error_by_mask(t, x_code, mask) <= eps + EPS_SLACK {
                return Ok(size);
            }
        }
    }
    unreachable!("the full feature set is a 0-error certificate");
}

/// C(f, eps): the mean of C(f, x, eps) over all 2^d instances.
pub fn exact_avg_certificate_complexity(t: &TruthTable, eps: f64) -> Result<f64> {
    let d = t.dimension;
    let mut total = 0usize;
    for code in 0..1usize << d {
        total += exact_certificate_complexity(t, &Instance::from_code(code, d), eps)?;
    }
    Ok(total as f64 / (1u64 << d) as f64)
}

/// Iterates the size-k subsets of [0, d) as bit masks in increasing
/// numeric order (Gosper's hack).
fn subsets_of_size(d: usize, k: usize) -> impl Iterator<Item = usize> {
    let limit = 1usize << d;
    let mut next = if k == 0 { Some(0usize) } else { Some((1 << k) - 1) };
    std::iter::from_fn(move || {
        let cur = next?;
        if cur >= limit {
            return None;
        }
        next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur)
    })
}

/// The feature the exact greedy noise-stabilizing tree queries at node
/// alpha: argmax of the exact score over unrestricted features, ties broken
/// by lowest index.
pub fn exact_greedy_tree_query(t: &TruthTable, alpha: &Restriction, p: f64) -> Result<usize> {
    check_probability("p", p)?;
    let restricted = t.restrict_all(alpha)?;
    let mut best: Option<(usize, f64)> = None;
    for i in 0..t.dimension {
        if alpha.contains(i) {
            continue;
        }
        let score = exact_score(&restricted, i, p)?;
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((i, score)),
        }
    }
    best.map(|(i, _)| i).ok_or(Error::NoFreeFeature)
}
