//! Instances, restrictions and query-counted blackbox models.
//!
//! Features and labels live in {-1,+1} so that xor is the product of signs
//! and leaf labels are `sign(E[f])`. CLI bitstrings map '0' to -1 and '1'
//! to +1, index 0 leftmost.

mod expr;
mod parse;

pub use expr::{Expr, ModelExpr, TableBits};

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::oracles::TruthTable;

/// A Boolean sign, the value of one feature or one label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    /// +1.0 or -1.0.
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    /// `true` maps to +1.
    pub fn from_bool(b: bool) -> Sign {
        if b {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    /// Sign of a mean; an exact zero resolves to +1.
    pub fn from_mean(v: f64) -> Sign {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        self.flip()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Minus => write!(f, "-1"),
            Sign::Plus => write!(f, "+1"),
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.as_i8())
    }
}

/// A point of the d-dimensional Boolean hypercube.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    bits: Vec<Sign>,
}

impl Instance {
    pub fn new(bits: Vec<Sign>) -> Instance {
        Instance { bits }
    }

    /// All coordinates set to `s`.
    pub fn constant(dimension: usize, s: Sign) -> Instance {
        Instance {
            bits: vec![s; dimension],
        }
    }

    /// Parses the wire format: a '0'/'1' string, index 0 leftmost, '1' is +1.
    pub fn parse_bitstring(s: &str) -> Result<Instance> {
        let mut bits = Vec::with_capacity(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => bits.push(Sign::Minus),
                '1' => bits.push(Sign::Plus),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "invalid character '{other}' at position {i} in instance string"
                    )))
                }
            }
        }
        if bits.is_empty() {
            return Err(Error::InvalidInput("empty instance string".into()));
        }
        Ok(Instance { bits })
    }

    pub fn to_bitstring(&self) -> String {
        self.bits
            .iter()
            .map(|s| if s.is_plus() { '1' } else { '0' })
            .collect()
    }

    /// Decodes an instance from its truth-table code: bit i of `code` is 1
    /// iff feature i is +1, so the all-+1 corner has the highest code.
    pub fn from_code(code: usize, dimension: usize) -> Instance {
        let bits = (0..dimension)
            .map(|i| Sign::from_bool((code >> i) & 1 == 1))
            .collect();
        Instance { bits }
    }

    /// Inverse of [`Instance::from_code`].
    pub fn code(&self) -> usize {
        debug_assert!(self.dimension() <= usize::BITS as usize);
        self.bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, s)| acc | ((s.is_plus() as usize) << i))
    }

    pub fn dimension(&self) -> usize {
        self.bits.len()
    }

    pub fn get(&self, i: usize) -> Sign {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, s: Sign) {
        self.bits[i] = s;
    }

    pub fn bits(&self) -> &[Sign] {
        &self.bits
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bitstring())
    }
}

/// A partial assignment of features: tree-node identifier and certificate
/// content. Keeps insertion (root-to-node) order; the canonical encoding is
/// sorted by feature index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Restriction {
    assignments: Vec<(usize, Sign)>,
}

impl Serialize for Restriction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Assignment {
            feature: usize,
            value: i8,
        }
        serializer.collect_seq(self.assignments.iter().map(|&(i, s)| Assignment {
            feature: i,
            value: s.as_i8(),
        }))
    }
}

impl Restriction {
    pub fn new() -> Restriction {
        Restriction::default()
    }

    /// Builds from pairs, rejecting duplicate indices.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Sign)>) -> Result<Restriction> {
        let mut r = Restriction::new();
        for (i, s) in pairs {
            r.push(i, s)?;
        }
        Ok(r)
    }

    /// Appends one assignment, preserving insertion order.
    pub fn push(&mut self, feature: usize, value: Sign) -> Result<()> {
        if self.contains(feature) {
            return Err(Error::DuplicateFeature(feature));
        }
        self.assignments.push((feature, value));
        Ok(())
    }

    /// A copy extended by one assignment.
    pub fn extended(&self, feature: usize, value: Sign) -> Result<Restriction> {
        let mut r = self.clone();
        r.push(feature, value)?;
        Ok(r)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn contains(&self, feature: usize) -> bool {
        self.assignments.iter().any(|&(i, _)| i == feature)
    }

    pub fn get(&self, feature: usize) -> Option<Sign> {
        self.assignments
            .iter()
            .find(|&&(i, _)| i == feature)
            .map(|&(_, s)| s)
    }

    /// Assignments in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Sign)> + '_ {
        self.assignments.iter().copied()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignments.iter().map(|&(i, _)| i)
    }

    /// Sorted-by-index encoding; unique per assignment set.
    pub fn canonical(&self) -> Vec<(usize, Sign)> {
        let mut v = self.assignments.clone();
        v.sort_unstable_by_key(|&(i, _)| i);
        v
    }

    pub fn max_index(&self) -> Option<usize> {
        self.assignments.iter().map(|&(i, _)| i).max()
    }

    /// True when every assigned value matches the instance.
    pub fn agrees_with(&self, x: &Instance) -> bool {
        self.assignments
            .iter()
            .all(|&(i, s)| i < x.dimension() && x.get(i) == s)
    }

    /// Overwrites the restricted coordinates of `x` in place.
    pub fn apply_to(&self, x: &mut Instance) {
        for &(i, s) in &self.assignments {
            x.set(i, s);
        }
    }

    /// Union of two restrictions with disjoint index sets.
    pub fn union(&self, other: &Restriction) -> Result<Restriction> {
        let mut r = self.clone();
        for (i, s) in other.iter() {
            r.push(i, s)?;
        }
        Ok(r)
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (i, s)) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "x{i}={s}")?;
        }
        write!(f, "}}")
    }
}

/// Monotone count of `evaluate` calls; shared between a model and all of its
/// restricted views, safe to bump from many workers.
#[derive(Debug, Clone, Default)]
pub struct QueryCounter(Arc<AtomicU64>);

impl QueryCounter {
    pub fn new() -> QueryCounter {
        QueryCounter::default()
    }

    pub fn count(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    /// Reset only between jobs.
    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }

    fn record(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }
}

#[derive(Debug)]
enum Backend {
    Expr(ModelExpr),
    Table(TruthTable),
    Restricted {
        parent: Arc<Backend>,
        restriction: Restriction,
    },
}

impl Backend {
    fn dimension(&self) -> usize {
        match self {
            Backend::Expr(e) => e.dimension(),
            Backend::Table(t) => t.dimension(),
            Backend::Restricted { parent, .. } => parent.dimension(),
        }
    }

    /// Uncounted evaluation.
    fn eval(&self, x: &Instance) -> Sign {
        match self {
            Backend::Expr(e) => e.evaluate_unchecked(x),
            Backend::Table(t) => t.label_at(x),
            Backend::Restricted {
                parent,
                restriction,
            } => {
                let mut spliced = x.clone();
                restriction.apply_to(&mut spliced);
                parent.eval(&spliced)
            }
        }
    }
}

/// Query access to f: bits^d -> bits, with query accounting.
///
/// Cloning shares the underlying function and the counter. Restricted views
/// keep dimension d: the restricted coordinates are overridden, not removed,
/// so feature indices stay stable along a tree path.
#[derive(Debug, Clone)]
pub struct BlackboxModel {
    backend: Arc<Backend>,
    counter: QueryCounter,
}

impl BlackboxModel {
    pub fn from_expr(expr: ModelExpr) -> BlackboxModel {
        BlackboxModel {
            backend: Arc::new(Backend::Expr(expr)),
            counter: QueryCounter::new(),
        }
    }

    pub fn from_table(table: TruthTable) -> BlackboxModel {
        BlackboxModel {
            backend: Arc::new(Backend::Table(table)),
            counter: QueryCounter::new(),
        }
    }

    /// Parses the model DSL and wraps the result.
    pub fn parse(text: &str) -> Result<BlackboxModel> {
        Ok(BlackboxModel::from_expr(ModelExpr::parse(text)?))
    }

    pub fn dimension(&self) -> usize {
        self.backend.dimension()
    }

    /// One counted query.
    pub fn evaluate(&self, x: &Instance) -> Result<Sign> {
        if x.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: x.dimension(),
            });
        }
        self.counter.record();
        Ok(self.backend.eval(x))
    }

    /// The restricted view f_alpha. Queries are delegated to the parent with
    /// alpha's values spliced in; the same counter keeps counting.
    pub fn restrict(&self, alpha: &Restriction) -> Result<BlackboxModel> {
        if let Some(max) = alpha.max_index() {
            if max >= self.dimension() {
                return Err(Error::VariableOutOfRange {
                    index: max,
                    dimension: self.dimension(),
                });
            }
        }
        Ok(BlackboxModel {
            backend: Arc::new(Backend::Restricted {
                parent: Arc::clone(&self.backend),
                restriction: alpha.clone(),
            }),
            counter: self.counter.clone(),
        })
    }

    pub fn counter(&self) -> &QueryCounter {
        &self.counter
    }

    pub fn queries(&self) -> u64 {
        self.counter.count()
    }

    /// Materializes the full truth table by uncounted evaluation; this is
    /// the escape hatch for the exact-oracle modes, not a query-access path.
    pub fn to_truth_table(&self) -> Result<TruthTable> {
        let d = self.dimension();
        TruthTable::from_fn(d, |x| self.backend.eval(x))
    }
}
