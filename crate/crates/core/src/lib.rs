//! Certification engine for blackbox Boolean classifiers.
//!
//! Given query access to a model f and an instance x, the certifier finds a
//! small set of features that pins down f(x) with high probability, by
//! implicitly navigating a greedy noise-stabilizing decision tree and
//! statistically verifying the resulting path. Exact brute-force oracles at
//! small dimension back every estimate.

pub mod baseline;
pub mod certifier;
pub mod error;
pub mod estimators;
pub mod model;
pub mod oracles;
pub mod tree;

pub use crate::certifier::{
    certify_batch, find_certificate, verify_certificate, Bottom, Certificate, CertifierConfig,
    CertifyOutcome, DepthBudget,
};
pub use crate::error::{Error, Result};
pub use crate::model::{BlackboxModel, Instance, ModelExpr, QueryCounter, Restriction, Sign};
pub use crate::oracles::TruthTable;
pub use crate::tree::{ImplicitTree, ScoreMode, TreeParams};
