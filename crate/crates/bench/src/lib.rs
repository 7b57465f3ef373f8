//! Shared fixtures for the criterion benches.

use implicert_core::{BlackboxModel, Instance, TruthTable};

/// Two-feature parity over the last two coordinates.
pub fn parity_model(d: usize) -> BlackboxModel {
    BlackboxModel::parse(&format!("(xor x{} x{}) d={d}", d - 2, d - 1)).unwrap()
}

pub fn parity_table(d: usize) -> TruthTable {
    parity_model(d).to_truth_table().unwrap()
}

/// A fixed pseudo-random instance, stable across runs.
pub fn fixed_instance(d: usize) -> Instance {
    Instance::from_code(0x5a5a_5a5a & ((1 << d) - 1), d)
}
