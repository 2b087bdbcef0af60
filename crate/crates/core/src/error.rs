use alloc::string::String;

use crate::tree_layout::NodeLabel;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resource limit exceeded: {total} qubits requested, limit is {limit}")]
    ResourceLimit { total: u64, limit: u64 },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("shape mismatch for leaf {leaf}: expected dimension {expected}, found {found}")]
    Shape {
        leaf: NodeLabel,
        expected: usize,
        found: usize,
    },

    #[error("matrix for leaf {leaf} is not unitary (max deviation {deviation:e})")]
    NotUnitary { leaf: NodeLabel, deviation: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("state not normalized: norm² = {0}")]
    NotNormalized(f64),
}
