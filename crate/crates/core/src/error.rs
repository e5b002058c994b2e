use thiserror::Error;

use crate::model::{Diagnostics, LinkId, NodeId};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid graph: {0}")]
    Invalid(Diagnostics),
    #[error("demand {id}: {reason}")]
    InvalidDemand { id: u64, reason: String },
    #[error("weight vector has {got} entries, graph has {expected} links")]
    WeightLength { expected: usize, got: usize },
    #[error("link {0} has weight 0; weights must be at least 1")]
    ZeroWeight(LinkId),
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Why a demand or segment could not be routed. Rejections are values, not
/// failures of the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoutingError {
    #[error("node {to} is unreachable from {from}")]
    Unreachable { from: NodeId, to: NodeId },
    #[error("no reachable node hosts chain position {position}")]
    NoHost { position: usize },
    #[error("traffic amount {0} is negative or not finite")]
    BadAmount(f64),
}
