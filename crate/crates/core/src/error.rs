use thiserror::Error;

use crate::multi::SubsetLabel;
use crate::operator::DefectReport;
use crate::wold::WoldResiduals;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("subspace is not contained in the minuend (principal angle {angle:.3e})")]
    Containment { angle: f64 },

    #[error("subspace is not invariant under the operator (defect {defect:.3e})")]
    NotInvariant { defect: f64 },

    #[error("numerical inconsistency in {what}: dims {left} vs {right}, max principal angle {angle:.3e}")]
    Consistency {
        what: String,
        left: usize,
        right: usize,
        angle: f64,
    },

    #[error("tuple rejected: {reason}")]
    Rejected { reason: String, defects: Box<DefectReport> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("Wold decomposition check `{check}` failed: {value:.3e} > {tolerance:.3e}")]
    Wold {
        check: &'static str,
        value: f64,
        tolerance: f64,
        residuals: Box<WoldResiduals>,
    },

    #[error("decomposition check `{check}` failed{}: {value:.3e} > {tolerance:.3e}", label_suffix(.label))]
    Block {
        label: Option<SubsetLabel>,
        check: String,
        value: f64,
        tolerance: f64,
    },

    /// An error raised inside a recursive decomposition, tagged with the branch it came from.
    #[error("at {path}: {source}")]
    Path {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("ambient dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
}

fn label_suffix(label: &Option<SubsetLabel>) -> String {
    match label {
        Some(l) => format!(" on block {l}"),
        None => String::new(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
