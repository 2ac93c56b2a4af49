use thiserror::Error;

/// Errors produced by graph construction, analysis and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("vertex {vertex} out of range 1..={n}")]
    VertexOutOfRange { vertex: u64, n: u32 },

    #[error("vertex count mismatch: {left} vs {right}")]
    VertexCountMismatch { left: u32, right: u32 },

    #[error("invalid edge ({i}, {j}): {reason}")]
    InvalidEdge { i: u32, j: u32, reason: &'static str },

    #[error("weight tables disagree on edge ({i}, {j}): {left} vs {right}")]
    WeightConflict { i: u32, j: u32, left: f64, right: f64 },

    #[error("blocks overlap: [{a_lo}, {a_hi}] and [{b_lo}, {b_hi}]")]
    OverlappingBlocks { a_lo: u32, a_hi: u32, b_lo: u32, b_hi: u32 },

    #[error("duplicate points at indices {0:?}")]
    DuplicatePoints(Vec<(usize, usize)>),

    #[error("coordinate {value} of point {index} outside [0, 1)")]
    CoordinateOutOfRange { index: usize, value: f64 },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(name, format!("{p} is not in [0, 1]")))
    }
}
