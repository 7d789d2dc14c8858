use std::io;

use thiserror::Error;

/// Errors produced anywhere in the analysis stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("causal misalignment on side {side}: tau_valid = {tau_valid_s:e} s at t+{offset_s} s")]
    CausalMisalignment {
        side: char,
        offset_s: f64,
        tau_valid_s: f64,
    },

    #[error("validity window exhausted on side {side}: {min_valid_s:e} s does not cover buffer + set time")]
    WindowExhausted { side: char, min_valid_s: f64 },

    #[error("nonpositive parallax ({0} mas)")]
    NonpositiveParallax(f64),

    #[error("missing column `{0}` in catalogue header")]
    MissingColumn(String),

    #[error("catalogue has {} malformed row(s); first at line {}: {}", .0.len(), .0[0].line, .0[0].message)]
    MalformedRows(Vec<RowDiagnostic>),

    #[error("spectral grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no photons in band ({0})")]
    NoPhotonsInBand(&'static str),

    #[error("truncated time-tag record at byte {0}")]
    TruncatedRecord(usize),

    #[error("unknown {kind} code {code} at record {index}")]
    UnknownCode { kind: &'static str, code: u8, index: usize },

    #[error("no correlation peak in drift block starting at {block_start_ps} ps")]
    NoCorrelationPeak { block_start_ps: u64 },

    #[error("empty settings cell a{i}b{j}")]
    EmptyCell { i: usize, j: usize },

    #[error("zero total count")]
    ZeroTotal,

    #[error("degenerate setting marginals")]
    DegenerateMarginals,

    #[error("singular wrong-way system on side {0}: 1 - f12 - f21 = 0")]
    SingularSystem(char),

    #[error("negative stellar rate recovered on side {side}, port {port}: {rate} Hz")]
    NegativeStellarRate { side: char, port: usize, rate: f64 },

    #[error("fully predictable cell a{i}b{j} (epsilon = 1)")]
    FullyPredictable { i: usize, j: usize },

    #[error("inconsistent target tables: {0}")]
    InconsistentTables(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A malformed catalogue row, reported instead of silently dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct RowDiagnostic {
    pub line: u64,
    pub message: String,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
