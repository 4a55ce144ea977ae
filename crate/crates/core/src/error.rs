use thiserror::Error;

/// Errors produced by lattice arithmetic, table lookups and fiber checks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("divisor classes live on different surfaces: {a} vs {b}")]
    SurfaceMismatch { a: String, b: String },

    #[error("coefficient vector for {surface} has length {got}, expected {want}")]
    CoefficientLength {
        surface: String,
        got: usize,
        want: usize,
    },

    #[error("boundary curve `{label}` is not a nonzero effective class on {surface}")]
    NonEffectiveBoundary { label: String, surface: String },

    #[error("boundary labels are not pairwise distinct: `{label}` repeats")]
    DuplicateBoundaryLabel { label: String },

    #[error("invalid parameters for case {case}: {reason}")]
    InvalidParams { case: String, reason: String },

    #[error("case {case} has no slot {slot}")]
    InvalidSlot { case: String, slot: String },

    #[error("operation requires fiber dimension {want}, this fiber has dimension {got}")]
    WrongFiberDimension { want: u8, got: u8 },

    #[error("fiber refers to unknown component `{id}`")]
    UnknownComponent { id: String },

    #[error("double locus `{id}` is missing data: {what}")]
    MissingLocusData { id: String, what: String },

    #[error("missing restriction data for the pair of components `{a}` and `{b}`")]
    MissingRestriction { a: String, b: String },

    #[error("identification `{identification}` is not a lattice isometry of {surface}")]
    BadIdentification {
        identification: String,
        surface: String,
    },

    #[error("fiber failed validation:\n{report}")]
    InvalidFiber { report: String },

    #[error(
        "flag degeneration is defined for 1 <= dim <= 3 and 0 <= k <= dim, got dim={dim}, k={k}"
    )]
    FlagOutOfRange { dim: u8, k: u8 },
}

pub type Result<T> = std::result::Result<T, Error>;
