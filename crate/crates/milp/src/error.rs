use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("row {row} references unknown column {column}")]
    UnknownColumn { row: usize, column: usize },
    #[error("column {column} has invalid bounds [{lower}, {upper}]")]
    BadBounds { column: usize, lower: f64, upper: f64 },
    #[error("non-finite value in {what}")]
    NonFinite { what: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("numerical failure in the simplex method: {0}")]
    NumericalFailure(String),
    #[error("enumeration too large: {integers} integer columns, {combinations} combinations (cap {cap})")]
    TooLarge {
        integers: usize,
        combinations: f64,
        cap: usize,
    },
}
