use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by schema construction and the OLAP operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("schema has no dimensions")]
    EmptySchema,

    #[error("identifier must not be empty")]
    EmptyName,

    #[error("duplicate dimension `{0}`")]
    DuplicateDimension(String),

    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),

    #[error("row {row}: {reason}")]
    SchemaMismatch { row: usize, reason: String },

    #[error("sum of absolute measure values exceeds the 64-bit range")]
    MeasureOverflow,

    #[error("roll-up needs at least one dimension to keep")]
    EmptyKeepSet,

    #[error("measure `{0}` cannot be used as a pivot axis")]
    ConfigUsesMeasure(String),

    #[error("filter clause for `{0}` has no values")]
    EmptyFilterClause(String),

    #[error("detail table `{table}` has no column `{column}`")]
    UnknownDetailColumn { table: String, column: String },

    #[error("substring bounds must be positive (start {start}, length {len})")]
    BadSubstringBounds { start: usize, len: usize },

    #[error("take_right length must be positive")]
    BadTransform,

    #[error("detail table `{table}` row {row} has {found} values, expected {expected}")]
    DetailArity {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
}
