use pivotcube::combinatorics::CountError;
use pivotcube::ingest::IngestError;
use thiserror::Error;

/// Everything the front ends can report, with a stable machine-readable code.
#[derive(Debug, Error)]
pub enum AppError {
    /// Malformed arguments or request syntax.
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Engine(#[from] pivotcube::Error),

    #[error(transparent)]
    Count(#[from] CountError),

    #[error(transparent)]
    Ingest(#[from] IngestError),

    #[error("no detail table named `{0}`")]
    UnknownDetail(String),

    #[error("address already in use: {0}")]
    PortInUse(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl AppError {
    pub fn code(&self) -> &'static str {
        use pivotcube::Error as E;
        match self {
            AppError::Usage(_) => "bad_request",
            AppError::Engine(e) => match e {
                E::UnknownDimension(_) => "unknown_dimension",
                E::DuplicateDimension(_) => "duplicate_dimension",
                E::ConfigUsesMeasure(_) => "config_uses_measure",
                E::EmptyKeepSet => "empty_keep_set",
                E::EmptyFilterClause(_) => "empty_filter_clause",
                E::UnknownDetailColumn { .. } => "unknown_detail_column",
                E::BadSubstringBounds { .. } | E::BadTransform => "bad_drill_rule",
                E::EmptyName => "empty_name",
                E::EmptySchema | E::SchemaMismatch { .. } | E::DetailArity { .. } => {
                    "schema_mismatch"
                }
                E::MeasureOverflow => "measure_overflow",
            },
            AppError::Count(CountError::OutOfRange(_)) => "out_of_range",
            AppError::Count(CountError::DuplicateDimension(_)) => "duplicate_dimension",
            AppError::Ingest(_) => "load_failure",
            AppError::UnknownDetail(_) => "unknown_detail",
            AppError::PortInUse(_) => "port_in_use",
            AppError::Io(_) => "io_error",
        }
    }

    /// Process exit code: 1 for usage errors, 2 for data errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            _ => 2,
        }
    }

    /// Faults the caller can fix by changing the request.
    pub fn is_caller_fault(&self) -> bool {
        !matches!(
            self,
            AppError::Ingest(_) | AppError::PortInUse(_) | AppError::Io(_)
        )
    }
}
