pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabError {
    #[error("line {line}: {reason}")]
    FormatError { line: usize, reason: String },
    #[error("line {line}: channel indices must be strictly increasing")]
    NonMonotonicChannels { line: usize },
    #[error("line {line}: counts must not be negative")]
    NegativeCount { line: usize },
    #[error("live time must be a positive number of seconds")]
    InvalidLiveTime,
    #[error("window lower bound exceeds upper bound")]
    InvalidWindow,
    #[error("window selects no channels")]
    EmptyWindow,
    #[error("background shares no channels with the window")]
    IncompatibleBackground,
    #[error("spectrum has no energy calibration; use a channel window")]
    MissingEnergyCalibration,
    #[error("{0}")]
    DomainError(String),
    #[error("need at least 3 points, got {0}")]
    InsufficientPoints(usize),
    #[error("need at least 2 distinct thicknesses")]
    DegenerateDesign,
    #[error("point {index}: {reason}")]
    InvalidPoint { index: usize, reason: String },
    #[error("{0}")]
    InvalidArgument(String),
}

impl LabError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            LabError::FormatError { .. } => "format_error",
            LabError::NonMonotonicChannels { .. } => "non_monotonic_channels",
            LabError::NegativeCount { .. } => "negative_count",
            LabError::InvalidLiveTime => "invalid_live_time",
            LabError::InvalidWindow => "invalid_window",
            LabError::EmptyWindow => "empty_window",
            LabError::IncompatibleBackground => "incompatible_background",
            LabError::MissingEnergyCalibration => "missing_energy_calibration",
            LabError::DomainError(_) => "domain_error",
            LabError::InsufficientPoints(_) => "insufficient_points",
            LabError::DegenerateDesign => "degenerate_design",
            LabError::InvalidPoint { .. } => "invalid_point",
            LabError::InvalidArgument(_) => "invalid_argument",
        }
    }

    /// Offending line of an input file, if the error has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            LabError::FormatError { line, .. }
            | LabError::NonMonotonicChannels { line }
            | LabError::NegativeCount { line } => Some(*line),
            _ => None,
        }
    }
}
