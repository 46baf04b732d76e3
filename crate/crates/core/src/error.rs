use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine reports. [`Error::code`] gives the stable,
/// machine-readable name used on the wire.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{file}:{line}: column `{column}`: {reason}")]
    MalformedRow {
        file: String,
        line: u64,
        column: String,
        reason: String,
    },
    #[error("{file}:{line}: column `{column}`: gap in calendar, expected {expected} but found {found}")]
    GapInCalendar {
        file: String,
        line: u64,
        column: String,
        expected: String,
        found: String,
    },
    #[error("{file}:{line}: column `{column}`: capacity factor {value} outside [0, 1]")]
    OutOfRange {
        file: String,
        line: u64,
        column: String,
        value: f64,
    },
    #[error("{file}:{line}: column `{column}`: duplicate timestamp {timestamp}")]
    DuplicateTimestamp {
        file: String,
        line: u64,
        column: String,
        timestamp: String,
    },
    #[error("{file}:{line}: column `{column}`: date {date} does not follow {previous}")]
    NonMonotoneDates {
        file: String,
        line: u64,
        column: String,
        date: String,
        previous: String,
    },
    #[error("{file}:{line}: column `{column}`: duplicate day {date} for country {country}")]
    DuplicateDayForCountry {
        file: String,
        line: u64,
        column: String,
        date: String,
        country: String,
    },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },

    #[error("invalid snapshot: {0}")]
    InvalidSnapshot(String),
    #[error("snapshot version mismatch: {0}")]
    VersionMismatch(String),
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),

    #[error("invalid country code `{0}`")]
    InvalidCountryCode(String),
    #[error("unknown country `{0}`")]
    UnknownCountry(String),
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("no solar series for {0} but solar weight is positive")]
    MissingSolar(String),
    #[error("time filter selects no units")]
    EmptyFilter,
    #[error("year {year} outside the covered years {first}..={last}")]
    YearOutOfRange { year: i32, first: i32, last: i32 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("at least 3 samples are required, got {0}")]
    InsufficientSamples(usize),

    #[error("unknown climate index `{0}`")]
    UnknownIndex(String),
    #[error("climate index `{name}` has no data in {year}")]
    IndexYearMissing { name: String, year: i32 },
    #[error("no price data for {country} in {year}")]
    NoPriceData { country: String, year: i32 },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedRow { .. } => "MalformedRow",
            Error::GapInCalendar { .. } => "GapInCalendar",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::DuplicateTimestamp { .. } => "DuplicateTimestamp",
            Error::NonMonotoneDates { .. } => "NonMonotoneDates",
            Error::DuplicateDayForCountry { .. } => "DuplicateDayForCountry",
            Error::Io { .. } => "Io",
            Error::InvalidSnapshot(_) => "InvalidSnapshot",
            Error::VersionMismatch(_) => "VersionMismatch",
            Error::CorruptSnapshot(_) => "CorruptSnapshot",
            Error::InvalidCountryCode(_) | Error::BadParam(_) => "BadParam",
            Error::UnknownCountry(_) => "UnknownCountry",
            Error::MissingSolar(_) => "MissingSolar",
            Error::EmptyFilter => "EmptyFilter",
            Error::YearOutOfRange { .. } => "YearOutOfRange",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::InsufficientSamples(_) => "InsufficientSamples",
            Error::UnknownIndex(_) => "UnknownIndex",
            Error::IndexYearMissing { .. } => "IndexYearMissing",
            Error::NoPriceData { .. } => "NoPriceData",
        }
    }

    /// True for errors caused by input files or snapshot contents rather than
    /// by query parameters.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedRow { .. }
                | Error::GapInCalendar { .. }
                | Error::OutOfRange { .. }
                | Error::DuplicateTimestamp { .. }
                | Error::NonMonotoneDates { .. }
                | Error::DuplicateDayForCountry { .. }
                | Error::Io { .. }
                | Error::InvalidSnapshot(_)
                | Error::VersionMismatch(_)
                | Error::CorruptSnapshot(_)
        )
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            reason: err.to_string(),
        }
    }
}
