use std::path::PathBuf;

use thiserror::Error;

use crate::domain::{EventTag, Region};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("unknown paradigm `{0}`")]
    UnknownParadigm(String),
    #[error("unknown class label `{0}`")]
    UnknownClass(String),
    #[error("unknown condition `{0}`")]
    UnknownCondition(String),
    #[error("unknown region tag `{0}`")]
    UnknownRegion(String),
    #[error("malformed event tag `{0}` (expected <paradigm>/<class>/<condition>)")]
    MalformedEventTag(String),
    #[error("invalid band `{name}`: need 0 < low ({low_hz}) < high ({high_hz})")]
    InvalidBand { name: String, low_hz: f64, high_hz: f64 },
    #[error("band `{name}` upper edge {high_hz} Hz is not below Nyquist {nyquist} Hz")]
    BandAboveNyquist { name: String, high_hz: f64, nyquist: f64 },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing section [{0}]")]
    MissingSection(String),
    #[error("missing key `{key}` in section [{section}]")]
    MissingKey { section: String, key: String },
    #[error("invalid value for `{key}`: `{value}`")]
    InvalidValue { key: String, value: String },
    #[error("unsupported format: {0}")]
    Unsupported(String),
    #[error("data file holds {len} bytes, not a multiple of {frame} bytes per multiplexed frame")]
    Truncated { len: u64, frame: usize },
    #[error("invalid recording: {0}")]
    InvalidRecording(String),
    #[error("duplicate cell (trial {trial}, channel `{channel}`, sample {sample})")]
    DuplicateCell { trial: usize, channel: String, sample: usize },
    #[error("epoch table is incomplete: {0}")]
    MissingCells(String),
    #[error("montage references channel `{0}` absent from the recording")]
    UnknownChannel(String),
    #[error("montage assigns channel `{0}` twice")]
    DuplicateAssignment(String),
    #[error("region {region} has {count} channel(s); at least 2 are required")]
    RegionTooSmall { region: Region, count: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("no markers match {0}")]
    NoMatchingMarkers(EventTag),
    #[error("window [{start}, {end}) around marker at sample {marker} exceeds recording of {len} samples")]
    WindowOutOfBounds { marker: usize, start: i64, end: i64, len: usize },
    #[error("invalid epoch window: {0}")]
    InvalidWindow(String),
    #[error("shape violation: {0}")]
    Shape(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectivityError {
    #[error("PLV needs at least 2 trials, got {0}")]
    InsufficientTrials(usize),
    #[error("channel index {index} out of range for {channels} channels")]
    ChannelOutOfRange { index: usize, channels: usize },
    #[error("edge exclusion of {exclusion} samples leaves nothing of {samples}")]
    EdgeExclusionTooLarge { exclusion: usize, samples: usize },
    #[error("region pair {0}-{1} has no channel pairs")]
    EmptyRegion(Region, Region),
    #[error("montage covers {montage} channels but the matrix has {matrix}")]
    MontageMismatch { montage: usize, matrix: usize },
    #[error("invalid PLV matrix: {0}")]
    InvalidMatrix(String),
    #[error("missing cell for subject {subject}, column {column}")]
    MissingCell { subject: usize, column: usize },
    #[error("table has no subjects")]
    EmptyTable,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("differences have zero variance but nonzero mean {0}")]
    DegenerateVariance(f64),
    #[error("non-finite input value")]
    NonFinite,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("sampling rate {fs} Hz cannot carry {carrier_hz} Hz (Nyquist)")]
    Nyquist { carrier_hz: f64, fs: f64 },
    #[error("invalid concentration {0}")]
    InvalidKappa(f64),
    #[error("coupling {0}-{1} closes a cycle")]
    CouplingCycle(usize, usize),
    #[error("channel {index} out of range for {channels} channels")]
    ChannelOutOfRange { index: usize, channels: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Crate-level error, grouping module errors into data and numeric failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl Error {
    /// True for degenerate numerics (zero-variance differences and similar)
    /// as opposed to bad or missing input data.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Stats(StatsError::DegenerateVariance(_))
                | Error::Connectivity(ConnectivityError::Stats(StatsError::DegenerateVariance(_)))
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
