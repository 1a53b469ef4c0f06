//! Error type shared across the simulation pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SensingError>;

#[derive(Debug, Clone, Error)]
pub enum SensingError {
    /// A sensing object sits on top of a station, leaving bearings undefined.
    #[error("object coincides with a station position")]
    ObjectAtStation,

    /// A propagation distance collapsed to zero, so path loss is undefined.
    #[error("degenerate geometry: zero propagation distance")]
    DegenerateGeometry,

    /// Peak search found nothing above threshold. The caller decides whether
    /// that means "no object present" or a fault.
    #[error("no peaks above detection threshold")]
    NoPeaks,

    /// A bistatic range at or below the tx-rx baseline has no ellipse solution.
    #[error("bistatic range {range:.3} m does not exceed the {baseline:.3} m baseline")]
    InsideBaseline { range: f64, baseline: f64 },

    /// The velocity system matrix is too ill-conditioned to invert.
    #[error("singular geometry: condition number {0:.3e} exceeds 1e8")]
    SingularGeometry(f64),

    /// Invalid or inconsistent configuration.
    #[error("config error: {0}")]
    Config(String),

    /// File or serialization failure while running an experiment.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SensingError {
    fn from(e: std::io::Error) -> Self {
        SensingError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SensingError {
    fn from(e: serde_json::Error) -> Self {
        // serde_json errors carry line/column context; keep it verbatim.
        SensingError::Config(e.to_string())
    }
}
