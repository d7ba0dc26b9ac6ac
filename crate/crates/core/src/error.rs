//! Crate error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Pulse-sequence timing inconsistent with the requested repetition rate.
    #[error("sequence timing: {0}")]
    SequenceTiming(String),

    /// Secular approximation violated beyond the configured hard limit.
    #[error("secular approximation violated: estimated shift {shift_hz:.3e} Hz exceeds {limit_hz:.3e} Hz")]
    SecularViolation { shift_hz: f64, limit_hz: f64 },

    /// Spectra with different bin grids cannot be combined.
    #[error("ASD grid mismatch: {0}")]
    GridMismatch(String),

    /// The requested calibration bin is absent or is not a local maximum.
    #[error("calibration bin: {0}")]
    CalibrationBin(String),

    /// Nonlinear fit failed to converge within the iteration/restart budget.
    #[error("fit did not converge: {0}")]
    FitDidNotConverge(String),

    /// 1-D minimization failed to bracket an interior minimum.
    #[error("minimization failed: {0}")]
    MinimizationFailed(String),

    /// Band or frequency selection outside the spectrum.
    #[error("band selection: {0}")]
    BandSelection(String),
}
