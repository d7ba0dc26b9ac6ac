//! Desk-scale simulator and analysis toolkit for an ensemble NV-diamond
//! magnetometer.
//!
//! The crate is organized around the signal chain of a pulsed NV
//! magnetometer:
//!
//! * [`spin`] — NV ground-state Zeeman resonances for the four
//!   crystallographic classes and P1-center transition frequencies by exact
//!   diagonalization.
//! * [`sequence`] — pulse-sequence definitions (pulsed ODMR, Ramsey/FID,
//!   Hahn echo, contrast), phase-modulation schedules, accumulated
//!   interferometer phase, and Monte-Carlo shot generation.
//! * [`detector`] — the photon-to-voltage path: shot noise on an
//!   integrating balanced photodetector, instrumentation gain, digitizer
//!   noise.
//! * [`analysis`] — amplitude spectral densities, rms averaging,
//!   median-based minimum-sensitivity estimation, test-field calibration,
//!   and decaying-sinusoid fits.
//! * [`budget`] — closed-form sensitivity and figure-of-merit calculators.
//!
//! All quantities are SI (tesla, second, hertz, volt, ampere, farad) unless
//! a name says otherwise. Sensitivities follow the rms-field, double-sided
//! spectral-bin convention; the single-sided convention differs by sqrt(2).

// `!(x > 0.0)` guards reject NaN along with nonpositive values; the
// positively-phrased comparison would wave NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod budget;
pub mod constants;
pub mod detector;
pub mod error;
pub mod rng;
pub mod sequence;
pub mod spin;

pub use error::{Error, Result};
