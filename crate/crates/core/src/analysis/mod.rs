//! Measurement pipeline: amplitude spectral densities, rms averaging,
//! median-based minimum sensitivity, calibration, and curve fitting.

mod asd;
mod coil;
mod fit;

pub use asd::{
    asd, calibrate_asd, final_fraction_band, median_correction_alpha, min_sensitivity, notch,
    rms_average, Asd, MinSensMode, Sidedness, MEDIAN_CORRECTION_ALPHA,
};
pub use coil::coil_field;
pub use fit::{
    envelope_t2star, fit_decaying_sinusoid, fit_fringe_scan, DecayFit, EnvelopeEstimate,
    FringeScanFit,
};
