//! Ideal (noise-free) normalized fluorescence signals.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Ensemble response parameters entering the fringe model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnsembleResponse {
    /// Measurement contrast C.
    pub contrast: f64,
    /// Relative initialization efficiency per initialization pulse.
    pub init_efficiency: f64,
    /// T2* or T2 for the protocol in use, s.
    pub decay_time_s: f64,
    /// Stretched-exponential exponent p.
    pub stretch_exponent: f64,
    /// Mean normalized fluorescence level.
    pub mean_level: f64,
}

impl Default for EnsembleResponse {
    fn default() -> Self {
        Self {
            contrast: 0.0334,
            init_efficiency: 0.980,
            decay_time_s: 28.6e-6,
            stretch_exponent: 1.0,
            mean_level: 1.0,
        }
    }
}

impl EnsembleResponse {
    pub fn validate(&self) -> Result<()> {
        if !(self.contrast > 0.0 && self.contrast < 1.0) && self.contrast != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "contrast must be in [0, 1), got {}",
                self.contrast
            )));
        }
        if !(self.init_efficiency > 0.0 && self.init_efficiency <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "initialization efficiency must be in (0, 1], got {}",
                self.init_efficiency
            )));
        }
        if !(self.decay_time_s > 0.0) {
            return Err(Error::InvalidParameter(
                "decay time must be positive".into(),
            ));
        }
        if !(self.stretch_exponent > 0.0) {
            return Err(Error::InvalidParameter(
                "stretch exponent must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Contrast attenuated by the decay envelope at precession time τ:
    /// C·exp(−(τ/T)^p).
    pub fn effective_contrast(&self, tau_s: f64) -> f64 {
        self.contrast * (-(tau_s / self.decay_time_s).powf(self.stretch_exponent)).exp()
    }
}

/// Normalized fluorescence for one shot at interferometer phase φ:
/// S = S_mean·(1 + C_eff·cos φ), bright at φ = 0.
pub fn ideal_shot_signal(phase: f64, response: &EnsembleResponse, tau_s: f64) -> f64 {
    response.mean_level * (1.0 + response.effective_contrast(tau_s) * phase.cos())
}

/// The four normalized readings (S1, S2, S3, S4) of the contrast sequence.
///
/// S1–S3 follow progressive optical initialization converging geometrically
/// with per-sequence efficiency κ_I (S3 normalized to 1); S4 applies a SQ π
/// pulse before readout. By construction (S1−S4)/(S1+S4) returns the model
/// contrast and (S1−S4)/(S3−S4) returns κ_I.
pub fn contrast_sequence_signals(response: &EnsembleResponse) -> Result<[f64; 4]> {
    response.validate()?;
    let c = response.contrast;
    let k = response.init_efficiency;
    let s3 = 1.0;
    if c == 0.0 {
        return Ok([s3, s3, s3, s3]);
    }
    // s1 solves C=(s1−s4)/(s1+s4), κ_I=(s1−s4)/(s3−s4), s4=s1(1−C)/(1+C)
    let s1 = k * (1.0 + c) / (2.0 * c + k * (1.0 - c));
    let s2 = s3 - (s3 - s1) * (1.0 - k);
    let s4 = s1 * (1.0 - c) / (1.0 + c);
    Ok([s1, s2, s3, s4])
}
