//! On-axis field of the multi-turn test coil.

use crate::constants::VACUUM_PERMEABILITY;
use crate::{Error, Result};

/// On-axis rms field of an N-turn loop of radius `radius_m` at axial
/// distance `axial_offset_m`, carrying `i_rms_amps`:
/// B = μ₀·I·N·r²/(2·(r² + z²)^{3/2}), T rms.
pub fn coil_field(radius_m: f64, turns: u32, axial_offset_m: f64, i_rms_amps: f64) -> Result<f64> {
    if !(radius_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coil radius must be positive, got {radius_m}"
        )));
    }
    let r2 = radius_m * radius_m;
    let z2 = axial_offset_m * axial_offset_m;
    Ok(VACUUM_PERMEABILITY * i_rms_amps * f64::from(turns) * r2 / (2.0 * (r2 + z2).powf(1.5)))
}
