//! Spin model: NV ground-state Zeeman resonances for all four
//! crystallographic classes and P1-center transitions by exact
//! diagonalization.

mod nv;
mod p1;

pub use nv::{
    linewidth_to_t2star, nv_axis_projections, nv_resonances, nv_resonances_with_limits,
    odmr_spectrum, ElectronTransition, NuclearSpin, NvLine, ResonanceSet, SECULAR_ERROR_HZ,
    SECULAR_WARN_HZ,
};
pub use p1::{p1_eigenvalues, p1_hamiltonian, p1_transitions, P1Transition};

use crate::constants::{NV_GYROMAGNETIC, TESLA_PER_GAUSS};
use serde::{Deserialize, Serialize};

/// The four ⟨111⟩ unit vectors of the diamond cube frame. These serve both
/// as NV symmetry axes and as P1 Jahn-Teller distortion axes.
pub const AXES_111: [[f64; 3]; 4] = {
    const S: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)
    [[S, S, S], [S, -S, -S], [-S, S, -S], [-S, -S, S]]
};

/// NV ground-state constants.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NvConstants {
    /// Zero-field splitting, Hz.
    pub zero_field_splitting_hz: f64,
    /// Temperature coefficient of the zero-field splitting, Hz/K.
    pub zfs_temp_coeff_hz_per_k: f64,
    /// Electron gyromagnetic ratio, rad·s⁻¹·T⁻¹.
    pub gyromagnetic_rad_per_s_tesla: f64,
    /// 15NV axial hyperfine splitting, Hz.
    pub hyperfine_15n_hz: f64,
}

impl Default for NvConstants {
    fn default() -> Self {
        Self {
            zero_field_splitting_hz: 2.870e9,
            zfs_temp_coeff_hz_per_k: -74e3,
            gyromagnetic_rad_per_s_tesla: NV_GYROMAGNETIC,
            hyperfine_15n_hz: 3.0e6,
        }
    }
}

impl NvConstants {
    pub fn validate(&self) -> crate::Result<()> {
        let all_finite = self.zero_field_splitting_hz.is_finite()
            && self.zfs_temp_coeff_hz_per_k.is_finite()
            && self.gyromagnetic_rad_per_s_tesla.is_finite()
            && self.hyperfine_15n_hz.is_finite();
        if !all_finite
            || self.zero_field_splitting_hz <= 0.0
            || self.gyromagnetic_rad_per_s_tesla <= 0.0
        {
            return Err(crate::Error::InvalidParameter(
                "NV constants must be finite with D > 0 and gamma_e > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Substitutional-nitrogen (P1) constants. The g-factor is isotropic and the
/// hyperfine tensor is axial about the Jahn-Teller axis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct P1Constants {
    /// Axial hyperfine coupling, Hz.
    pub a_parallel_hz: f64,
    /// Transverse hyperfine coupling, Hz.
    pub a_perp_hz: f64,
    /// Electron Zeeman scale g·μ_B/h, Hz/T.
    pub zeeman_hz_per_tesla: f64,
}

impl Default for P1Constants {
    fn default() -> Self {
        Self {
            a_parallel_hz: -159.7e6,
            a_perp_hz: -113.83e6,
            zeeman_hz_per_tesla: 2.8e6 / TESLA_PER_GAUSS, // 2.8 MHz/G
        }
    }
}

impl P1Constants {
    pub fn validate(&self) -> crate::Result<()> {
        if self.a_parallel_hz == 0.0 || self.a_perp_hz == 0.0 {
            return Err(crate::Error::InvalidParameter(
                "P1 hyperfine couplings must be nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Static magnetic field vector in the diamond cube frame.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BiasField {
    pub vector_tesla: [f64; 3],
}

impl BiasField {
    pub fn new(vector_tesla: [f64; 3]) -> Self {
        Self { vector_tesla }
    }

    /// Field of given magnitude along [100].
    pub fn along_100(magnitude_tesla: f64) -> Self {
        Self::new([magnitude_tesla, 0.0, 0.0])
    }

    /// Euclidean magnitude, T.
    pub fn magnitude(&self) -> f64 {
        let [x, y, z] = self.vector_tesla;
        (x * x + y * y + z * z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.vector_tesla.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
