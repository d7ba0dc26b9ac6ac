//! Closed-form sensitivity and figure-of-merit calculators.
//!
//! Sensitivities follow the rms-field, double-sided-bin convention; the
//! single-sided convention differs by sqrt(2). The spin-projection prefactor
//! ħ/(Δm_s·g_e·μ_B) is evaluated as 1/(Δm_s·γ_e) with γ_e = 2π × 28.0 GHz/T.

use crate::constants::NV_GYROMAGNETIC;
use crate::sequence::{Basis, Timings};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Inputs to the sensitivity calculators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BudgetInputs {
    /// 1 (SQ) or 2 (DQ).
    pub delta_ms: f64,
    /// Measurement contrast C.
    pub contrast: f64,
    /// T2* (Ramsey) or T2 (Hahn), s.
    pub decay_time_s: f64,
    /// Stretched-exponential exponent p.
    pub stretch_exponent: f64,
    /// Photons detected per measurement, 𝒩 = N·n_avg.
    pub photons_per_measurement: f64,
    pub timings: Timings,
    /// Geometric projection factor F_pro (1/sqrt(3) for [100] geometry).
    pub projection: f64,
    /// Photons per NV per measurement (full sensitivity form only).
    pub photons_per_nv: Option<f64>,
    /// Interrogated NV count (full sensitivity form only).
    pub nv_count: Option<f64>,
}

impl BudgetInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_ms > 0.0) {
            return Err(Error::InvalidParameter("delta_ms must be positive".into()));
        }
        if !(self.projection > 0.0 && self.projection <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "projection factor must be in (0, 1], got {}",
                self.projection
            )));
        }
        if let (Some(n_avg), Some(n_nv)) = (self.photons_per_nv, self.nv_count) {
            let implied = n_avg * n_nv;
            if self.photons_per_measurement > 0.0
                && (implied / self.photons_per_measurement - 1.0).abs() > 1e-6
            {
                return Err(Error::InvalidParameter(format!(
                    "N_nv x n_avg = {implied:.3e} disagrees with photons_per_measurement {:.3e}",
                    self.photons_per_measurement
                )));
            }
        }
        Ok(())
    }

    fn envelope(&self, tau_s: f64) -> f64 {
        (-(tau_s / self.decay_time_s).powf(self.stretch_exponent)).exp()
    }
}

/// Full Ramsey sensitivity with explicit spin-projection, dephasing,
/// readout, and overhead factors; requires N_nv and n_avg.
pub fn ramsey_sensitivity_full(inputs: &BudgetInputs) -> Result<f64> {
    inputs.validate()?;
    let (Some(n_avg), Some(n_nv)) = (inputs.photons_per_nv, inputs.nv_count) else {
        return Err(Error::InvalidParameter(
            "full sensitivity form requires both nv_count and photons_per_nv".into(),
        ));
    };
    if !(n_avg > 0.0 && n_nv > 0.0) {
        return Err(Error::InvalidParameter(
            "N_nv and n_avg must be positive".into(),
        ));
    }
    let tau = inputs.timings.tau_s;
    let c = inputs.contrast;
    let spin_projection = 1.0 / (inputs.delta_ms * NV_GYROMAGNETIC) / (n_nv * tau).sqrt();
    let dephasing = 1.0 / inputs.envelope(tau);
    let readout = (1.0 + 1.0 / (c * c * n_avg)).sqrt();
    let overhead = (inputs.timings.total() / tau).sqrt();
    Ok(spin_projection * dephasing * readout * overhead / inputs.projection)
}

/// Shot-noise-limited Ramsey sensitivity, T·s^(1/2).
pub fn ramsey_sensitivity_shot(inputs: &BudgetInputs) -> Result<f64> {
    inputs.validate()?;
    if !(inputs.photons_per_measurement > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "photon number must be positive, got {}",
            inputs.photons_per_measurement
        )));
    }
    let tau = inputs.timings.tau_s;
    let c_eff = inputs.contrast * inputs.envelope(tau);
    Ok(
        1.0 / (inputs.delta_ms * NV_GYROMAGNETIC) / (c_eff * inputs.photons_per_measurement.sqrt())
            * inputs.timings.total().sqrt()
            / tau
            / inputs.projection,
    )
}

/// Shot-noise-limited Hahn-echo sensitivity to a synchronized AC telegraph
/// field; same algebraic form with T2 in the envelope.
pub fn hahn_sensitivity_shot(inputs: &BudgetInputs) -> Result<f64> {
    ramsey_sensitivity_shot(inputs)
}

/// Readout fidelity F = 1/sqrt(1 + 1/(C²·n_avg)) and its inverse σ_R.
pub fn readout_fidelity(contrast: f64, photons_per_nv: f64) -> Result<(f64, f64)> {
    if !(contrast > 0.0 && photons_per_nv > 0.0) {
        return Err(Error::InvalidParameter(
            "contrast and photons per NV must be positive".into(),
        ));
    }
    let f = 1.0 / (1.0 + 1.0 / (contrast * contrast * photons_per_nv)).sqrt();
    Ok((f, 1.0 / f))
}

/// Contrast and initialization efficiency extracted from the four-sequence
/// diagnostic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContrastInit {
    /// C = (S1 − S4)/(S1 + S4)
    pub contrast: f64,
    /// κ_I = (S1 − S4)/(S3 − S4)
    pub init_efficiency: f64,
    /// False when S2 and S3 still differ beyond tolerance (initialization
    /// not saturated after two pulses).
    pub saturated: bool,
}

/// Tolerance on |S3 − S2|/S3 beyond which initialization is flagged as
/// unsaturated.
pub const INIT_SATURATION_TOLERANCE: f64 = 1e-3;

pub fn contrast_and_init(s1: f64, s2: f64, s3: f64, s4: f64) -> Result<ContrastInit> {
    if s1 + s4 == 0.0 {
        return Err(Error::InvalidParameter("S1 + S4 = 0".into()));
    }
    if !(s3 > s4) {
        return Err(Error::InvalidParameter(format!(
            "need S3 > S4, got S3={s3}, S4={s4}"
        )));
    }
    Ok(ContrastInit {
        contrast: (s1 - s4) / (s1 + s4),
        init_efficiency: (s1 - s4) / (s3 - s4),
        saturated: ((s3 - s2) / s3).abs() <= INIT_SATURATION_TOLERANCE,
    })
}

/// The duty-cycle/dephasing factor whose minimum over τ locates the optimal
/// precession time: exp(+(τ/T)^p)·sqrt(τ + t_O)/τ (the 1/Δm_s prefactor is
/// applied by ratio users).
pub fn sensitivity_factor(tau_s: f64, decay_time_s: f64, stretch: f64, overhead_s: f64) -> f64 {
    ((tau_s / decay_time_s).powf(stretch)).exp() * (tau_s + overhead_s).sqrt() / tau_s
}

/// Minimize [`sensitivity_factor`] over τ ∈ (0, 10·T] by golden-section
/// search. Returns (τ*, factor at τ*).
pub fn optimal_tau(decay_time_s: f64, stretch: f64, overhead_s: f64) -> Result<(f64, f64)> {
    if !(decay_time_s > 0.0 && overhead_s >= 0.0 && stretch > 0.0) {
        return Err(Error::InvalidParameter(
            "decay time and stretch must be positive, overhead nonnegative".into(),
        ));
    }
    let f = |tau: f64| sensitivity_factor(tau, decay_time_s, stretch, overhead_s);
    let (mut a, mut b) = (1e-9 * decay_time_s, 10.0 * decay_time_s);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= 1e-12 * decay_time_s {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    let tau = 0.5 * (a + b);
    // reject boundary solutions: the bracket failed to contain the minimum
    if tau >= 10.0 * decay_time_s * (1.0 - 1e-6) {
        return Err(Error::MinimizationFailed(
            "optimal tau pinned at the search boundary".into(),
        ));
    }
    Ok((tau, f(tau)))
}

/// Expected sensitivity ratio of protocol b over protocol a (>1 means b is
/// better), each evaluated at its own optimal τ with p = 1 per the
/// comparison convention.
pub fn improvement_ratio(
    protocol_a: (f64, f64),
    protocol_b: (f64, f64),
    overhead_s: f64,
) -> Result<f64> {
    let (dms_a, t_a) = protocol_a;
    let (dms_b, t_b) = protocol_b;
    let (_, fa) = optimal_tau(t_a, 1.0, overhead_s)?;
    let (_, fb) = optimal_tau(t_b, 1.0, overhead_s)?;
    Ok((fa / dms_a) / (fb / dms_b))
}

/// Ensemble bias-gradient tolerance: the "must be well below" threshold
/// 2/(γ_e·T) for SQ and 1/(γ_e·T) for DQ, in tesla. This is the scale of a
/// "≪" bound, not an operating point.
pub fn gradient_tolerance(decay_time_s: f64, basis: Basis) -> Result<f64> {
    if !(decay_time_s > 0.0) {
        return Err(Error::InvalidParameter(
            "decay time must be positive".into(),
        ));
    }
    let numerator = match basis {
        Basis::Sq => 2.0,
        Basis::Dq => 1.0,
    };
    Ok(numerator / (NV_GYROMAGNETIC * decay_time_s))
}
