//! Phase schedules, accumulated interferometer phase, and fringe spacing.

use super::{Basis, SequenceSpec, Subtraction};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Per-repetition final-pulse phase offsets and combination weights for a
/// noise-subtraction scheme.
///
/// Each repetition applies `(upper, lower)` phase shifts to the MW tones
/// addressing the upper- and lower-frequency spin transitions (the lower
/// entry is unused in the SQ basis). The combined magnetometry sample is the
/// weighted sum of one period's readouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub tone_phases: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

fn wrap(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p == TAU {
        0.0
    } else {
        p
    }
}

impl PhaseSchedule {
    /// Repetitions per subtraction cycle.
    pub fn period(&self) -> usize {
        self.weights.len()
    }

    /// Phase added to the interferometer fringe argument at each repetition:
    /// the final-pulse phase for SQ, the relative (upper − lower) phase for
    /// DQ.
    pub fn effective_phase(&self, basis: Basis, repetition: usize) -> f64 {
        let (upper, lower) = self.tone_phases[repetition % self.tone_phases.len()];
        match basis {
            Basis::Sq => upper,
            Basis::Dq => upper - lower,
        }
    }
}

/// Phase schedule for a subtraction scheme with operating-point phase `φ`.
///
/// * `None` — single state, weight +1.
/// * `TwoState` — phases {φ, φ−π}, weights {+1, −1}.
/// * `FourState` — tone-phase pairs (φ,0), (φ−π,0), (φ,π), (φ−π,π) with
///   weights {+1,−1,−1,+1}: the DQ signal adds in all four states while
///   residual single-quantum content tied to either tone cancels.
/// * `HahnPm` — relative phases {+π/2, −π/2}, weights {+1, −1}.
pub fn phase_schedule(subtraction: Subtraction, base_phase: f64) -> PhaseSchedule {
    let p = base_phase;
    let (tone_phases, weights) = match subtraction {
        Subtraction::None => (vec![(p, 0.0)], vec![1.0]),
        Subtraction::TwoState => (vec![(p, 0.0), (p - PI, 0.0)], vec![1.0, -1.0]),
        Subtraction::FourState => (
            vec![(p, 0.0), (p - PI, 0.0), (p, PI), (p - PI, PI)],
            vec![1.0, -1.0, -1.0, 1.0],
        ),
        Subtraction::HahnPm => (vec![(PI / 2.0, 0.0), (-PI / 2.0, 0.0)], vec![1.0, -1.0]),
    };
    PhaseSchedule {
        tone_phases: tone_phases
            .into_iter()
            .map(|(u, l)| (wrap(u), wrap(l)))
            .collect(),
        weights,
    }
}

/// Magnetic test-field waveform along the bias/test axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestWaveform {
    Constant {
        tesla: f64,
    },
    Sinusoid {
        amplitude_tesla: f64,
        freq_hz: f64,
        phase_rad: f64,
    },
    /// Square wave of ±amplitude synchronized so its sign flips at the echo
    /// midpoint of every precession window.
    SquareSync {
        amplitude_tesla: f64,
    },
}

impl TestWaveform {
    /// RMS amplitude of the waveform.
    pub fn rms_tesla(&self) -> f64 {
        match *self {
            TestWaveform::Constant { tesla } => tesla.abs(),
            TestWaveform::Sinusoid {
                amplitude_tesla, ..
            } => amplitude_tesla.abs() / std::f64::consts::SQRT_2,
            TestWaveform::SquareSync { amplitude_tesla } => amplitude_tesla.abs(),
        }
    }

    /// ∫ B dt over [t0, t1] (absolute run time), closed form.
    fn integral(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            TestWaveform::Constant { tesla } => tesla * (t1 - t0),
            TestWaveform::Sinusoid {
                amplitude_tesla,
                freq_hz,
                phase_rad,
            } => {
                if freq_hz == 0.0 {
                    return amplitude_tesla * phase_rad.sin() * (t1 - t0);
                }
                let w = TAU * freq_hz;
                -amplitude_tesla / w * ((w * t1 + phase_rad).cos() - (w * t0 + phase_rad).cos())
            }
            // Handled per window in `accumulated_phase`; over a plain
            // interval the synchronized square is its positive level.
            TestWaveform::SquareSync { amplitude_tesla } => amplitude_tesla * (t1 - t0),
        }
    }
}

/// Interferometer phase accumulated over one precession window.
///
/// For Ramsey-type sequences
///   φ = Δm_s·γ_e·F_pro·∫ B dt + (Δω_eff + Δm_s·ω_m)·τ,
/// and for Hahn-type sequences the field integral is signed across the echo
/// (first half minus second half) and static detunings contribute nothing.
/// Schedule phases are added separately by the caller.
///
/// `window_start_s` is the absolute run time at which free precession
/// begins; the square-sync waveform flips sign at the window midpoint.
pub fn accumulated_phase(
    waveform: &TestWaveform,
    spec: &SequenceSpec,
    projection: f64,
    window_start_s: f64,
) -> f64 {
    let tau = spec.timings.tau_s;
    let dms = spec.basis.delta_ms();
    let gamma = crate::constants::NV_GYROMAGNETIC;
    let field_integral = if spec.is_echo() {
        let mid = window_start_s + 0.5 * tau;
        match waveform {
            // Synchronized square: +B then −B, so the signed echo integral
            // is B·τ.
            TestWaveform::SquareSync { amplitude_tesla } => amplitude_tesla * tau,
            // A static field refocuses identically to zero.
            TestWaveform::Constant { .. } => 0.0,
            w => w.integral(window_start_s, mid) - w.integral(mid, window_start_s + tau),
        }
    } else {
        match waveform {
            TestWaveform::SquareSync { amplitude_tesla } => {
                // ±B about the window midpoint integrates to zero in a
                // Ramsey window.
                let _ = amplitude_tesla;
                0.0
            }
            w => w.integral(window_start_s, window_start_s + tau),
        }
    };
    let detuning = if spec.is_echo() {
        0.0
    } else {
        spec.effective_detuning_rad_per_s()
    };
    dms * gamma * projection * field_integral + (detuning + dms * spec.modulation_rad_per_s) * tau
}

/// Field step that advances the interferometer phase by one full fringe:
/// ΔB = (1/F_pro)·2π/(Δm_s·γ_e·τ).
pub fn fringe_spacing(tau_s: f64, delta_ms: f64, projection: f64) -> Result<f64> {
    if !(tau_s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "precession time must be positive, got {tau_s}"
        )));
    }
    if !(delta_ms > 0.0 && projection > 0.0) {
        return Err(Error::InvalidParameter(
            "delta_ms and projection must be positive".into(),
        ));
    }
    Ok((1.0 / projection) * TAU / (delta_ms * crate::constants::NV_GYROMAGNETIC * tau_s))
}
