//! Pulse-sequence definitions, phase-modulation schedules, accumulated
//! interferometer phase, ideal signals, and Monte-Carlo shot generation.

mod phase;
mod run;
mod signal;

pub use phase::{accumulated_phase, fringe_spacing, phase_schedule, PhaseSchedule, TestWaveform};
pub use run::{simulate_run, FieldEnvironment, ShotStream};
pub use signal::{contrast_sequence_signals, ideal_shot_signal, EnsembleResponse};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Timing-sum vs repetition-rate agreement tolerance, seconds.
pub const TIMING_TOLERANCE_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    PulsedOdmr,
    /// Fixed-length free-induction-decay sweep (first pulse delayed).
    RamseyFid,
    Ramsey,
    HahnEcho,
    /// Fixed-length Hahn precession-time sweep.
    HahnSweep,
    /// Four-sequence contrast/initialization diagnostic.
    ContrastSeq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Sq,
    Dq,
}

impl Basis {
    /// Difference in spin quantum number between the interferometry states.
    pub fn delta_ms(self) -> f64 {
        match self {
            Basis::Sq => 1.0,
            Basis::Dq => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subtraction {
    None,
    TwoState,
    FourState,
    HahnPm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P1Drive {
    Off,
    On { duration_s: f64 },
}

/// Per-sequence timings: initialization, free precession, readout, dead time.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Timings {
    pub t_init_s: f64,
    pub tau_s: f64,
    pub t_read_s: f64,
    pub t_dead_s: f64,
}

impl Timings {
    pub fn total(&self) -> f64 {
        self.t_init_s + self.tau_s + self.t_read_s + self.t_dead_s
    }
}

/// A validated pulse sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub basis: Basis,
    pub timings: Timings,
    /// Sequence repetition rate, Hz; equals 1/(t_I + τ + t_R + t_D).
    pub f_rep_hz: f64,
    /// Fringe (phase-modulation) angular frequency applied to the final
    /// pulse, rad/s.
    pub modulation_rad_per_s: f64,
    /// Per-tone detunings from resonance, Hz: `[single]` for SQ,
    /// `[upper, lower]` for DQ.
    pub detunings_hz: Vec<f64>,
    pub p1_drive: P1Drive,
    pub subtraction: Subtraction,
}

impl SequenceSpec {
    /// Two-photon (DQ) or single-tone (SQ) effective detuning, rad/s.
    /// A Hahn echo refocuses static detunings, so this contributes zero
    /// there.
    pub fn effective_detuning_rad_per_s(&self) -> f64 {
        let hz = match self.basis {
            Basis::Sq => self.detunings_hz.first().copied().unwrap_or(0.0),
            Basis::Dq => {
                let upper = self.detunings_hz.first().copied().unwrap_or(0.0);
                let lower = self.detunings_hz.get(1).copied().unwrap_or(0.0);
                upper + lower
            }
        };
        2.0 * std::f64::consts::PI * hz
    }

    pub fn is_echo(&self) -> bool {
        matches!(self.kind, SequenceKind::HahnEcho | SequenceKind::HahnSweep)
    }
}

/// Build and validate a sequence.
///
/// When `f_rep_hz` is given, the timing sum must agree with 1/f_rep within
/// 1 ns; otherwise the rate is derived from the timings.
#[allow(clippy::too_many_arguments)]
pub fn build_sequence(
    kind: SequenceKind,
    basis: Basis,
    timings: Timings,
    f_rep_hz: Option<f64>,
    modulation_rad_per_s: f64,
    detunings_hz: Vec<f64>,
    p1_drive: P1Drive,
    subtraction: Subtraction,
) -> Result<SequenceSpec> {
    for (name, v) in [
        ("t_init_s", timings.t_init_s),
        ("tau_s", timings.tau_s),
        ("t_read_s", timings.t_read_s),
        ("t_dead_s", timings.t_dead_s),
    ] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::SequenceTiming(format!(
                "{name} must be nonnegative, got {v}"
            )));
        }
    }
    let total = timings.total();
    if total <= 0.0 {
        return Err(Error::SequenceTiming(
            "sequence has zero total length".into(),
        ));
    }
    let derived = 1.0 / total;
    let f_rep = match f_rep_hz {
        Some(requested) => {
            if !(requested > 0.0) {
                return Err(Error::SequenceTiming(format!(
                    "repetition rate must be positive, got {requested}"
                )));
            }
            if (1.0 / requested - total).abs() > TIMING_TOLERANCE_S {
                return Err(Error::SequenceTiming(format!(
                    "timings sum to {total:.9e} s but 1/f_rep = {:.9e} s (mismatch beyond 1 ns)",
                    1.0 / requested
                )));
            }
            requested
        }
        None => derived,
    };
    if matches!(kind, SequenceKind::HahnEcho | SequenceKind::HahnSweep) && basis == Basis::Sq {
        return Err(Error::InvalidParameter(
            "Hahn echo magnetometry is implemented for the DQ basis only".into(),
        ));
    }
    if let P1Drive::On { duration_s } = p1_drive {
        if !(duration_s >= 0.0 && duration_s <= total) {
            return Err(Error::SequenceTiming(format!(
                "P1 drive duration {duration_s} s outside sequence of {total} s"
            )));
        }
    }
    Ok(SequenceSpec {
        kind,
        basis,
        timings,
        f_rep_hz: f_rep,
        modulation_rad_per_s,
        detunings_hz,
        p1_drive,
        subtraction,
    })
}

/// Check that every MW tone is an integer multiple of the repetition rate.
///
/// Pass requires `tone mod f_rep` within 1e-6·f_rep of zero for each tone.
/// On failure the nearest compliant tones are suggested.
#[derive(Debug, Clone, Serialize)]
pub struct ToneValidation {
    pub pass: bool,
    /// Nearest integer-multiple tones, same order as the input.
    pub compliant_hz: Vec<f64>,
    /// Worst |tone − k·f_rep| residual, Hz.
    pub max_residual_hz: f64,
}

pub fn validate_tone_frequencies(tones_hz: &[f64], f_rep_hz: f64) -> Result<ToneValidation> {
    if !(f_rep_hz > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "repetition rate must be positive, got {f_rep_hz}"
        )));
    }
    let mut compliant = Vec::with_capacity(tones_hz.len());
    let mut max_residual: f64 = 0.0;
    for &tone in tones_hz {
        let k = (tone / f_rep_hz).round();
        let nearest = k * f_rep_hz;
        max_residual = max_residual.max((tone - nearest).abs());
        compliant.push(nearest);
    }
    Ok(ToneValidation {
        pass: max_residual <= 1e-6 * f_rep_hz,
        compliant_hz: compliant,
        max_residual_hz: max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    pub(crate) fn ramsey_timings() -> Timings {
        Timings {
            t_init_s: 35e-6,
            tau_s: 40e-6,
            t_read_s: 10e-6,
            t_dead_s: 6e-6,
        }
    }

    pub(crate) fn hahn_timings() -> Timings {
        Timings {
            t_init_s: 39e-6,
            tau_s: 100e-6,
            t_read_s: 10e-6,
            t_dead_s: 7e-6,
        }
    }

    #[test]
    fn reference_ramsey_rate() {
        let spec = build_sequence(
            SequenceKind::Ramsey,
            Basis::Dq,
            ramsey_timings(),
            None,
            0.0,
            vec![],
            P1Drive::Off,
            Subtraction::None,
        )
        .unwrap();
        assert_abs_diff_eq!(spec.f_rep_hz, 10989.0, epsilon = 0.5);
        assert_abs_diff_eq!(spec.f_rep_hz / 1e3, 11.0, epsilon = 0.05);
    }

    #[test]
    fn reference_hahn_rate() {
        let spec = build_sequence(
            SequenceKind::HahnEcho,
            Basis::Dq,
            hahn_timings(),
            None,
            0.0,
            vec![],
            P1Drive::Off,
            Subtraction::HahnPm,
        )
        .unwrap();
        assert_abs_diff_eq!(spec.f_rep_hz, 6410.0, epsilon = 0.5);
        assert_abs_diff_eq!(spec.f_rep_hz / 1e3, 6.4, epsilon = 0.02);
    }

    #[test]
    fn degenerate_zero_tau_allowed() {
        let spec = build_sequence(
            SequenceKind::Ramsey,
            Basis::Dq,
            Timings {
                tau_s: 0.0,
                ..ramsey_timings()
            },
            None,
            0.0,
            vec![],
            P1Drive::Off,
            Subtraction::None,
        )
        .unwrap();
        assert_relative_eq!(spec.timings.total(), 51e-6, max_relative = 1e-12);
    }

    #[test]
    fn timing_rate_mismatch_rejected() {
        let err = build_sequence(
            SequenceKind::Ramsey,
            Basis::Dq,
            ramsey_timings(),
            Some(11_000.0), // 1/11 kHz = 90.909 us vs 91 us sum: off by 91 ns
            0.0,
            vec![],
            P1Drive::Off,
            Subtraction::None,
        );
        assert!(matches!(err, Err(Error::SequenceTiming(_))));
    }

    #[test]
    fn sq_hahn_rejected() {
        let err = build_sequence(
            SequenceKind::HahnEcho,
            Basis::Sq,
            hahn_timings(),
            None,
            0.0,
            vec![],
            P1Drive::Off,
            Subtraction::HahnPm,
        );
        assert!(err.is_err());
    }

    #[test]
    fn negative_timing_rejected() {
        let err = build_sequence(
            SequenceKind::Ramsey,
            Basis::Dq,
            Timings {
                t_dead_s: -1e-6,
                ..ramsey_timings()
            },
            None,
            0.0,
            vec![],
            P1Drive::Off,
            Subtraction::None,
        );
        assert!(err.is_err());
    }

    #[test]
    fn tone_validation_multiples_pass() {
        let f_rep = 5500.0;
        let tones: Vec<f64> = [521_818, 521_819, 600_000]
            .iter()
            .map(|&k| k as f64 * f_rep)
            .collect();
        let v = validate_tone_frequencies(&tones, f_rep).unwrap();
        assert!(v.pass);
    }

    #[test]
    fn tone_validation_half_multiple_fails_with_suggestions() {
        let f_rep = 5500.0;
        let k = 1000.0;
        let v = validate_tone_frequencies(&[k * f_rep + f_rep / 2.0], f_rep).unwrap();
        assert!(!v.pass);
        // suggestion is either k*f_rep or (k+1)*f_rep
        let s = v.compliant_hz[0] / f_rep;
        assert!((s - 1000.0).abs() < 1e-9 || (s - 1001.0).abs() < 1e-9);
    }

    #[test]
    fn tone_validation_empty_passes() {
        assert!(validate_tone_frequencies(&[], 5500.0).unwrap().pass);
    }
}
