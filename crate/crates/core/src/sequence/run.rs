//! Monte-Carlo shot generation through the detector chain.

use super::{accumulated_phase, ideal_shot_signal, EnsembleResponse};
use super::{phase_schedule, PhaseSchedule, SequenceSpec, TestWaveform};
use crate::detector::{sample_readout, DetectorParams, NoiseConfig};
use crate::spin::{BiasField, AXES_111};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Static and test fields applied to the sensor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FieldEnvironment {
    pub bias: BiasField,
    /// Test-field waveform, applied parallel to the bias field.
    pub test: Option<TestWaveform>,
    /// Bias-field gradient magnitude over the ensemble, T (metadata for
    /// budget checks; no gradient dynamics are simulated).
    pub gradient_tesla: f64,
}

impl FieldEnvironment {
    /// Mean projection of the field axis onto the four NV classes
    /// (1/sqrt(3) for the [100] geometry).
    pub fn projection(&self) -> f64 {
        let b = self.bias.vector_tesla;
        let mag = self.bias.magnitude();
        let unit = if mag > 0.0 {
            [b[0] / mag, b[1] / mag, b[2] / mag]
        } else {
            [1.0, 0.0, 0.0]
        };
        AXES_111
            .iter()
            .map(|ax| (unit[0] * ax[0] + unit[1] * ax[1] + unit[2] * ax[2]).abs())
            .sum::<f64>()
            / 4.0
    }
}

/// Per-repetition digitized readouts plus the subtraction-combined
/// magnetometry series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShotStream {
    pub f_rep_hz: f64,
    /// Repetitions per subtraction cycle.
    pub schedule_period: usize,
    /// Raw balanced-readout voltage per repetition.
    pub raw_volts: Vec<f64>,
    /// Weighted combination over each complete schedule period, V.
    pub combined: Vec<f64>,
    pub schedule: PhaseSchedule,
    /// NV-axis projection used for phase accumulation.
    pub projection: f64,
}

impl ShotStream {
    /// Sample rate of the combined magnetometry output, Hz.
    pub fn combined_rate_hz(&self) -> f64 {
        self.f_rep_hz / self.schedule_period as f64
    }

    /// Nyquist bandwidth of the combined output, Hz.
    pub fn bandwidth_hz(&self) -> f64 {
        self.combined_rate_hz() / 2.0
    }

    /// Start time of repetition `i`, s.
    pub fn shot_time_s(&self, i: usize) -> f64 {
        i as f64 / self.f_rep_hz
    }
}

/// Simulate `duration_s` of magnetometry.
///
/// Shots are generated in parallel with counter-based per-shot random
/// streams, so output is bit-identical for a fixed seed regardless of
/// thread count. The combined series covers complete schedule periods only.
#[allow(clippy::too_many_arguments)]
pub fn simulate_run(
    spec: &SequenceSpec,
    env: &FieldEnvironment,
    response: &EnsembleResponse,
    detector: &DetectorParams,
    noise: &NoiseConfig,
    base_phase_rad: f64,
    duration_s: f64,
    seed: u64,
) -> Result<ShotStream> {
    response.validate()?;
    detector.validate()?;
    noise.validate()?;
    if !(duration_s * spec.f_rep_hz >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "duration {duration_s} s is shorter than one repetition (1/f_rep = {} s)",
            1.0 / spec.f_rep_hz
        )));
    }
    let schedule = phase_schedule(spec.subtraction, base_phase_rad);
    let period = schedule.period();
    let n_shots = (duration_s * spec.f_rep_hz).floor() as usize;
    if n_shots < period {
        return Err(Error::InvalidParameter(format!(
            "duration covers {n_shots} shots, less than one schedule period of {period}"
        )));
    }
    let projection = env.projection();
    let waveform = env.test.unwrap_or(TestWaveform::Constant { tesla: 0.0 });
    let tau = spec.timings.tau_s;
    let t_read = spec.timings.t_read_s;

    let raw_volts: Vec<f64> = (0..n_shots)
        .into_par_iter()
        .map(|r| {
            let window_start = r as f64 / spec.f_rep_hz + spec.timings.t_init_s;
            let phi = accumulated_phase(&waveform, spec, projection, window_start)
                + schedule.effective_phase(spec.basis, r % period);
            let s = ideal_shot_signal(phi, response, tau);
            let mut rng = crate::rng::shot_stream(seed, "shots", r as u64);
            sample_readout(s, detector, t_read, noise, &mut rng)
        })
        .collect::<Result<_>>()?;

    let n_combined = n_shots / period;
    let combined: Vec<f64> = (0..n_combined)
        .map(|j| {
            schedule
                .weights
                .iter()
                .enumerate()
                .map(|(s, w)| w * raw_volts[j * period + s])
                .sum()
        })
        .collect();

    Ok(ShotStream {
        f_rep_hz: spec.f_rep_hz,
        schedule_period: period,
        raw_volts,
        combined,
        schedule,
        projection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{PROJECTION_100, TESLA_PER_GAUSS};
    use crate::detector::mean_output;
    use crate::sequence::{build_sequence, Basis, P1Drive, SequenceKind, Subtraction, Timings};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ramsey_spec(subtraction: Subtraction) -> SequenceSpec {
        build_sequence(
            SequenceKind::Ramsey,
            Basis::Dq,
            Timings {
                t_init_s: 35e-6,
                tau_s: 40e-6,
                t_read_s: 10e-6,
                t_dead_s: 6e-6,
            },
            None,
            0.0,
            vec![],
            P1Drive::Off,
            subtraction,
        )
        .unwrap()
    }

    fn reference_env(test: Option<TestWaveform>) -> FieldEnvironment {
        FieldEnvironment {
            bias: BiasField::along_100(2.23 * TESLA_PER_GAUSS),
            test,
            gradient_tesla: 0.0,
        }
    }

    #[test]
    fn projection_100_geometry() {
        assert_relative_eq!(
            reference_env(None).projection(),
            PROJECTION_100,
            max_relative = 1e-12
        );
    }

    #[test]
    fn noise_free_constant_field_is_analytic() {
        let spec = ramsey_spec(Subtraction::None);
        let env = reference_env(Some(TestWaveform::Constant { tesla: 30e-9 }));
        let response = EnsembleResponse::default();
        let detector = DetectorParams::default();
        let stream = simulate_run(
            &spec,
            &env,
            &response,
            &detector,
            &NoiseConfig::none(),
            0.0,
            5e-3,
            9,
        )
        .unwrap();
        let phi = crate::sequence::accumulated_phase(
            &TestWaveform::Constant { tesla: 30e-9 },
            &spec,
            env.projection(),
            spec.timings.t_init_s,
        );
        let expect =
            mean_output(&detector, 10e-6, ideal_shot_signal(phi, &response, 40e-6)).unwrap();
        for v in &stream.combined {
            assert_relative_eq!(*v, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn identical_seeds_bit_identical() {
        let spec = ramsey_spec(Subtraction::TwoState);
        let env = reference_env(Some(TestWaveform::Sinusoid {
            amplitude_tesla: 14e-9,
            freq_hz: 10.0,
            phase_rad: 0.0,
        }));
        let run = || {
            simulate_run(
                &spec,
                &env,
                &EnsembleResponse::default(),
                &DetectorParams::default(),
                &NoiseConfig::full(),
                std::f64::consts::FRAC_PI_2,
                20e-3,
                1234,
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.raw_volts, b.raw_volts);
        assert_eq!(a.combined, b.combined);
        let c = simulate_run(
            &spec,
            &env,
            &EnsembleResponse::default(),
            &DetectorParams::default(),
            &NoiseConfig::full(),
            std::f64::consts::FRAC_PI_2,
            20e-3,
            1235,
        )
        .unwrap();
        assert_ne!(a.raw_volts, c.raw_volts);
    }

    #[test]
    fn subtraction_cancels_common_mode_with_zero_contrast() {
        let response = EnsembleResponse {
            contrast: 0.0,
            ..EnsembleResponse::default()
        };
        for sub in [Subtraction::TwoState, Subtraction::FourState] {
            let spec = ramsey_spec(sub);
            let stream = simulate_run(
                &spec,
                &reference_env(None),
                &response,
                &DetectorParams::default(),
                &NoiseConfig::none(),
                0.4,
                2e-3,
                7,
            )
            .unwrap();
            for v in &stream.combined {
                assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn combined_rate_divides_by_schedule_period() {
        // 11 kHz repetition: bandwidths 5.5 / 2.75 / 1.375 kHz for
        // none / 2-state / 4-state
        let timings = Timings {
            t_init_s: 35e-6,
            tau_s: 40e-6,
            t_read_s: 10e-6,
            t_dead_s: 1.0 / 11e3 - 85e-6,
        };
        for (sub, bw) in [
            (Subtraction::None, 5.5e3),
            (Subtraction::TwoState, 2.75e3),
            (Subtraction::FourState, 1.375e3),
        ] {
            let spec = build_sequence(
                SequenceKind::Ramsey,
                Basis::Dq,
                timings,
                Some(11e3),
                0.0,
                vec![],
                P1Drive::Off,
                sub,
            )
            .unwrap();
            let stream = simulate_run(
                &spec,
                &reference_env(None),
                &EnsembleResponse::default(),
                &DetectorParams::default(),
                &NoiseConfig::none(),
                0.0,
                10e-3,
                3,
            )
            .unwrap();
            assert_relative_eq!(stream.bandwidth_hz(), bw, max_relative = 1e-12);
            assert_eq!(
                stream.combined.len(),
                stream.raw_volts.len() / stream.schedule_period
            );
        }
    }

    #[test]
    fn too_short_duration_rejected() {
        let spec = ramsey_spec(Subtraction::FourState);
        let err = simulate_run(
            &spec,
            &reference_env(None),
            &EnsembleResponse::default(),
            &DetectorParams::default(),
            &NoiseConfig::none(),
            0.0,
            2.0 / spec.f_rep_hz, // two shots < one 4-state period
            3,
        );
        assert!(err.is_err());
    }
}
