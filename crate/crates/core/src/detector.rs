//! Photon-to-voltage path: photoelectron statistics, integrating balanced
//! photodetector, instrumentation gain, and digitizer noise.
//!
//! Photoelectron counts are ~1e11 per readout, so shot noise is modeled as
//! Gaussian; the normal approximation is exact to ~1e-5 relative at these
//! counts.

use crate::constants::ELEMENTARY_CHARGE;
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Balanced-photodetector and digitizer parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Mean signal photocurrent, A.
    pub i_sig_amps: f64,
    /// Mean reference photocurrent, A.
    pub i_ref_amps: f64,
    /// Signal integration capacitor, F.
    pub c_sig_farads: f64,
    /// Reference integration capacitor, F.
    pub c_ref_farads: f64,
    /// Effective gain of the analog balancing circuit.
    pub gain: f64,
    /// Digitizer rms noise per readout, V.
    pub digitizer_rms_volts: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            i_sig_amps: 4.8e-3,
            i_ref_amps: 82.9e-3,
            c_sig_farads: 6.6e-9,
            c_ref_farads: 114e-9,
            gain: 7.69,
            digitizer_rms_volts: 23e-6,
        }
    }
}

/// Fractional |V_sig − V_ref|/V_sig above which [`balance_factor`] reports
/// the arms as unbalanced.
pub const BALANCE_TOLERANCE: f64 = 0.05;

/// Which stochastic terms the sampler realizes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub signal_shot: bool,
    pub reference_shot: bool,
    pub digitizer: bool,
    /// Common-mode relative intensity noise, rms fraction per readout,
    /// applied multiplicatively to both arms before differencing. Imperfect
    /// cancellation is not modeled; this knob exists for qualitative studies.
    pub rin_rel_rms: f64,
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            signal_shot: false,
            reference_shot: false,
            digitizer: false,
            rin_rel_rms: 0.0,
        }
    }

    /// Signal-arm photoelectron shot noise only.
    pub fn shot_only() -> Self {
        Self {
            signal_shot: true,
            reference_shot: false,
            digitizer: false,
            rin_rel_rms: 0.0,
        }
    }

    /// Signal + reference shot noise and digitizer noise.
    pub fn full() -> Self {
        Self {
            signal_shot: true,
            reference_shot: true,
            digitizer: true,
            rin_rel_rms: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rin_rel_rms >= 0.0 && self.rin_rel_rms.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rin_rel_rms must be finite and nonnegative, got {}",
                self.rin_rel_rms
            )));
        }
        Ok(())
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.i_sig_amps,
            self.i_ref_amps,
            self.c_sig_farads,
            self.c_ref_farads,
            self.gain,
            self.digitizer_rms_volts,
        ];
        if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0))
            || self.c_sig_farads == 0.0
            || self.c_ref_farads == 0.0
            || self.gain == 0.0
        {
            return Err(Error::InvalidParameter(
                "detector parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Expected photoelectron count I·t_R/q for one readout.
pub fn photoelectron_count(current_amps: f64, t_read_s: f64) -> Result<f64> {
    if current_amps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "negative current {current_amps} A"
        )));
    }
    if !(t_read_s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "readout time must be positive, got {t_read_s}"
        )));
    }
    Ok(current_amps * t_read_s / ELEMENTARY_CHARGE)
}

/// Voltage integrated on a capacitor: I·t_R/C.
pub fn integrated_voltage(
    current_amps: f64,
    t_read_s: f64,
    capacitance_farads: f64,
) -> Result<f64> {
    if !(capacitance_farads > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "capacitance must be positive, got {capacitance_farads}"
        )));
    }
    if current_amps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "negative current {current_amps} A"
        )));
    }
    Ok(current_amps * t_read_s / capacitance_farads)
}

/// Shot-noise rms on an integration capacitor: sqrt(q·I·t_R)/C.
pub fn shot_sigma(current_amps: f64, t_read_s: f64, capacitance_farads: f64) -> Result<f64> {
    if !(capacitance_farads > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "capacitance must be positive, got {capacitance_farads}"
        )));
    }
    if current_amps < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "negative current {current_amps} A"
        )));
    }
    Ok((ELEMENTARY_CHARGE * current_amps * t_read_s).sqrt() / capacitance_farads)
}

/// Result of [`balance_factor`].
#[derive(Debug, Clone, Copy)]
pub struct BalanceFactor {
    pub kappa_bal: f64,
    /// Fractional arm imbalance |V_sig − V_ref|/V_sig at the default 10 µs
    /// readout (the ratio is t_R-independent).
    pub imbalance: f64,
    /// True when the imbalance exceeds [`BALANCE_TOLERANCE`]; κ_bal is still
    /// computed.
    pub unbalanced: bool,
}

/// Shot-noise penalty of referencing: κ_bal = sqrt(1 + Ī_ref·C_sig²/(Ī_sig·C_ref²)).
pub fn balance_factor(params: &DetectorParams) -> Result<BalanceFactor> {
    params.validate()?;
    let kappa_bal = (1.0
        + params.i_ref_amps * params.c_sig_farads * params.c_sig_farads
            / (params.i_sig_amps * params.c_ref_farads * params.c_ref_farads))
        .sqrt();
    // V_sig vs V_ref ratio is independent of t_R
    let v_sig = params.i_sig_amps / params.c_sig_farads;
    let v_ref = params.i_ref_amps / params.c_ref_farads;
    let imbalance = ((v_sig - v_ref) / v_sig).abs();
    Ok(BalanceFactor {
        kappa_bal,
        imbalance,
        unbalanced: imbalance > BALANCE_TOLERANCE,
    })
}

/// Total single-readout noise budget.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReadoutNoise {
    /// σ_tot = sqrt(G²σ_sig²κ_bal² + σ_dig²), V.
    pub sigma_tot_volts: f64,
    /// σ_tot / (G·σ_sig·κ_bal): noise growth from digitization.
    pub digitizer_inflation: f64,
    pub sigma_sig_volts: f64,
    pub sigma_ref_volts: f64,
    pub kappa_bal: f64,
}

/// Total rms voltage noise for a single readout of duration `t_read_s`.
pub fn total_readout_sigma(params: &DetectorParams, t_read_s: f64) -> Result<ReadoutNoise> {
    let sigma_sig = shot_sigma(params.i_sig_amps, t_read_s, params.c_sig_farads)?;
    let sigma_ref = shot_sigma(params.i_ref_amps, t_read_s, params.c_ref_farads)?;
    let kappa_bal = balance_factor(params)?.kappa_bal;
    let amplified = params.gain * sigma_sig * kappa_bal;
    let sigma_tot =
        (amplified * amplified + params.digitizer_rms_volts * params.digitizer_rms_volts).sqrt();
    Ok(ReadoutNoise {
        sigma_tot_volts: sigma_tot,
        digitizer_inflation: sigma_tot / amplified,
        sigma_sig_volts: sigma_sig,
        sigma_ref_volts: sigma_ref,
        kappa_bal,
    })
}

/// Mean balancing-circuit output for a normalized signal level `s`:
/// G·(V_sig·s − V_ref).
pub fn mean_output(params: &DetectorParams, t_read_s: f64, s: f64) -> Result<f64> {
    let v_sig = integrated_voltage(params.i_sig_amps, t_read_s, params.c_sig_farads)?;
    let v_ref = integrated_voltage(params.i_ref_amps, t_read_s, params.c_ref_farads)?;
    Ok(params.gain * (v_sig * s - v_ref))
}

/// One digitized balanced readout at normalized signal level `s` (s = 1 is
/// the mean bright level).
///
/// Signal-arm shot variance scales with the instantaneous level s; reference
/// shot noise and digitizer noise do not.
pub fn sample_readout<R: Rng + ?Sized>(
    expected_signal: f64,
    params: &DetectorParams,
    t_read_s: f64,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<f64> {
    if expected_signal < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "expected normalized signal must be nonnegative, got {expected_signal}"
        )));
    }
    noise.validate()?;
    let mut mean = mean_output(params, t_read_s, expected_signal)?;
    if noise.rin_rel_rms > 0.0 {
        // Common-mode intensity fluctuation: both arms scale together,
        // perfect common-mode rejection except through the difference mean.
        let f: f64 = 1.0 + noise.rin_rel_rms * rng.sample::<f64, _>(StandardNormal);
        mean *= f;
    }
    let sigma_sig = shot_sigma(params.i_sig_amps, t_read_s, params.c_sig_farads)?;
    let g2 = params.gain * params.gain;
    let mut variance = 0.0;
    if noise.signal_shot {
        variance += g2 * sigma_sig * sigma_sig * expected_signal;
    }
    if noise.reference_shot {
        let sigma_ref = shot_sigma(params.i_ref_amps, t_read_s, params.c_ref_farads)?;
        variance += g2 * sigma_ref * sigma_ref;
    }
    if noise.digitizer {
        variance += params.digitizer_rms_volts * params.digitizer_rms_volts;
    }
    let noise_v = if variance > 0.0 {
        variance.sqrt() * rng.sample::<f64, _>(StandardNormal)
    } else {
        0.0
    };
    Ok(mean + noise_v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;

    const T_READ: f64 = 10e-6;

    #[test]
    fn photoelectron_counts_match_budget() {
        // 4.8 mA, 10 us -> 3.0e11; 82.9 mA -> 5.2e12
        let n_sig = photoelectron_count(4.8e-3, T_READ).unwrap();
        let n_ref = photoelectron_count(82.9e-3, T_READ).unwrap();
        assert_relative_eq!(n_sig, 3.0e11, max_relative = 0.002);
        assert_relative_eq!(n_ref, 5.2e12, max_relative = 0.005);
        assert_eq!(photoelectron_count(0.0, T_READ).unwrap(), 0.0);
        assert!(photoelectron_count(-1e-3, T_READ).is_err());
    }

    #[test]
    fn integrated_voltages_balance() {
        let v_sig = integrated_voltage(4.8e-3, T_READ, 6.6e-9).unwrap();
        let v_ref = integrated_voltage(82.9e-3, T_READ, 114e-9).unwrap();
        assert_abs_diff_eq!(v_sig, 7.27, epsilon = 0.01);
        assert_abs_diff_eq!(v_ref, 7.27, epsilon = 0.01);
        assert_eq!(integrated_voltage(0.0, T_READ, 6.6e-9).unwrap(), 0.0);
        assert!(integrated_voltage(1e-3, T_READ, 0.0).is_err());
    }

    #[test]
    fn shot_sigmas_match_budget() {
        let s_sig = shot_sigma(4.8e-3, T_READ, 6.6e-9).unwrap();
        let s_ref = shot_sigma(82.9e-3, T_READ, 114e-9).unwrap();
        assert_relative_eq!(s_sig, 13e-6, max_relative = 0.03);
        assert_relative_eq!(s_ref, 3.2e-6, max_relative = 0.01);
        // quadrupling I doubles sigma
        let s4 = shot_sigma(4.0 * 4.8e-3, T_READ, 6.6e-9).unwrap();
        assert_relative_eq!(s4, 2.0 * s_sig, max_relative = 1e-12);
    }

    #[test]
    fn balance_factor_reference_value() {
        let b = balance_factor(&DetectorParams::default()).unwrap();
        assert_abs_diff_eq!(b.kappa_bal, 1.029, epsilon = 0.001);
        assert!(!b.unbalanced);
    }

    #[test]
    fn balance_factor_limits() {
        // C_ref -> infinity: perfect reference, kappa -> 1 (unbalanced arms,
        // still computed)
        let p = DetectorParams {
            c_ref_farads: 1.0,
            ..DetectorParams::default()
        };
        let b = balance_factor(&p).unwrap();
        assert_abs_diff_eq!(b.kappa_bal, 1.0, epsilon = 1e-6);
        assert!(b.unbalanced);
        // equal capacitors with matched voltages: equal shot noise, sqrt(2)
        let p = DetectorParams {
            i_sig_amps: 4.8e-3,
            i_ref_amps: 4.8e-3,
            c_sig_farads: 6.6e-9,
            c_ref_farads: 6.6e-9,
            ..DetectorParams::default()
        };
        let b = balance_factor(&p).unwrap();
        assert_relative_eq!(b.kappa_bal, 2f64.sqrt(), max_relative = 1e-12);
        assert!(!b.unbalanced);
    }

    #[test]
    fn total_sigma_reference_budget() {
        let n = total_readout_sigma(&DetectorParams::default(), T_READ).unwrap();
        assert_relative_eq!(n.sigma_tot_volts, 0.1075e-3, max_relative = 0.02);
        assert_abs_diff_eq!(n.digitizer_inflation, 1.024, epsilon = 0.002);
    }

    #[test]
    fn total_sigma_quadrature_identity() {
        let p = DetectorParams::default();
        let n = total_readout_sigma(&p, T_READ).unwrap();
        let lhs = n.sigma_tot_volts * n.sigma_tot_volts;
        let rhs =
            p.gain * p.gain * n.sigma_sig_volts * n.sigma_sig_volts * n.kappa_bal * n.kappa_bal
                + p.digitizer_rms_volts * p.digitizer_rms_volts;
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
    }

    #[test]
    fn total_sigma_no_digitizer_no_reference() {
        let p = DetectorParams {
            digitizer_rms_volts: 0.0,
            i_ref_amps: 0.0,
            ..DetectorParams::default()
        };
        let n = total_readout_sigma(&p, T_READ).unwrap();
        assert_relative_eq!(
            n.sigma_tot_volts,
            p.gain * n.sigma_sig_volts,
            max_relative = 1e-12
        );
        assert_relative_eq!(n.digitizer_inflation, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn sampler_noise_free_is_deterministic() {
        let p = DetectorParams::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let v = sample_readout(1.0, &p, T_READ, &NoiseConfig::none(), &mut rng).unwrap();
        assert_relative_eq!(
            v,
            mean_output(&p, T_READ, 1.0).unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn sampler_std_matches_budget() {
        let p = DetectorParams::default();
        let noise = NoiseConfig::full();
        let expect = total_readout_sigma(&p, T_READ).unwrap().sigma_tot_volts;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 1_000_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| sample_readout(1.0, &p, T_READ, &noise, &mut rng).unwrap())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        assert_relative_eq!(var.sqrt(), expect, max_relative = 0.005);
    }

    #[test]
    fn balanced_mean_output_zero_at_unit_signal() {
        // with V_sig = V_ref exactly, mean combined output is 0 for s = 1
        let p = DetectorParams {
            i_ref_amps: 4.8e-3 * (114.0 / 6.6),
            ..DetectorParams::default()
        };
        let v = mean_output(&p, T_READ, 1.0).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn combined_pair_noise_five_percent_above_shot() {
        // Differencing a pair multiplies both total noise and bare shot
        // noise by sqrt(2); the excess over the bare-shot floor is
        // kappa_bal x digitizer inflation ≈ 1.05.
        let p = DetectorParams::default();
        let n = total_readout_sigma(&p, T_READ).unwrap();
        let excess = n.sigma_tot_volts / (p.gain * n.sigma_sig_volts);
        assert_abs_diff_eq!(excess, 1.05, epsilon = 0.005);
        assert_relative_eq!(
            excess,
            n.kappa_bal * n.digitizer_inflation,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sampled_noise_spectrum_is_white() {
        // ASD of 1e5 readouts: band-averaged levels in the lower and upper
        // halves of the spectrum agree to within statistical error.
        let p = DetectorParams::default();
        let noise = NoiseConfig::full();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3141);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|v| {
                let _ = v;
                sample_readout(1.0, &p, T_READ, &noise, &mut rng).unwrap()
            })
            .collect();
        let fs = 1e4;
        let spectrum = crate::analysis::asd(&samples, fs).unwrap();
        let bins = &spectrum.values[1..];
        let half = bins.len() / 2;
        let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        let ratio = rms(&bins[..half]) / rms(&bins[half..]);
        assert_abs_diff_eq!(ratio, 1.0, epsilon = 0.02);
    }

    #[test]
    fn monotonicity_in_noise_sources() {
        let base = total_readout_sigma(&DetectorParams::default(), T_READ).unwrap();
        for grow in [
            DetectorParams {
                i_sig_amps: 6e-3,
                ..DetectorParams::default()
            },
            DetectorParams {
                digitizer_rms_volts: 40e-6,
                ..DetectorParams::default()
            },
            DetectorParams {
                c_sig_farads: 5e-9,
                ..DetectorParams::default()
            },
        ] {
            let n = total_readout_sigma(&grow, T_READ).unwrap();
            assert!(n.sigma_tot_volts > base.sigma_tot_volts);
        }
    }
}
