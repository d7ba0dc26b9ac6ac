//! `calibrate`: the test-field calibration factor κ by three routes —
//! coil geometry, fringe spacing, and a simulated fringe-scan fit — with a
//! cross-method comparison table.

use super::{CmdError, CmdResult, ConfigExt, NumericalExt};
use crate::config::RunConfig;
use nvmag_core::analysis::{coil_field, fit_fringe_scan};
use nvmag_core::detector::NoiseConfig;
use nvmag_core::sequence::{fringe_spacing, simulate_run, TestWaveform};
use serde::Serialize;

#[derive(Serialize)]
pub struct CalibrationReport {
    /// κ from coil geometry and drive chain, T/V.
    pub kappa_coil_t_per_volt: Option<f64>,
    /// Field step per interferometer fringe for the configured sequence, T.
    pub fringe_spacing_tesla: f64,
    /// κ recovered by fitting a simulated fringe scan, T/V.
    pub kappa_scan_t_per_volt: Option<f64>,
    /// κ configured into the simulated scan, T/V.
    pub kappa_configured_t_per_volt: Option<f64>,
    pub scan_fit_period_volts: Option<f64>,
    /// Maximum magnetometer slope from the scan fit, signal volts per
    /// tesla: 2π·A/ΔB. Feed to `[analysis] slope_volts_per_tesla` to convert
    /// Hahn spectra.
    pub scan_max_slope_volts_per_tesla: Option<f64>,
    pub methods_agree_within: Option<f64>,
}

pub fn build_report(config: &RunConfig, seed: u64) -> CmdResult<CalibrationReport> {
    let spec = config.sequence.build().config_err()?;
    let env = config.environment();
    let delta_b =
        fringe_spacing(spec.timings.tau_s, spec.basis.delta_ms(), env.projection()).numerical()?;

    let kappa_coil = match &config.coil {
        Some(c) => {
            let attenuation = 10f64.powf(c.attenuation_db / 20.0);
            let i_rms_per_volt = 1.0 / (attenuation * c.series_resistance_ohms);
            Some(coil_field(c.radius_m, c.turns, c.axial_offset_m, i_rms_per_volt).numerical()?)
        }
        None => None,
    };

    let (kappa_scan, kappa_configured, period, slope) = match &config.calibrate {
        Some(cal) => {
            if cal.scan_points < 8 {
                return Err(CmdError::Config(anyhow::anyhow!(
                    "fringe scan needs at least 8 points, got {}",
                    cal.scan_points
                )));
            }
            let response = config.response.response();
            let detector = config.detector.params();
            let mut points = Vec::with_capacity(cal.scan_points as usize);
            for i in 0..cal.scan_points {
                let drive = cal.scan_span_volts * f64::from(i) / f64::from(cal.scan_points - 1);
                let amplitude = cal.configured_kappa_tesla_per_volt * drive;
                let test = if spec.is_echo() {
                    TestWaveform::SquareSync {
                        amplitude_tesla: amplitude,
                    }
                } else {
                    TestWaveform::Constant { tesla: amplitude }
                };
                let scan_env = nvmag_core::sequence::FieldEnvironment {
                    test: Some(test),
                    ..env
                };
                let stream = simulate_run(
                    &spec,
                    &scan_env,
                    &response,
                    &detector,
                    &NoiseConfig::none(),
                    config.sequence.base_phase_rad,
                    cal.duration_per_point_s,
                    seed.wrapping_add(u64::from(i)),
                )
                .numerical()?;
                let mean = stream.combined.iter().sum::<f64>() / stream.combined.len() as f64;
                points.push((drive, mean));
            }
            let fit = fit_fringe_scan(&points, delta_b).numerical()?;
            (
                Some(fit.kappa_tesla_per_volt),
                Some(cal.configured_kappa_tesla_per_volt),
                Some(fit.period_volts),
                Some(2.0 * std::f64::consts::PI * fit.amplitude / delta_b),
            )
        }
        None => {
            if config.coil.is_none() {
                return Err(CmdError::Config(anyhow::anyhow!(
                    "calibrate requires a [coil] and/or [calibrate] section"
                )));
            }
            (None, None, None, None)
        }
    };

    let methods_agree_within = match (kappa_coil, kappa_scan) {
        (Some(a), Some(b)) => Some(((a - b) / b).abs()),
        _ => None,
    };
    Ok(CalibrationReport {
        kappa_coil_t_per_volt: kappa_coil,
        fringe_spacing_tesla: delta_b,
        kappa_scan_t_per_volt: kappa_scan,
        kappa_configured_t_per_volt: kappa_configured,
        scan_fit_period_volts: period,
        scan_max_slope_volts_per_tesla: slope,
        methods_agree_within,
    })
}

pub fn run(config: &RunConfig, seed: u64, json: bool) -> CmdResult<()> {
    let report = build_report(config, seed)?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
        return Ok(());
    }
    println!("{:<28} {:>14}", "method", "kappa (nT/V)");
    if let Some(k) = report.kappa_coil_t_per_volt {
        println!("{:<28} {:>14.1}", "coil geometry", k * 1e9);
    }
    println!(
        "{:<28} {:>14}",
        "fringe spacing",
        format!("dB = {:.1} nT", report.fringe_spacing_tesla * 1e9)
    );
    if let Some(k) = report.kappa_scan_t_per_volt {
        println!("{:<28} {:>14.1}", "fringe-scan fit", k * 1e9);
    }
    if let Some(k) = report.kappa_configured_t_per_volt {
        println!("{:<28} {:>14.1}", "configured (simulation)", k * 1e9);
    }
    if let Some(d) = report.methods_agree_within {
        println!("coil vs scan agreement: {:.2}%", d * 100.0);
    }
    Ok(())
}
