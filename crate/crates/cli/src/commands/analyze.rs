//! `analyze`: rms-averaged calibrated sensitivity spectrum and the
//! median-based minimum sensitivity from acquisition files.

use super::{CmdError, CmdResult, ConfigExt, IoExt, NumericalExt};
use crate::config::{BandSection, RunConfig};
use crate::output::OutputDir;
use nvmag_core::analysis::{
    asd, calibrate_asd, final_fraction_band, min_sensitivity, notch, rms_average, Asd, MinSensMode,
};
use nvmag_core::sequence::SequenceKind;
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
pub struct SensitivityReport {
    pub min_sensitivity_t_sqrt_s: f64,
    pub band_hz: (f64, f64),
    pub mode: String,
    pub acquisitions_used: usize,
    pub calibration_t_per_volt: Option<f64>,
    pub notches_hz: Vec<f64>,
    pub combined_rate_hz: f64,
    pub bin_hz: f64,
}

/// Read the combined-magnetometry column of one acquisition CSV.
fn read_combined(path: &Path) -> CmdResult<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CmdError::Io(anyhow::anyhow!("cannot open {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CmdError::Io(e.into()))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h == "combined_volts")
        .ok_or_else(|| {
            CmdError::Io(anyhow::anyhow!(
                "{} lacks a combined_volts column",
                path.display()
            ))
        })?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CmdError::Io(e.into()))?;
        if let Some(field) = record.get(col) {
            if !field.is_empty() {
                out.push(field.parse::<f64>().map_err(|e| {
                    CmdError::Io(anyhow::anyhow!("bad combined value {field:?}: {e}"))
                })?);
            }
        }
    }
    if out.is_empty() {
        return Err(CmdError::Io(anyhow::anyhow!(
            "{} contains no combined samples",
            path.display()
        )));
    }
    Ok(out)
}

pub fn analyze_spectra(
    config: &RunConfig,
    series: &[Vec<f64>],
    single_acq: bool,
) -> CmdResult<(Asd, SensitivityReport)> {
    let spec = config.sequence.build().config_err()?;
    let period =
        nvmag_core::sequence::phase_schedule(spec.subtraction, config.sequence.base_phase_rad)
            .period();
    let rate = spec.f_rep_hz / period as f64;

    let used: &[Vec<f64>] = if single_acq { &series[..1] } else { series };
    let spectra: Vec<Asd> = used
        .iter()
        .map(|s| asd(s, rate))
        .collect::<Result<_, _>>()
        .numerical()?;
    let mut averaged = if spectra.len() == 1 {
        spectra[0].clone()
    } else {
        rms_average(&spectra).numerical()?
    };

    // calibration: a measured slope wins, then an explicit test line, then
    // the configured test field
    let mut calibration = None;
    if let Some(slope) = config.analysis.slope_volts_per_tesla {
        if !(slope > 0.0) {
            return Err(CmdError::Config(anyhow::anyhow!(
                "slope_volts_per_tesla must be positive, got {slope}"
            )));
        }
        let scale = 1.0 / slope;
        for v in &mut averaged.values {
            *v *= scale;
        }
        averaged.calibration = Some(scale);
        calibration = Some(scale);
    } else {
        let cal_freq = config
            .analysis
            .calibration_freq_hz
            .or_else(|| config.test_field.as_ref().and_then(|t| t.freq_hz()));
        let cal_rms = config
            .analysis
            .calibration_rms_tesla
            .or_else(|| config.test_field.as_ref().map(|t| t.rms_tesla()));
        match (cal_freq, cal_rms) {
            (Some(freq), Some(rms)) => {
                averaged = calibrate_asd(&averaged, freq, rms).numerical()?;
                calibration = averaged.calibration;
            }
            (Some(freq), None) => {
                return Err(CmdError::Config(anyhow::anyhow!(
                    "calibration at {freq} Hz requested but no known rms field \
                     (set calibration_rms_tesla or a test field)"
                )));
            }
            _ => {}
        }
    }
    if !config.analysis.notches_hz.is_empty() {
        averaged = notch(&averaged, &config.analysis.notches_hz).numerical()?;
    }

    let band = match &config.analysis.band {
        Some(BandSection::FinalFraction { fraction }) => final_fraction_band(&averaged, *fraction),
        Some(BandSection::Full) => (averaged.bin_hz, averaged.nyquist_hz()),
        Some(BandSection::Range { lo_hz, hi_hz }) => (*lo_hz, *hi_hz),
        // defaults per protocol: Ramsey takes the top 10% of bins, Hahn the
        // full combined-output band minus notches
        None => match spec.kind {
            SequenceKind::HahnEcho | SequenceKind::HahnSweep => {
                (averaged.bin_hz, averaged.nyquist_hz())
            }
            _ => final_fraction_band(&averaged, 0.1),
        },
    };
    let mode = if single_acq {
        MinSensMode::SingleAcq
    } else {
        MinSensMode::Averaged
    };
    let floor = min_sensitivity(&averaged, band, mode).numerical()?;
    let report = SensitivityReport {
        min_sensitivity_t_sqrt_s: floor,
        band_hz: band,
        mode: if single_acq {
            "single_acq".into()
        } else {
            "averaged".into()
        },
        acquisitions_used: used.len(),
        calibration_t_per_volt: calibration,
        notches_hz: config.analysis.notches_hz.clone(),
        combined_rate_hz: rate,
        bin_hz: averaged.bin_hz,
    };
    Ok((averaged, report))
}

pub fn run(
    config: &RunConfig,
    files: &[std::path::PathBuf],
    out: &OutputDir,
    single_acq: bool,
    json: bool,
) -> CmdResult<()> {
    if files.is_empty() {
        return Err(CmdError::Config(anyhow::anyhow!(
            "analyze requires at least one acquisition file"
        )));
    }
    let series: Vec<Vec<f64>> = files
        .iter()
        .map(|p| read_combined(p))
        .collect::<CmdResult<_>>()?;
    let (spectrum, report) = analyze_spectra(config, &series, single_acq)?;

    let file = out.create("spectrum.csv").io_err()?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["frequency_hz", "asd", "in_band"])
        .map_err(|e| CmdError::Io(e.into()))?;
    let (lo, hi) = report.band_hz;
    for (i, v) in spectrum.values.iter().enumerate() {
        let f = spectrum.frequency(i);
        let notched = report
            .notches_hz
            .iter()
            .any(|&n| (f - n).abs() <= spectrum.bin_hz / 2.0);
        let in_band =
            i > 0 && f >= lo - spectrum.bin_hz / 2.0 && f <= hi + spectrum.bin_hz / 2.0 && !notched;
        w.write_record([
            format!("{f:.6}"),
            format!("{v:.9e}"),
            if in_band { "1".into() } else { "0".to_string() },
        ])
        .map_err(|e| CmdError::Io(e.into()))?;
    }
    w.flush().map_err(|e| CmdError::Io(e.into()))?;
    out.write_json("sensitivity.json", &report).io_err()?;

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        let units = if report.calibration_t_per_volt.is_some() {
            "T·s^1/2"
        } else {
            "V·s^1/2"
        };
        println!(
            "minimum sensitivity {:.4e} {units} (median over [{:.1}, {:.1}] Hz, {} mode, {} acquisition(s))",
            report.min_sensitivity_t_sqrt_s,
            report.band_hz.0,
            report.band_hz.1,
            report.mode,
            report.acquisitions_used
        );
    }
    Ok(())
}
