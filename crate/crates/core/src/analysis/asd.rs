//! Amplitude spectral densities and the median-based sensitivity estimate.
//!
//! Spectra are rectangular-windowed DFTs normalized as *double-sided*
//! amplitude spectral densities: a pure sinusoid of rms amplitude a appears
//! with magnitude a/sqrt(2) in each of its ± bins (for 1 Hz bins), and
//! Parseval holds as Σ bin²·Δf = time-domain mean square. Only the
//! nonnegative-frequency half is stored; for real input the negative bins
//! mirror it.

use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Median → rms correction for the spectrum of a *single* acquisition of
/// white Gaussian noise: sqrt(4/π) · (1/2)·sqrt(π/ln 2) ≈ 1.2011. The first
/// factor converts an rms mean to an ordinary mean, the second an ordinary
/// mean to a median, both from the Rayleigh magnitude distribution.
pub const MEDIAN_CORRECTION_ALPHA: f64 = {
    // evaluated at compile time would need const sqrt; keep a function-free
    // literal derivation in `median_correction_alpha()` for the test oracle
    1.201122408786449
};

/// α recomputed from its closed form (test oracle for the frozen constant).
pub fn median_correction_alpha() -> f64 {
    (4.0 / std::f64::consts::PI).sqrt() * 0.5 * (std::f64::consts::PI / 2f64.ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    SingleSided,
    DoubleSided,
}

/// Amplitude spectral density with band metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Asd {
    /// Bin width, Hz (typically 1 Hz for 1-s acquisitions).
    pub bin_hz: f64,
    pub sidedness: Sidedness,
    /// Magnitude per bin for frequencies 0, Δf, 2Δf, …, Nyquist;
    /// units/√Hz (volts or tesla per √Hz).
    pub values: Vec<f64>,
    /// Applied calibration factor, output units per volt, when calibrated.
    pub calibration: Option<f64>,
    /// Bin center frequencies excluded from sensitivity statistics.
    pub notches_hz: Vec<f64>,
    pub sample_rate_hz: f64,
    /// Samples actually transformed (after tail truncation).
    pub n_samples: usize,
}

impl Asd {
    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    pub fn bin_of(&self, freq_hz: f64) -> usize {
        (freq_hz / self.bin_hz).round() as usize
    }

    fn is_notched(&self, bin: usize) -> bool {
        let f = self.frequency(bin);
        self.notches_hz
            .iter()
            .any(|&n| (f - n).abs() <= self.bin_hz / 2.0)
    }

    /// Convert between single- and double-sided magnitudes (factor sqrt(2)
    /// on all non-DC bins).
    pub fn to_sidedness(&self, target: Sidedness) -> Asd {
        if self.sidedness == target {
            return self.clone();
        }
        let factor = match target {
            Sidedness::SingleSided => std::f64::consts::SQRT_2,
            Sidedness::DoubleSided => std::f64::consts::FRAC_1_SQRT_2,
        };
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            if i > 0 {
                *v *= factor;
            }
        }
        out.sidedness = target;
        out
    }
}

/// Double-sided ASD of a real time series by rectangular-windowed DFT.
///
/// Non-integer-second tails are truncated, never zero-padded, to preserve
/// noise statistics; series shorter than one second are transformed whole.
pub fn asd(series: &[f64], sample_rate_hz: f64) -> Result<Asd> {
    if series.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot transform an empty series".into(),
        ));
    }
    if !(sample_rate_hz > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample rate must be positive, got {sample_rate_hz}"
        )));
    }
    let whole_seconds = (series.len() as f64 / sample_rate_hz).floor();
    let n = if whole_seconds >= 1.0 {
        ((whole_seconds * sample_rate_hz).floor() as usize).min(series.len())
    } else {
        series.len()
    };
    let df = sample_rate_hz / n as f64;

    let mut buf: Vec<Complex64> = series[..n]
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let n_bins = n / 2 + 1;
    let norm = 1.0 / (n as f64 * df.sqrt());
    let values = buf[..n_bins].iter().map(|c| c.norm() * norm).collect();
    Ok(Asd {
        bin_hz: df,
        sidedness: Sidedness::DoubleSided,
        values,
        calibration: None,
        notches_hz: Vec::new(),
        sample_rate_hz,
        n_samples: n,
    })
}

/// Per-bin rms average of spectra on identical grids: sqrt(mean of squared
/// magnitudes). This, not the plain mean, preserves total noise power.
pub fn rms_average(spectra: &[Asd]) -> Result<Asd> {
    let first = spectra
        .first()
        .ok_or_else(|| Error::InvalidParameter("rms_average of zero spectra".into()))?;
    for s in &spectra[1..] {
        if s.values.len() != first.values.len()
            || (s.bin_hz - first.bin_hz).abs() > 1e-9 * first.bin_hz
            || s.sidedness != first.sidedness
        {
            return Err(Error::GridMismatch(format!(
                "{} bins at {} Hz vs {} bins at {} Hz",
                s.values.len(),
                s.bin_hz,
                first.values.len(),
                first.bin_hz
            )));
        }
    }
    let mut out = first.clone();
    for (i, v) in out.values.iter_mut().enumerate() {
        let power: f64 = spectra
            .iter()
            .map(|s| s.values[i] * s.values[i])
            .sum::<f64>()
            / spectra.len() as f64;
        *v = power.sqrt();
    }
    Ok(out)
}

/// Scale a voltage spectrum to field units using a known test line: the
/// |test_bin_hz| bin of the double-sided ASD is set to known_rms/sqrt(2).
///
/// Returns the calibrated spectrum; the scale factor (T/V) is recorded in
/// `calibration`.
pub fn calibrate_asd(spectrum: &Asd, test_bin_hz: f64, known_rms_tesla: f64) -> Result<Asd> {
    if !(known_rms_tesla > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "known rms field must be positive, got {known_rms_tesla}"
        )));
    }
    let bin = spectrum.bin_of(test_bin_hz);
    if bin == 0 || bin + 1 >= spectrum.values.len() {
        return Err(Error::CalibrationBin(format!(
            "test frequency {test_bin_hz} Hz outside the interior of the spectrum"
        )));
    }
    let v = spectrum.values[bin];
    let total_power: f64 = spectrum.values.iter().map(|x| x * x).sum();
    if !(v > spectrum.values[bin - 1] && v > spectrum.values[bin + 1])
        || !(v * v >= 1e-12 * total_power)
    {
        return Err(Error::CalibrationBin(format!(
            "bin at {test_bin_hz} Hz is not a dominant local maximum; test line absent or miscalibrated"
        )));
    }
    let scale = known_rms_tesla / std::f64::consts::SQRT_2 / v;
    let mut out = spectrum.clone();
    for val in &mut out.values {
        *val *= scale;
    }
    out.calibration = Some(scale);
    Ok(out)
}

/// Mark 1-Hz-wide notches: the listed bins are excluded from sensitivity
/// statistics but are not zeroed in exports.
pub fn notch(spectrum: &Asd, freqs_hz: &[f64]) -> Result<Asd> {
    for &f in freqs_hz {
        if f < 0.0 || f > spectrum.nyquist_hz() {
            return Err(Error::BandSelection(format!(
                "notch at {f} Hz outside Nyquist band"
            )));
        }
    }
    let mut out = spectrum.clone();
    out.notches_hz.extend_from_slice(freqs_hz);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinSensMode {
    /// Median of an rms-averaged multi-acquisition spectrum.
    Averaged,
    /// Median of a single acquisition's spectrum, corrected by
    /// [`MEDIAN_CORRECTION_ALPHA`].
    SingleAcq,
}

/// Median-based minimum sensitivity over `band_hz` (inclusive), excluding
/// notched bins and DC. Even bin counts use the lower median, which is
/// deterministic and biases negligibly at ≥100 bins.
pub fn min_sensitivity(spectrum: &Asd, band_hz: (f64, f64), mode: MinSensMode) -> Result<f64> {
    let (lo, hi) = band_hz;
    if !(lo <= hi) || hi > spectrum.nyquist_hz() * (1.0 + 1e-12) {
        return Err(Error::BandSelection(format!(
            "band [{lo}, {hi}] Hz invalid for Nyquist {} Hz",
            spectrum.nyquist_hz()
        )));
    }
    let mut in_band: Vec<f64> = (0..spectrum.values.len())
        .filter(|&i| i > 0)
        .filter(|&i| {
            let f = spectrum.frequency(i);
            f >= lo - spectrum.bin_hz / 2.0 && f <= hi + spectrum.bin_hz / 2.0
        })
        .filter(|&i| !spectrum.is_notched(i))
        .map(|i| spectrum.values[i])
        .collect();
    if in_band.is_empty() {
        return Err(Error::BandSelection("band contains no usable bins".into()));
    }
    in_band.sort_by(f64::total_cmp);
    let median = in_band[(in_band.len() - 1) / 2]; // lower median
    Ok(match mode {
        MinSensMode::Averaged => median,
        MinSensMode::SingleAcq => median * MEDIAN_CORRECTION_ALPHA,
    })
}

/// Default Ramsey sensitivity band: the final `fraction` of frequency bins.
pub fn final_fraction_band(spectrum: &Asd, fraction: f64) -> (f64, f64) {
    let hi = spectrum.nyquist_hz();
    (hi * (1.0 - fraction), hi)
}
