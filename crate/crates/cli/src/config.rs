//! Run configuration: a declarative document with explicit unit suffixes in
//! every key name. TOML is the native format; a JSON mirror with identical
//! structure is accepted. Unknown keys are rejected.

use anyhow::Context;
use nvmag_core::detector::{DetectorParams, NoiseConfig};
use nvmag_core::sequence::{
    build_sequence, Basis, EnsembleResponse, FieldEnvironment, P1Drive, SequenceKind, SequenceSpec,
    Subtraction, TestWaveform,
};
use nvmag_core::spin::{BiasField, NvConstants, P1Constants};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub spin: SpinSection,
    #[serde(default)]
    pub bias: BiasSection,
    pub sequence: SequenceSection,
    #[serde(default)]
    pub response: ResponseSection,
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub test_field: Option<TestFieldSection>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub coil: Option<CoilSection>,
    #[serde(default)]
    pub budget: Option<BudgetSection>,
    #[serde(default)]
    pub calibrate: Option<CalibrateSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSection {
    pub zero_field_splitting_hz: f64,
    pub zfs_temp_coeff_hz_per_k: f64,
    pub gyromagnetic_rad_per_s_per_tesla: f64,
    pub hyperfine_15n_hz: f64,
    pub temperature_offset_k: f64,
    #[serde(default)]
    pub p1: P1Section,
}

impl Default for SpinSection {
    fn default() -> Self {
        let c = NvConstants::default();
        Self {
            zero_field_splitting_hz: c.zero_field_splitting_hz,
            zfs_temp_coeff_hz_per_k: c.zfs_temp_coeff_hz_per_k,
            gyromagnetic_rad_per_s_per_tesla: c.gyromagnetic_rad_per_s_tesla,
            hyperfine_15n_hz: c.hyperfine_15n_hz,
            temperature_offset_k: 0.0,
            p1: P1Section::default(),
        }
    }
}

impl SpinSection {
    pub fn nv_constants(&self) -> NvConstants {
        NvConstants {
            zero_field_splitting_hz: self.zero_field_splitting_hz,
            zfs_temp_coeff_hz_per_k: self.zfs_temp_coeff_hz_per_k,
            gyromagnetic_rad_per_s_tesla: self.gyromagnetic_rad_per_s_per_tesla,
            hyperfine_15n_hz: self.hyperfine_15n_hz,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct P1Section {
    pub a_parallel_hz: f64,
    pub a_perp_hz: f64,
    pub zeeman_hz_per_tesla: f64,
    pub drive_axis: [f64; 3],
}

impl Default for P1Section {
    fn default() -> Self {
        let c = P1Constants::default();
        Self {
            a_parallel_hz: c.a_parallel_hz,
            a_perp_hz: c.a_perp_hz,
            zeeman_hz_per_tesla: c.zeeman_hz_per_tesla,
            drive_axis: [0.0, 0.0, 1.0],
        }
    }
}

impl P1Section {
    pub fn p1_constants(&self) -> P1Constants {
        P1Constants {
            a_parallel_hz: self.a_parallel_hz,
            a_perp_hz: self.a_perp_hz,
            zeeman_hz_per_tesla: self.zeeman_hz_per_tesla,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSection {
    pub vector_tesla: [f64; 3],
    #[serde(default)]
    pub gradient_tesla: f64,
}

impl Default for BiasSection {
    fn default() -> Self {
        Self {
            vector_tesla: [2.23e-4, 0.0, 0.0],
            gradient_tesla: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub kind: SequenceKind,
    pub basis: Basis,
    pub t_init_s: f64,
    pub tau_s: f64,
    pub t_read_s: f64,
    pub t_dead_s: f64,
    #[serde(default)]
    pub f_rep_hz: Option<f64>,
    #[serde(default)]
    pub subtraction: Option<Subtraction>,
    #[serde(default)]
    pub base_phase_rad: f64,
    #[serde(default)]
    pub modulation_rad_per_s: f64,
    #[serde(default)]
    pub detunings_hz: Vec<f64>,
    /// P1 drive duration within each sequence; absent = off.
    #[serde(default)]
    pub p1_drive_s: Option<f64>,
}

impl SequenceSection {
    pub fn build(&self) -> nvmag_core::Result<SequenceSpec> {
        build_sequence(
            self.kind,
            self.basis,
            nvmag_core::sequence::Timings {
                t_init_s: self.t_init_s,
                tau_s: self.tau_s,
                t_read_s: self.t_read_s,
                t_dead_s: self.t_dead_s,
            },
            self.f_rep_hz,
            self.modulation_rad_per_s,
            self.detunings_hz.clone(),
            match self.p1_drive_s {
                Some(d) => P1Drive::On { duration_s: d },
                None => P1Drive::Off,
            },
            self.subtraction.unwrap_or(Subtraction::None),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResponseSection {
    pub contrast: f64,
    pub init_efficiency: f64,
    pub decay_time_s: f64,
    pub stretch_exponent: f64,
    pub mean_level: f64,
}

impl Default for ResponseSection {
    fn default() -> Self {
        let r = EnsembleResponse::default();
        Self {
            contrast: r.contrast,
            init_efficiency: r.init_efficiency,
            decay_time_s: r.decay_time_s,
            stretch_exponent: r.stretch_exponent,
            mean_level: r.mean_level,
        }
    }
}

impl ResponseSection {
    pub fn response(&self) -> EnsembleResponse {
        EnsembleResponse {
            contrast: self.contrast,
            init_efficiency: self.init_efficiency,
            decay_time_s: self.decay_time_s,
            stretch_exponent: self.stretch_exponent,
            mean_level: self.mean_level,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub i_sig_amps: f64,
    pub i_ref_amps: f64,
    pub c_sig_farads: f64,
    pub c_ref_farads: f64,
    pub gain: f64,
    pub digitizer_rms_volts: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        let d = DetectorParams::default();
        Self {
            i_sig_amps: d.i_sig_amps,
            i_ref_amps: d.i_ref_amps,
            c_sig_farads: d.c_sig_farads,
            c_ref_farads: d.c_ref_farads,
            gain: d.gain,
            digitizer_rms_volts: d.digitizer_rms_volts,
        }
    }
}

impl DetectorSection {
    pub fn params(&self) -> DetectorParams {
        DetectorParams {
            i_sig_amps: self.i_sig_amps,
            i_ref_amps: self.i_ref_amps,
            c_sig_farads: self.c_sig_farads,
            c_ref_farads: self.c_ref_farads,
            gain: self.gain,
            digitizer_rms_volts: self.digitizer_rms_volts,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub signal_shot: bool,
    pub reference_shot: bool,
    pub digitizer: bool,
    #[serde(default)]
    pub rin_rel_rms: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            signal_shot: true,
            reference_shot: true,
            digitizer: true,
            rin_rel_rms: 0.0,
        }
    }
}

impl NoiseSection {
    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig {
            signal_shot: self.signal_shot,
            reference_shot: self.reference_shot,
            digitizer: self.digitizer,
            rin_rel_rms: self.rin_rel_rms,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum TestFieldSection {
    Constant {
        tesla: f64,
    },
    Sinusoid {
        rms_tesla: f64,
        freq_hz: f64,
        phase_rad: f64,
    },
    SquareSync {
        amplitude_tesla: f64,
    },
}

impl TestFieldSection {
    pub fn waveform(&self) -> TestWaveform {
        match *self {
            TestFieldSection::Constant { tesla } => TestWaveform::Constant { tesla },
            TestFieldSection::Sinusoid {
                rms_tesla,
                freq_hz,
                phase_rad,
            } => TestWaveform::Sinusoid {
                amplitude_tesla: rms_tesla * std::f64::consts::SQRT_2,
                freq_hz,
                phase_rad,
            },
            TestFieldSection::SquareSync { amplitude_tesla } => {
                TestWaveform::SquareSync { amplitude_tesla }
            }
        }
    }

    pub fn rms_tesla(&self) -> f64 {
        self.waveform().rms_tesla()
    }

    pub fn freq_hz(&self) -> Option<f64> {
        match *self {
            TestFieldSection::Sinusoid { freq_hz, .. } => Some(freq_hz),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Length of one acquisition, s.
    pub duration_s: f64,
    pub acquisitions: u32,
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            duration_s: 1.0,
            acquisitions: 10,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum BandSection {
    FinalFraction { fraction: f64 },
    Full,
    Range { lo_hz: f64, hi_hz: f64 },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default)]
    pub band: Option<BandSection>,
    #[serde(default)]
    pub notches_hz: Vec<f64>,
    /// Calibration line frequency; defaults to the test-field frequency.
    #[serde(default)]
    pub calibration_freq_hz: Option<f64>,
    /// Known rms field of the calibration line; defaults to the test-field
    /// rms.
    #[serde(default)]
    pub calibration_rms_tesla: Option<f64>,
    /// Measured magnetometer slope, signal volts per tesla. When set, the
    /// spectrum is converted by dividing by this slope (the Hahn-echo
    /// convention) instead of scaling to a test line.
    #[serde(default)]
    pub slope_volts_per_tesla: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub tau_min_s: f64,
    pub tau_max_s: f64,
    pub points: u32,
    /// Simulated wall time per grid point, s.
    pub duration_per_point_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilSection {
    pub radius_m: f64,
    pub turns: u32,
    pub axial_offset_m: f64,
    pub series_resistance_ohms: f64,
    pub attenuation_db: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub photons_per_measurement: f64,
    #[serde(default)]
    pub photons_per_nv: Option<f64>,
    #[serde(default)]
    pub nv_count: Option<f64>,
    /// Measured C·exp(−(τ/T)^p) override for the shot-noise forms.
    #[serde(default)]
    pub measured_effective_contrast: Option<f64>,
    /// Normalized contrast-sequence readings [S1, S2, S3, S4]; when given,
    /// the report extracts C and κ_I from them.
    #[serde(default)]
    pub contrast_signals: Option<[f64; 4]>,
    #[serde(default)]
    pub compare: Vec<ProtocolEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolEntry {
    pub name: String,
    pub delta_ms: f64,
    pub decay_time_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSection {
    /// κ to embed in the simulated fringe scan, T per drive volt.
    pub configured_kappa_tesla_per_volt: f64,
    pub scan_span_volts: f64,
    pub scan_points: u32,
    pub duration_per_point_s: f64,
}

impl RunConfig {
    pub fn environment(&self) -> FieldEnvironment {
        FieldEnvironment {
            bias: BiasField::new(self.bias.vector_tesla),
            test: self.test_field.as_ref().map(|t| t.waveform()),
            gradient_tesla: self.bias.gradient_tesla,
        }
    }
}

/// A loaded config plus the hash of its raw bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
}

pub fn load(path: &Path) -> anyhow::Result<LoadedConfig> {
    let raw = std::fs::read(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let text = std::str::from_utf8(&raw).context("config file is not UTF-8")?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let config: RunConfig = if is_json {
        serde_json::from_str(text).map_err(|e| anyhow::anyhow!("config schema error: {e}"))?
    } else {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("config schema error: {e}"))?
    };
    if config.schema_version != SCHEMA_VERSION {
        anyhow::bail!(
            "config schema_version {} unsupported (expected {SCHEMA_VERSION})",
            config.schema_version
        );
    }
    let mut hasher = Sha256::new();
    hasher.update(&raw);
    let sha256 = format!("{:x}", hasher.finalize());
    Ok(LoadedConfig { config, sha256 })
}
