//! `simulate`: generate acquisitions of magnetometry data as CSV plus a
//! manifest sufficient to reproduce the run bit-exactly.

use super::{CmdError, CmdResult, ConfigExt, IoExt, NumericalExt};
use crate::config::{LoadedConfig, RunConfig};
use crate::output::OutputDir;
use nvmag_core::sequence::{simulate_run, ShotStream};
use serde::Serialize;
use std::io::Write;

#[derive(Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub acquisitions: u32,
    pub duration_per_acquisition_s: f64,
    pub f_rep_hz: f64,
    pub schedule_period: usize,
    pub schedule_weights: Vec<f64>,
    pub schedule_tone_phases: Vec<(f64, f64)>,
    pub combined_rate_hz: f64,
    pub shots_per_acquisition: usize,
    pub combined_per_acquisition: usize,
    pub files: Vec<String>,
}

pub struct Simulated {
    pub stream: ShotStream,
    pub shots_per_acq: usize,
    pub combined_per_acq: usize,
}

/// One continuous run covering all acquisitions; slicing happens on output.
pub fn simulate(config: &RunConfig, seed: u64, acquisitions: u32) -> CmdResult<Simulated> {
    let spec = config.sequence.build().config_err()?;
    let total_s = config.run.duration_s * f64::from(acquisitions);
    let stream = simulate_run(
        &spec,
        &config.environment(),
        &config.response.response(),
        &config.detector.params(),
        &config.noise.noise(),
        config.sequence.base_phase_rad,
        total_s,
        seed,
    )
    .numerical()?;
    let shots_per_acq = stream.raw_volts.len() / acquisitions as usize;
    let combined_per_acq = stream.combined.len() / acquisitions as usize;
    if combined_per_acq == 0 {
        return Err(CmdError::Config(anyhow::anyhow!(
            "each acquisition must cover at least one schedule period"
        )));
    }
    Ok(Simulated {
        stream,
        shots_per_acq,
        combined_per_acq,
    })
}

pub fn run(
    loaded: &LoadedConfig,
    out: &OutputDir,
    seed: u64,
    acquisitions: u32,
    json: bool,
) -> CmdResult<()> {
    let sim = simulate(&loaded.config, seed, acquisitions)?;
    let stream = &sim.stream;
    let period = stream.schedule_period;

    let mut files = Vec::new();
    for acq in 0..acquisitions as usize {
        let name = format!("acq_{acq:03}.csv");
        let file = out.create(&name).io_err()?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["shot_index", "time_s", "raw_volts", "combined_volts"])
            .map_err(|e| CmdError::Io(e.into()))?;
        let lo = acq * sim.shots_per_acq;
        let hi = lo + sim.shots_per_acq;
        for i in lo..hi {
            // a combined sample is defined on the last shot of each period
            let combined = if (i + 1) % period == 0 && (i / period) < stream.combined.len() {
                format!("{:.9e}", stream.combined[i / period])
            } else {
                String::new()
            };
            w.write_record([
                i.to_string(),
                format!("{:.9e}", stream.shot_time_s(i)),
                format!("{:.9e}", stream.raw_volts[i]),
                combined,
            ])
            .map_err(|e| CmdError::Io(e.into()))?;
        }
        w.flush().map_err(|e| CmdError::Io(e.into()))?;
        files.push(name);
    }

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_sha256: loaded.sha256.clone(),
        seed,
        acquisitions,
        duration_per_acquisition_s: loaded.config.run.duration_s,
        f_rep_hz: stream.f_rep_hz,
        schedule_period: period,
        schedule_weights: stream.schedule.weights.clone(),
        schedule_tone_phases: stream.schedule.tone_phases.clone(),
        combined_rate_hz: stream.combined_rate_hz(),
        shots_per_acquisition: sim.shots_per_acq,
        combined_per_acquisition: sim.combined_per_acq,
        files,
    };
    out.write_json("manifest.json", &manifest).io_err()?;

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&manifest).expect("manifest serializes")
        );
    } else {
        println!(
            "simulated {} acquisition(s) of {} s at f_rep = {:.1} Hz ({} shots, {} combined samples each)",
            acquisitions,
            loaded.config.run.duration_s,
            stream.f_rep_hz,
            sim.shots_per_acq,
            sim.combined_per_acq
        );
        println!("wrote {} + manifest.json", out.path("acq_*.csv").display());
        std::io::stdout().flush().ok();
    }
    Ok(())
}
