//! `sweep`: precession-time sweep producing a decay trace and its
//! fixed-p / free-p fits.

use super::{CmdError, CmdResult, ConfigExt, IoExt, NumericalExt};
use crate::config::RunConfig;
use crate::output::OutputDir;
use nvmag_core::analysis::{fit_decaying_sinusoid, DecayFit};
use nvmag_core::sequence::{build_sequence, simulate_run, P1Drive, Timings};
use serde::Serialize;

#[derive(Serialize)]
pub struct SweepReport {
    pub points: usize,
    pub fixed_p: FitOut,
    pub free_p: FitOut,
}

#[derive(Serialize)]
pub struct FitOut {
    pub ok: bool,
    pub error: Option<String>,
    pub amplitude: Option<f64>,
    pub decay_time_s: Option<f64>,
    pub stretch_exponent: Option<f64>,
    pub frequency_hz: Option<f64>,
    pub phase_rad: Option<f64>,
    pub decay_time_sigma_s: Option<f64>,
}

impl FitOut {
    fn from_result(r: Result<DecayFit, nvmag_core::Error>) -> Self {
        match r {
            Ok(fit) => FitOut {
                ok: true,
                error: None,
                amplitude: Some(fit.amplitude),
                decay_time_s: Some(fit.decay_time_s),
                stretch_exponent: Some(fit.stretch_exponent),
                frequency_hz: Some(fit.frequency_hz),
                phase_rad: Some(fit.phase_rad),
                decay_time_sigma_s: Some(fit.uncertainties[1]),
            },
            Err(e) => FitOut {
                ok: false,
                error: Some(e.to_string()),
                amplitude: None,
                decay_time_s: None,
                stretch_exponent: None,
                frequency_hz: None,
                phase_rad: None,
                decay_time_sigma_s: None,
            },
        }
    }
}

/// Simulate the sweep trace: the sequence keeps its total length (fixed
/// repetition rate) while the free-precession window varies, with the dead
/// budget absorbing the difference.
pub fn sweep_trace(config: &RunConfig, seed: u64) -> CmdResult<(Vec<f64>, Vec<f64>)> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| CmdError::Config(anyhow::anyhow!("sweep requires a [sweep] section")))?;
    if sweep.points < 2 {
        return Err(CmdError::Config(anyhow::anyhow!(
            "sweep grid of {} point(s) is unfittable; need at least 2 (and ≥6 to fit)",
            sweep.points
        )));
    }
    let base = &config.sequence;
    let total = base.t_init_s + base.tau_s + base.t_read_s + base.t_dead_s;
    let fixed_overhead = base.t_init_s + base.t_read_s;
    if sweep.tau_max_s > total - fixed_overhead {
        return Err(CmdError::Config(anyhow::anyhow!(
            "tau_max {} s does not fit in the fixed sequence length {} s",
            sweep.tau_max_s,
            total
        )));
    }
    let env = config.environment();
    let response = config.response.response();
    let detector = config.detector.params();
    let noise = config.noise.noise();

    let mut taus = Vec::with_capacity(sweep.points as usize);
    let mut signals = Vec::with_capacity(sweep.points as usize);
    for i in 0..sweep.points {
        let tau = sweep.tau_min_s
            + (sweep.tau_max_s - sweep.tau_min_s) * f64::from(i) / f64::from(sweep.points - 1);
        let timings = Timings {
            t_init_s: base.t_init_s,
            tau_s: tau,
            t_read_s: base.t_read_s,
            t_dead_s: total - fixed_overhead - tau,
        };
        let spec = build_sequence(
            base.kind,
            base.basis,
            timings,
            None,
            base.modulation_rad_per_s,
            base.detunings_hz.clone(),
            match base.p1_drive_s {
                Some(d) => P1Drive::On { duration_s: d },
                None => P1Drive::Off,
            },
            base.subtraction
                .unwrap_or(nvmag_core::sequence::Subtraction::None),
        )
        .config_err()?;
        let stream = simulate_run(
            &spec,
            &env,
            &response,
            &detector,
            &noise,
            base.base_phase_rad,
            sweep.duration_per_point_s,
            seed.wrapping_add(u64::from(i)),
        )
        .numerical()?;
        let mean = stream.combined.iter().sum::<f64>() / stream.combined.len() as f64;
        taus.push(tau);
        signals.push(mean);
    }
    Ok((taus, signals))
}

pub fn run(config: &RunConfig, out: &OutputDir, seed: u64, json: bool) -> CmdResult<()> {
    let (taus, signals) = sweep_trace(config, seed)?;

    let file = out.create("trace.csv").io_err()?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["tau_s", "signal_volts"])
        .map_err(|e| CmdError::Io(e.into()))?;
    for (t, s) in taus.iter().zip(&signals) {
        w.write_record([format!("{t:.9e}"), format!("{s:.9e}")])
            .map_err(|e| CmdError::Io(e.into()))?;
    }
    w.flush().map_err(|e| CmdError::Io(e.into()))?;

    let report = SweepReport {
        points: taus.len(),
        fixed_p: FitOut::from_result(fit_decaying_sinusoid(&taus, &signals, Some(1.0))),
        free_p: FitOut::from_result(fit_decaying_sinusoid(&taus, &signals, None)),
    };
    out.write_json("fits.json", &report).io_err()?;

    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
    } else {
        match (&report.fixed_p.ok, report.fixed_p.decay_time_s) {
            (true, Some(t)) => println!(
                "fixed-p fit: T = {:.2} us (sigma {:.2} us)",
                t * 1e6,
                report.fixed_p.decay_time_sigma_s.unwrap_or(0.0) * 1e6
            ),
            _ => println!(
                "fixed-p fit failed: {}",
                report.fixed_p.error.as_deref().unwrap_or("unknown")
            ),
        }
        match (&report.free_p.ok, report.free_p.decay_time_s) {
            (true, Some(t)) => println!(
                "free-p fit: T = {:.2} us, p = {:.3}",
                t * 1e6,
                report.free_p.stretch_exponent.unwrap_or(f64::NAN)
            ),
            _ => println!(
                "free-p fit failed: {}",
                report.free_p.error.as_deref().unwrap_or("unknown")
            ),
        }
    }
    Ok(())
}
