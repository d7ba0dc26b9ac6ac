//! `budget`: closed-form sensitivity report.

use super::{CmdError, CmdResult, ConfigExt, NumericalExt};
use crate::config::RunConfig;
use nvmag_core::budget::{
    contrast_and_init, gradient_tolerance, hahn_sensitivity_shot, improvement_ratio, optimal_tau,
    ramsey_sensitivity_full, ramsey_sensitivity_shot, readout_fidelity, BudgetInputs,
};
use nvmag_core::sequence::{Basis, SequenceKind};
use serde::Serialize;

#[derive(Serialize)]
pub struct BudgetReport {
    pub eta_shot_t_sqrt_s: f64,
    pub eta_full_t_sqrt_s: Option<f64>,
    pub readout_fidelity: Option<f64>,
    pub readout_sigma_r: Option<f64>,
    pub optimal_tau_s: f64,
    pub optimal_factor: f64,
    pub gradient_tolerance_sq_tesla: f64,
    pub gradient_tolerance_dq_tesla: f64,
    pub gradient_margin_ok: Option<bool>,
    pub contrast_check: Option<ContrastOut>,
    pub improvement_ratios: Vec<RatioOut>,
}

#[derive(Serialize)]
pub struct ContrastOut {
    pub contrast: f64,
    pub init_efficiency: f64,
    pub saturated: bool,
}

#[derive(Serialize)]
pub struct RatioOut {
    pub from: String,
    pub to: String,
    pub ratio: f64,
}

pub fn build_report(config: &RunConfig) -> CmdResult<BudgetReport> {
    let section = config
        .budget
        .as_ref()
        .ok_or_else(|| CmdError::Config(anyhow::anyhow!("budget requires a [budget] section")))?;
    let spec = config.sequence.build().config_err()?;
    let response = config.response.response();
    let env = config.environment();
    let tau = spec.timings.tau_s;

    let contrast = match section.measured_effective_contrast {
        // back out the contrast that reproduces the measured C·exp(−(τ/T)^p)
        Some(c_eff) => {
            c_eff * ((tau / response.decay_time_s).powf(response.stretch_exponent)).exp()
        }
        None => response.contrast,
    };
    let inputs = BudgetInputs {
        delta_ms: spec.basis.delta_ms(),
        contrast,
        decay_time_s: response.decay_time_s,
        stretch_exponent: response.stretch_exponent,
        photons_per_measurement: section.photons_per_measurement,
        timings: spec.timings,
        projection: env.projection(),
        photons_per_nv: section.photons_per_nv,
        nv_count: section.nv_count,
    };
    let eta_shot = match spec.kind {
        SequenceKind::HahnEcho | SequenceKind::HahnSweep => {
            hahn_sensitivity_shot(&inputs).numerical()?
        }
        _ => ramsey_sensitivity_shot(&inputs).numerical()?,
    };
    let eta_full = if inputs.photons_per_nv.is_some() && inputs.nv_count.is_some() {
        Some(ramsey_sensitivity_full(&inputs).numerical()?)
    } else {
        None
    };
    let fidelity = match section.photons_per_nv {
        Some(n_avg) => Some(readout_fidelity(contrast, n_avg).numerical()?),
        None => None,
    };
    let overhead = spec.timings.total() - tau;
    let (tau_star, factor) = optimal_tau(response.decay_time_s, 1.0, overhead).numerical()?;
    let grad_sq = gradient_tolerance(response.decay_time_s, Basis::Sq).numerical()?;
    let grad_dq = gradient_tolerance(response.decay_time_s, Basis::Dq).numerical()?;
    let gradient_margin_ok = (config.bias.gradient_tesla > 0.0).then(|| {
        let threshold = match spec.basis {
            Basis::Sq => grad_sq,
            Basis::Dq => grad_dq,
        };
        config.bias.gradient_tesla < threshold
    });

    let mut ratios = Vec::new();
    if section.compare.len() >= 2 {
        let reference = &section.compare[0];
        for other in &section.compare[1..] {
            let r = improvement_ratio(
                (reference.delta_ms, reference.decay_time_s),
                (other.delta_ms, other.decay_time_s),
                overhead,
            )
            .numerical()?;
            ratios.push(RatioOut {
                from: reference.name.clone(),
                to: other.name.clone(),
                ratio: r,
            });
        }
    }

    let contrast_check = match section.contrast_signals {
        Some(s) => Some(contrast_from_signals(s)?),
        None => None,
    };

    Ok(BudgetReport {
        eta_shot_t_sqrt_s: eta_shot,
        eta_full_t_sqrt_s: eta_full,
        readout_fidelity: fidelity.map(|f| f.0),
        readout_sigma_r: fidelity.map(|f| f.1),
        optimal_tau_s: tau_star,
        optimal_factor: factor,
        gradient_tolerance_sq_tesla: grad_sq,
        gradient_tolerance_dq_tesla: grad_dq,
        gradient_margin_ok,
        contrast_check,
        improvement_ratios: ratios,
    })
}

pub fn run(config: &RunConfig, json: bool) -> CmdResult<()> {
    let report = build_report(config)?;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        );
        return Ok(());
    }
    println!(
        "shot-noise-limited sensitivity: {:.1} fT·s^1/2",
        report.eta_shot_t_sqrt_s * 1e15
    );
    if let Some(full) = report.eta_full_t_sqrt_s {
        println!(
            "full-form sensitivity:          {:.1} fT·s^1/2",
            full * 1e15
        );
    }
    if let (Some(f), Some(s)) = (report.readout_fidelity, report.readout_sigma_r) {
        println!("readout fidelity F = {f:.4} (sigma_R = {s:.2})");
    }
    println!(
        "optimal precession time: {:.1} us (factor {:.3e})",
        report.optimal_tau_s * 1e6,
        report.optimal_factor
    );
    println!(
        "gradient tolerance: SQ {:.1} nT, DQ {:.1} nT (\"much less than\" bounds)",
        report.gradient_tolerance_sq_tesla * 1e9,
        report.gradient_tolerance_dq_tesla * 1e9
    );
    if let Some(ok) = report.gradient_margin_ok {
        println!(
            "configured gradient within tolerance: {}",
            if ok { "yes" } else { "NO" }
        );
    }
    if let Some(c) = &report.contrast_check {
        println!(
            "contrast sequence: C = {:.4}, kappa_I = {:.3}{}",
            c.contrast,
            c.init_efficiency,
            if c.saturated {
                ""
            } else {
                " (initialization not saturated)"
            }
        );
    }
    for r in &report.improvement_ratios {
        println!(
            "expected improvement {} -> {}: {:.2}x",
            r.from, r.to, r.ratio
        );
    }
    Ok(())
}

/// Contrast extraction from explicit four-sequence readings.
pub fn contrast_from_signals(s: [f64; 4]) -> CmdResult<ContrastOut> {
    let r = contrast_and_init(s[0], s[1], s[2], s[3]).numerical()?;
    Ok(ContrastOut {
        contrast: r.contrast,
        init_efficiency: r.init_efficiency,
        saturated: r.saturated,
    })
}
