//! `resonances`: NV Zeeman table with degeneracy grouping plus the P1
//! transition table.

use super::{CmdResult, ConfigExt, NumericalExt};
use crate::config::RunConfig;
use nvmag_core::spin::{nv_resonances, p1_transitions, BiasField, ElectronTransition, NuclearSpin};
use serde::Serialize;

#[derive(Serialize)]
pub struct ResonanceReport {
    pub nv_lines: Vec<NvLineOut>,
    pub nv_groups_hz: Vec<f64>,
    pub secular_warning: bool,
    pub max_secular_shift_hz: f64,
    pub p1_transitions: Vec<P1Out>,
}

#[derive(Serialize)]
pub struct NvLineOut {
    pub class_index: usize,
    pub nuclear: String,
    pub transition: String,
    pub frequency_hz: f64,
}

#[derive(Serialize)]
pub struct P1Out {
    pub frequency_hz: f64,
    pub weight: f64,
    pub allowed: bool,
}

pub fn build_report(config: &RunConfig) -> CmdResult<ResonanceReport> {
    let consts = config.spin.nv_constants();
    let bias = BiasField::new(config.bias.vector_tesla);
    let set = nv_resonances(&consts, &bias, config.spin.temperature_offset_k).numerical()?;
    let p1 = p1_transitions(
        &config.spin.p1.p1_constants(),
        &bias,
        config.spin.p1.drive_axis,
    )
    .config_err()?;
    Ok(ResonanceReport {
        nv_lines: set
            .lines
            .iter()
            .map(|l| NvLineOut {
                class_index: l.class_index,
                nuclear: match l.nuclear {
                    NuclearSpin::Up => "up".into(),
                    NuclearSpin::Down => "down".into(),
                },
                transition: match l.transition {
                    ElectronTransition::Plus => "0->+1".into(),
                    ElectronTransition::Minus => "0->-1".into(),
                },
                frequency_hz: l.frequency_hz,
            })
            .collect(),
        nv_groups_hz: set.group_frequencies(),
        secular_warning: set.secular_warning,
        max_secular_shift_hz: set.max_secular_shift_hz,
        p1_transitions: p1
            .iter()
            .map(|t| P1Out {
                frequency_hz: t.frequency_hz,
                weight: t.weight,
                allowed: t.allowed,
            })
            .collect(),
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
    println!("NV Zeeman resonances ({} lines)", report.nv_lines.len());
    println!(
        "{:>5}  {:>7}  {:>10}  {:>16}",
        "class", "nuclear", "transition", "frequency (Hz)"
    );
    for l in &report.nv_lines {
        println!(
            "{:>5}  {:>7}  {:>10}  {:>16.0}",
            l.class_index, l.nuclear, l.transition, l.frequency_hz
        );
    }
    println!(
        "\ngrouped frequencies ({} distinct):",
        report.nv_groups_hz.len()
    );
    for f in &report.nv_groups_hz {
        println!("  {f:>16.0} Hz");
    }
    if report.secular_warning {
        println!(
            "warning: transverse-field shift estimate {:.1} kHz exceeds the secular comfort zone",
            report.max_secular_shift_hz / 1e3
        );
    }
    println!("\nP1 transitions");
    println!(
        "{:>16}  {:>8}  {:>7}",
        "frequency (MHz)", "weight", "allowed"
    );
    for t in &report.p1_transitions {
        println!(
            "{:>16.3}  {:>8.4}  {:>7}",
            t.frequency_hz / 1e6,
            t.weight,
            if t.allowed { "yes" } else { "no" }
        );
    }
    Ok(())
}
