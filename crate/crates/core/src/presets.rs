//! Named parameter sets for the reproduced experiments.

use crate::dynamics::DiffParams;
use crate::signals::{NoiseSpec, SignalSpec, DEFAULT_SEED};
use crate::simulation::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentPreset {
    pub name: &'static str,
    pub description: &'static str,
    pub params: DiffParams,
    pub signal: SignalSpec,
    pub sim: SimConfig,
}

pub const PRESET_NAMES: [&str; 8] = [
    "paper-3A",
    "paper-3B",
    "paper-3C-linear",
    "paper-3C-hybrid",
    "paper-4-linear",
    "paper-4-nonlinear",
    "paper-4-hybrid",
    "paper-5",
];

const EPS_45: f64 = 1.0 / 45.0;

fn noise(power: f64) -> NoiseSpec {
    NoiseSpec {
        power,
        sample_time: 0.01,
        seed: DEFAULT_SEED,
    }
}

fn build(
    name: &'static str,
    description: &'static str,
    params: DiffParams,
    signal: SignalSpec,
    t_end: f64,
) -> ExperimentPreset {
    ExperimentPreset {
        name,
        description,
        params,
        signal,
        sim: SimConfig::for_run(&params, &signal, t_end),
    }
}

/// Looks up a preset by name (case-insensitive).
pub fn preset(name: &str) -> Option<ExperimentPreset> {
    let key = PRESET_NAMES.iter().find(|n| n.eq_ignore_ascii_case(name))?;
    let large = SignalSpec::sine(5.0, 2.0).with_noise(noise(0.01));
    let small = SignalSpec::sine(0.5, 2.0).with_noise(noise(1e-4));
    let unit = SignalSpec::sine(1.0, 2.0);
    Some(match *key {
        "paper-3A" => build(
            "paper-3A",
            "linear differentiator, large natural frequency, 5 sin 2t + noise",
            DiffParams::linear(EPS_45, 0.05, 0.3),
            large,
            10.0,
        ),
        "paper-3B" => build(
            "paper-3B",
            "nonlinear differentiator, 5 sin 2t + noise",
            DiffParams::nonlinear(EPS_45, 0.099, 0.268, 0.5),
            large,
            10.0,
        ),
        "paper-3C-linear" => build(
            "paper-3C-linear",
            "linear differentiator, small natural frequency, 0.5 sin 2t + noise",
            DiffParams::linear(EPS_45, 0.005, 0.05),
            small,
            10.0,
        ),
        "paper-3C-hybrid" => build(
            "paper-3C-hybrid",
            "hybrid differentiator, 0.5 sin 2t + noise",
            DiffParams::hybrid(EPS_45, 0.005, 0.005, 0.05, 0.005, 0.5),
            small,
            10.0,
        ),
        "paper-4-linear" => build(
            "paper-4-linear",
            "linear differentiator for the frequency sweep, R = 100",
            DiffParams::linear(0.01, 0.1, 0.3),
            unit,
            10.0,
        ),
        "paper-4-nonlinear" => build(
            "paper-4-nonlinear",
            "nonlinear differentiator for the frequency sweep, R = 45",
            DiffParams::nonlinear(EPS_45, 0.015, 0.015, 0.6),
            unit,
            10.0,
        ),
        "paper-4-hybrid" => build(
            "paper-4-hybrid",
            "hybrid differentiator for the frequency sweep, R = 100",
            DiffParams::hybrid(0.01, 0.1, 0.015, 0.3, 0.015, 0.6),
            unit,
            10.0,
        ),
        "paper-5" => build(
            "paper-5",
            "hybrid differentiator reconstructing the plant disturbance",
            DiffParams::hybrid(EPS_45, 0.05, 0.015, 0.3, 0.015, 0.6),
            SignalSpec::zero().with_noise(noise(1e-4)),
            20.0,
        ),
        _ => unreachable!(),
    })
}
