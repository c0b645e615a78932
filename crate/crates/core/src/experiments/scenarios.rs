//! Named, reproducible scenarios.

use std::path::Path;

use crate::error::{Error, Result};

use super::config::{parse_config, RunConfig};
use super::run::{self, DressedTable, RunReport, VeffTable};
use super::sweep::{self, SweepReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Bare and drive-averaged trap profiles.
    Veff,
    /// Dressed branches and the averaged lower branch.
    Dressed,
    Evolve,
    Sweep {
        param: &'static str,
        values: &'static [&'static str],
    },
}

#[derive(Debug, Clone, Copy)]
pub struct NamedScenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub config: &'static str,
    pub action: Action,
}

const CUT_TRAP_1D: &str = "\
grid.ndim = 1
grid.half_extents = [64]
grid.points = [2048]
trap.v_cut = 80
drive.alpha0 = 30
drive.omega = 10
coupling.g_eff = 100
";

const FIG1B: &str = "\
grid.ndim = 1
grid.half_extents = [64]
grid.points = [2048]
trap.v_cut = none
drive.alpha0 = 30
drive.omega = 2.5
coupling.g_eff = 100
two_level.omega_r = 100
two_level.delta = 200
";

const FIG2A: &str = "\
grid.ndim = 1
grid.half_extents = [64]
grid.points = [2048]
trap.v_cut = 80
drive.alpha0 = 30
drive.omega = 10
drive.t_on_cycles = 150
coupling.g_eff = 100
propagation.cycles_total = 300
output.snapshot_every_cycles = 50
";

const FIG2B: &str = "\
grid.ndim = 1
grid.half_extents = [64]
grid.points = [2048]
trap.v_cut = none
drive.alpha0 = 30
drive.omega = 2.5
drive.t_on_cycles = 150
coupling.g_eff = 100
two_level.omega_r = 100
two_level.delta = 200
propagation.cycles_total = 300
output.snapshot_every_cycles = 50
";

const FIG3_2D: &str = "\
grid.ndim = 2
grid.half_extents = [8, 96]
grid.points = [128, 1024]
trap.omega_x = 5
trap.omega_y = 5
trap.v_cut = 30
drive.alpha0 = 60
drive.omega = 10
drive.t_on_cycles = 250
coupling.g_eff = 100
propagation.cycles_total = 400
output.snapshot_every_cycles = 100
";

const FIG3_3D: &str = "\
grid.ndim = 3
grid.half_extents = [6, 6, 96]
grid.points = [64, 64, 512]
trap.omega_x = 5
trap.omega_y = 5
trap.v_cut = 30
drive.alpha0 = 60
drive.omega = 10
drive.t_on_cycles = 250
coupling.g_eff = 100
propagation.cycles_total = 400
output.snapshot_every_cycles = 100
";

const STABILIZATION: &str = "\
grid.ndim = 1
grid.half_extents = [64]
grid.points = [2048]
trap.v_cut = 50
drive.alpha0 = 15
drive.omega = 10
drive.t_on_cycles = 100
coupling.g_eff = 100
propagation.cycles_total = 400
";

pub const SCENARIOS: &[NamedScenario] = &[
    NamedScenario {
        name: "fig1a",
        summary: "cut harmonic trap (V_c = 80) and its average over the drive for alpha0 = 30",
        config: CUT_TRAP_1D,
        action: Action::Veff,
    },
    NamedScenario {
        name: "fig1b",
        summary: "dressed branches V-/V+ for omega_R = 100, Delta = 200 and the averaged lower branch at alpha0 = 30",
        config: FIG1B,
        action: Action::Dressed,
    },
    NamedScenario {
        name: "fig2a",
        summary: "density over 300 shaking cycles in the cut trap: alpha0 = 30, omega = 10, t_on = 150 cycles, gN = 100",
        config: FIG2A,
        action: Action::Evolve,
    },
    NamedScenario {
        name: "fig2b",
        summary: "total density of the microwave-coupled two-state model: alpha0 = 30, omega = 2.5, omega_R = 100, Delta = 200",
        config: FIG2B,
        action: Action::Evolve,
    },
    NamedScenario {
        name: "fig3",
        summary: "(x, z) cigar trap, omega_x = 5, alpha0 = 60, V_c = 30, 400 cycles; pass --3d for the full 64x64x512 run",
        config: FIG3_2D,
        action: Action::Evolve,
    },
    NamedScenario {
        name: "stabilization",
        summary: "escape rate at V_c = 50, omega = 10 for alpha0 = 15 and 20",
        config: STABILIZATION,
        action: Action::Sweep {
            param: "drive.alpha0",
            values: &["15", "20"],
        },
    },
];

pub fn scenario_names() -> Vec<&'static str> {
    SCENARIOS.iter().map(|s| s.name).collect()
}

pub fn find_scenario(name: &str) -> Result<&'static NamedScenario> {
    SCENARIOS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario {
            name: name.to_string(),
            available: scenario_names(),
        })
}

/// The resolved configuration of a named scenario.
pub fn scenario_config(name: &str, three_d: bool) -> Result<RunConfig> {
    let s = find_scenario(name)?;
    if three_d && name != "fig3" {
        return Err(Error::InvalidParameter("only fig3 has a 3D variant".into()));
    }
    parse_config(if three_d { FIG3_3D } else { s.config })
}

#[derive(Debug, Clone)]
pub enum ScenarioOutcome {
    Veff(VeffTable),
    Dressed(DressedTable),
    Run(Box<RunReport>),
    Sweep(SweepReport),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScenarioOptions {
    pub three_d: bool,
    pub workers: usize,
}

/// Runs a named scenario, writing its outputs under `out`.
pub fn run_scenario(name: &str, out: &Path, options: ScenarioOptions) -> Result<ScenarioOutcome> {
    let s = find_scenario(name)?;
    let mut cfg = scenario_config(name, options.three_d)?;
    cfg.set("output.directory", &out.display().to_string())?;
    Ok(match s.action {
        Action::Veff => ScenarioOutcome::Veff(run::write_veff(&cfg, out)?),
        Action::Dressed => ScenarioOutcome::Dressed(run::write_dressed(&cfg, out)?),
        Action::Evolve => ScenarioOutcome::Run(Box::new(run::run_config(&cfg, out)?)),
        Action::Sweep { param, values } => {
            let values: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            ScenarioOutcome::Sweep(sweep::sweep(
                &cfg,
                param,
                &values,
                options.workers.max(1),
                Some(out),
            )?)
        }
    })
}
