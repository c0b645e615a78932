//! Executing a [`RunConfig`]: initial state, evolution, and output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::groundstate::{self, EffectiveGroundState, PotentialTag, StationaryState};
use crate::numerics::ScalarField;
use crate::observables::{self, EscapeReport};
use crate::potentials::{self, WellStructure};
use crate::propagation::{self, Scenario, Trajectory, TwoComponentState, WaveState};

use super::config::RunConfig;
use super::io;

/// Outcome of one configured run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub config: RunConfig,
    /// Stationary state the run started from.
    pub ground: StationaryState,
    pub trajectory: Trajectory,
    /// Loss fitted after the turn-on; `None` when too few records remain.
    pub escape: Option<EscapeReport>,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn final_norm(&self) -> f64 {
        self.trajectory.last().norm_total
    }

    pub fn final_separation(&self) -> Option<f64> {
        self.trajectory
            .last()
            .dichotomy
            .as_ref()
            .map(|d| d.separation)
    }
}

/// Potential the initial state is relaxed in: the bare trap, or the lower
/// dressed branch at rest for two-level runs.
pub fn initial_potential(cfg: &RunConfig) -> Result<ScalarField> {
    let grid = cfg.grid_spec()?;
    Ok(match cfg.two_level {
        None => potentials::shifted_trap_field(&grid, &cfg.trap, 0.0),
        Some(levels) => potentials::dressed_fields(&grid, &cfg.trap, 0.0, &levels).0,
    })
}

/// Ground state before shaking starts.
pub fn initial_ground(cfg: &RunConfig) -> Result<StationaryState> {
    let grid = cfg.grid_spec()?;
    let potential = initial_potential(cfg)?;
    let guess = groundstate::gaussian_guess(&grid, &cfg.trap, &[0.0]);
    let tag = match cfg.two_level {
        None => PotentialTag::Bare,
        Some(_) => PotentialTag::Custom("lower dressed branch".into()),
    };
    groundstate::solve_ground_from(&potential, cfg.coupling, guess, &cfg.ground, tag)
}

/// Ground state in the drive-averaged trap.
pub fn effective_ground(cfg: &RunConfig) -> Result<EffectiveGroundState> {
    groundstate::solve_ground_effective(
        &cfg.trap,
        cfg.drive.alpha0,
        cfg.coupling,
        &cfg.grid_spec()?,
        &cfg.ground,
    )
}

pub fn scenario_for(cfg: &RunConfig) -> Result<Scenario> {
    Ok(Scenario {
        trap: cfg.trap,
        drive: cfg.drive_schedule()?,
        coupling: cfg.coupling,
        two_level: cfg.two_level,
        config: cfg.propagator_config()?,
        mode: cfg.propagation.mode,
        t_final: cfg.t_final(),
        snapshot_times: cfg.snapshot_times(),
        reference: None,
    })
}

/// Runs a configuration in memory.
pub fn simulate(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let ground = initial_ground(cfg)?;
    let initial = match cfg.two_level {
        None => WaveState::Single(ground.psi.clone()),
        Some(levels) => WaveState::Two(TwoComponentState::lower_dressed(
            &ground.psi,
            &cfg.trap,
            &levels,
            0.0,
        )),
    };
    let scenario = scenario_for(cfg)?;
    let trajectory = propagation::evolve(initial, &scenario)?;
    let escape = escape_after_turn_on(cfg, &trajectory);
    Ok(RunReport {
        config: cfg.clone(),
        ground,
        trajectory,
        escape,
        wall_time: start.elapsed(),
    })
}

fn escape_after_turn_on(cfg: &RunConfig, trajectory: &Trajectory) -> Option<EscapeReport> {
    let t_on = cfg.drive.t_on_cycles * cfg.period();
    let t_end = trajectory.last().t;
    observables::escape_rate(
        &trajectory.times(),
        &trajectory.norms(),
        (t_on, t_end),
        cfg.period(),
    )
    .ok()
}

fn snapshot_name(t: f64, component: usize) -> String {
    format!("snap_t{t:012.4}_c{component}.gpes")
}

/// Writes `manifest.txt`, `timeseries.csv` and `snapshots/` under `dir`.
pub fn write_run(report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("snapshots"))?;
    io::write_timeseries(&report.trajectory, &dir.join("timeseries.csv"))?;
    let mut index = String::new();
    for s in &report.trajectory.snapshots {
        let name = snapshot_name(s.t, s.component);
        io::write_snapshot(&s.field, &dir.join("snapshots").join(&name), s.t)?;
        let _ = writeln!(
            index,
            "# snapshot t = {} component = {} file = snapshots/{name}",
            s.t, s.component
        );
    }
    let cfg = &report.config;
    let status = match report.trajectory.failed_at {
        None => "complete".to_string(),
        Some(step) => format!("failed at step {step}; outputs are partial"),
    };
    let mut m = String::new();
    let _ = writeln!(m, "# gpe-core {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(m, "# status = {status}");
    let _ = writeln!(m, "# wall_time_s = {:.3}", report.wall_time.as_secs_f64());
    let _ = writeln!(m, "# steps = {}", cfg.steps());
    let _ = writeln!(m, "# t_final = {}", cfg.t_final());
    let _ = writeln!(m, "# initial_mu = {}", report.ground.mu);
    if let Some(e) = &report.escape {
        let _ = writeln!(m, "# escape_rate_per_cycle = {:e}", e.rate_per_cycle);
    }
    m.push_str(&index);
    m.push('\n');
    m.push_str(&cfg.to_text());
    fs::write(dir.join("manifest.txt"), m)?;
    Ok(())
}

/// Runs a configuration and writes its outputs. A propagation failure still
/// writes the partial outputs before surfacing the step index.
pub fn run_config(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let report = simulate(cfg)?;
    write_run(&report, dir)?;
    if let Some(step) = report.trajectory.failed_at {
        return Err(Error::NumericalBlowup { step });
    }
    Ok(report)
}

/// Axial profile of the bare and averaged trap.
#[derive(Debug, Clone)]
pub struct VeffTable {
    pub z: Vec<f64>,
    pub bare: Vec<f64>,
    pub averaged: Vec<f64>,
    pub wells: WellStructure,
}

pub fn veff_table(cfg: &RunConfig) -> Result<VeffTable> {
    let grid = cfg.grid_spec()?;
    let bare = potentials::shifted_trap_field(&grid, &cfg.trap, 0.0).axial_slice();
    let averaged_field = potentials::time_averaged_potential(&grid, &cfg.trap, cfg.drive.alpha0);
    Ok(VeffTable {
        z: grid.z_coords(),
        bare,
        averaged: averaged_field.axial_slice(),
        wells: potentials::axial_barrier(&averaged_field),
    })
}

/// Dressed branches at rest and the drive-averaged lower branch.
#[derive(Debug, Clone)]
pub struct DressedTable {
    pub z: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower_averaged: Vec<f64>,
    pub wells: WellStructure,
}

pub fn dressed_table(cfg: &RunConfig, n_quad: usize) -> Result<DressedTable> {
    let levels = cfg.two_level.ok_or_else(|| {
        Error::InvalidParameter("dressed potentials need a two_level block".into())
    })?;
    let grid = cfg.grid_spec()?;
    let (lower, upper) = potentials::dressed_fields(&grid, &cfg.trap, 0.0, &levels);
    let avg = potentials::time_averaged_lower_branch(
        &grid,
        &cfg.trap,
        cfg.drive.alpha0,
        &levels,
        n_quad,
    )?;
    Ok(DressedTable {
        z: grid.z_coords(),
        lower: lower.axial_slice(),
        upper: upper.axial_slice(),
        lower_averaged: avg.axial_slice(),
        wells: potentials::axial_barrier(&avg),
    })
}

fn wells_text(w: &WellStructure) -> String {
    match w {
        WellStructure::DoubleWell {
            barrier,
            minima,
            minimum_values,
            saddle_position,
            saddle_value,
        } => format!(
            "# double well: minima z = {} ({}), {} ({}); saddle z = {saddle_position} ({saddle_value}); barrier = {barrier}\n",
            minima[0], minimum_values[0], minima[1], minimum_values[1]
        ),
        WellStructure::NoDoubleWell => "# no double well\n".into(),
    }
}

fn write_static_manifest(cfg: &RunConfig, dir: &Path, extra: &str) -> Result<()> {
    let mut m = format!("# gpe-core {}\n", env!("CARGO_PKG_VERSION"));
    m.push_str(extra);
    m.push('\n');
    m.push_str(&cfg.to_text());
    fs::write(dir.join("manifest.txt"), m)?;
    Ok(())
}

/// Writes `veff.dat` (`z V V_eff`) and a manifest.
pub fn write_veff(cfg: &RunConfig, dir: &Path) -> Result<VeffTable> {
    fs::create_dir_all(dir)?;
    let t = veff_table(cfg)?;
    io::write_columns(
        &dir.join("veff.dat"),
        &["z", "V", "V_eff"],
        &[&t.z, &t.bare, &t.averaged],
    )?;
    write_static_manifest(cfg, dir, &wells_text(&t.wells))?;
    Ok(t)
}

/// Writes `dressed.dat` (`z V_minus V_plus V_minus_avg`) and a manifest.
pub fn write_dressed(cfg: &RunConfig, dir: &Path) -> Result<DressedTable> {
    fs::create_dir_all(dir)?;
    let t = dressed_table(cfg, potentials::DEFAULT_PHASE_NODES)?;
    io::write_columns(
        &dir.join("dressed.dat"),
        &["z", "V_minus", "V_plus", "V_minus_avg"],
        &[&t.z, &t.lower, &t.upper, &t.lower_averaged],
    )?;
    write_static_manifest(cfg, dir, &wells_text(&t.wells))?;
    Ok(t)
}

/// Ground states written by [`write_ground`].
#[derive(Debug, Clone)]
pub struct GroundReport {
    pub initial: StationaryState,
    pub effective: Option<EffectiveGroundState>,
}

/// Solves the initial ground state (and the averaged-trap one when the
/// drive is on), writing `ground.dat`, snapshots and a manifest.
pub fn write_ground(cfg: &RunConfig, dir: &Path) -> Result<GroundReport> {
    cfg.validate()?;
    fs::create_dir_all(dir)?;
    let initial = initial_ground(cfg)?;
    let effective = if cfg.drive.alpha0 > 0.0 && cfg.two_level.is_none() {
        Some(effective_ground(cfg)?)
    } else {
        None
    };
    let grid = initial.psi.grid().clone();
    let z = grid.z_coords();
    let rho = initial.psi.density().axial_slice();
    let v = initial_potential(cfg)?.axial_slice();
    let mut names = vec!["z", "density", "V"];
    let mut cols: Vec<Vec<f64>> = vec![z, rho, v];
    let mut extra = format!(
        "# mu = {}\n# energy = {}\n# residual = {:e}\n# iterations = {}\n",
        initial.mu, initial.energy, initial.residual, initial.iterations
    );
    io::write_snapshot(&initial.psi, &dir.join("ground.gpes"), 0.0)?;
    if let Some(eff) = &effective {
        names.extend(["density_eff", "V_eff"]);
        cols.push(eff.state.psi.density().axial_slice());
        cols.push(eff.potential.axial_slice());
        let _ = write!(
            extra,
            "# mu_eff = {}\n# dichotomy_feasible = {}\n{}",
            eff.state.mu,
            eff.dichotomy_feasible,
            wells_text(&eff.wells)
        );
        io::write_snapshot(&eff.state.psi, &dir.join("ground_eff.gpes"), 0.0)?;
    }
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    io::write_columns(&dir.join("ground.dat"), &names, &refs)?;
    write_static_manifest(cfg, dir, &extra)?;
    Ok(GroundReport { initial, effective })
}

/// Resolves the output directory: an explicit override or the config's own.
pub fn output_dir(cfg: &RunConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir.map_or_else(|| cfg.output.directory.clone(), Path::to_path_buf)
}
