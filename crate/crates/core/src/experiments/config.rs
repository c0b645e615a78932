//! Plain-text run configuration: `section.key = value` lines, `#` comments.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groundstate::{Coupling, SolverOptions};
use crate::numerics::GridSpec;
use crate::potentials::{DriveSchedule, TrapSpec, TwoLevelCoupling};
use crate::propagation::{self, AbsorberSpec, PotentialMode, PropagatorConfig};

/// Every recognised key, in manifest order.
pub const KEYS: &[&str] = &[
    "grid.ndim",
    "grid.half_extents",
    "grid.points",
    "trap.omega_x",
    "trap.omega_y",
    "trap.omega_z",
    "trap.v_cut",
    "drive.alpha0",
    "drive.omega",
    "drive.t_on_cycles",
    "coupling.g_eff",
    "two_level.omega_r",
    "two_level.delta",
    "propagation.dt",
    "propagation.cycles_total",
    "propagation.record_every",
    "propagation.mode",
    "propagation.absorber",
    "propagation.absorber_width",
    "propagation.absorber_strength",
    "propagation.absorber_power",
    "ground.tol",
    "ground.dtau",
    "ground.max_iter",
    "output.directory",
    "output.snapshot_times",
    "output.snapshot_every_cycles",
];

#[derive(Debug, Clone, PartialEq)]
pub struct GridBlock {
    pub ndim: usize,
    pub half_extents: Vec<f64>,
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriveBlock {
    pub alpha0: f64,
    pub omega: f64,
    pub t_on_cycles: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationBlock {
    /// `None` resolves to [`propagation::default_dt`].
    pub dt: Option<f64>,
    pub cycles_total: f64,
    /// `None` resolves to one record per drive cycle.
    pub record_every: Option<usize>,
    pub mode: PotentialMode,
    pub absorber: bool,
    pub absorber_width: f64,
    pub absorber_strength: f64,
    pub absorber_power: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputBlock {
    pub directory: PathBuf,
    pub snapshot_times: Vec<f64>,
    /// Extra snapshots every this many drive cycles; 0 disables them.
    pub snapshot_every_cycles: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridBlock,
    pub trap: TrapSpec,
    pub drive: DriveBlock,
    pub coupling: Coupling,
    pub two_level: Option<TwoLevelCoupling>,
    pub propagation: PropagationBlock,
    pub ground: SolverOptions,
    pub output: OutputBlock,
    explicit: BTreeSet<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let absorber = AbsorberSpec::default();
        Self {
            grid: GridBlock {
                ndim: 1,
                half_extents: vec![64.0],
                points: vec![1024],
            },
            trap: TrapSpec::uncut(),
            drive: DriveBlock {
                alpha0: 0.0,
                omega: 10.0,
                t_on_cycles: 0.0,
            },
            coupling: Coupling::none(),
            two_level: None,
            propagation: PropagationBlock {
                dt: None,
                cycles_total: 100.0,
                record_every: None,
                mode: PotentialMode::Shaken,
                absorber: true,
                absorber_width: absorber.width,
                absorber_strength: absorber.strength,
                absorber_power: absorber.power,
            },
            ground: SolverOptions::default(),
            output: OutputBlock {
                directory: PathBuf::from("out"),
                snapshot_times: Vec::new(),
                snapshot_every_cycles: 0.0,
            },
            explicit: BTreeSet::new(),
        }
    }
}

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::Config {
        line: 0,
        message: format!("`{key}` expects {what}, got `{value}`"),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| bad(key, value, "a number"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| bad(key, value, "a non-negative integer"))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let inner = value.trim().trim_start_matches('[').trim_end_matches(']');
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| bad(key, value, "a comma-separated list"))
        })
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

fn is_none(value: &str) -> bool {
    matches!(value, "none" | "uncut" | "inf")
}

fn fmt_list<T: std::fmt::Display>(v: &[T]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// Parses a configuration, applying defaults for everything not given.
///
/// The `grid` and `trap` sections must each appear at least once; unknown
/// keys and malformed values are errors carrying the line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `section.key = value`, got `{content}`"),
        })?;
        cfg.set(key.trim(), value.trim()).map_err(|e| match e {
            Error::Config { message, .. } => Error::Config { line, message },
            other => other,
        })?;
    }
    for section in ["grid", "trap"] {
        if !cfg
            .explicit
            .iter()
            .any(|k| k.starts_with(&format!("{section}.")))
        {
            return Err(Error::Config {
                line: 0,
                message: format!("missing required `{section}` block"),
            });
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    /// Assigns one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "grid.ndim" => self.grid.ndim = parse_usize(key, value)?,
            "grid.half_extents" => self.grid.half_extents = parse_list(key, value)?,
            "grid.points" => self.grid.points = parse_list(key, value)?,
            "trap.omega_x" => self.trap.omega_x = parse_f64(key, value)?,
            "trap.omega_y" => self.trap.omega_y = parse_f64(key, value)?,
            "trap.omega_z" => self.trap.omega_z = parse_f64(key, value)?,
            "trap.v_cut" => {
                self.trap.v_cut = if is_none(value) {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "drive.alpha0" => self.drive.alpha0 = parse_f64(key, value)?,
            "drive.omega" => self.drive.omega = parse_f64(key, value)?,
            "drive.t_on_cycles" => self.drive.t_on_cycles = parse_f64(key, value)?,
            "coupling.g_eff" => self.coupling.g_eff = parse_f64(key, value)?,
            "two_level.omega_r" | "two_level.delta" => {
                if is_none(value) {
                    self.two_level = None;
                } else {
                    let v = parse_f64(key, value)?;
                    let tl = self.two_level.get_or_insert(TwoLevelCoupling {
                        omega_r: 100.0,
                        delta: 200.0,
                    });
                    if key.ends_with("omega_r") {
                        tl.omega_r = v;
                    } else {
                        tl.delta = v;
                    }
                }
            }
            "propagation.dt" => {
                self.propagation.dt = if value == "auto" {
                    None
                } else {
                    Some(parse_f64(key, value)?)
                }
            }
            "propagation.cycles_total" => self.propagation.cycles_total = parse_f64(key, value)?,
            "propagation.record_every" => {
                self.propagation.record_every = if value == "auto" {
                    None
                } else {
                    Some(parse_usize(key, value)?)
                }
            }
            "propagation.mode" => {
                self.propagation.mode = match value {
                    "shaken" => PotentialMode::Shaken,
                    "effective" => PotentialMode::Effective,
                    _ => return Err(bad(key, value, "`shaken` or `effective`")),
                }
            }
            "propagation.absorber" => self.propagation.absorber = parse_bool(key, value)?,
            "propagation.absorber_width" => {
                self.propagation.absorber_width = parse_f64(key, value)?
            }
            "propagation.absorber_strength" => {
                self.propagation.absorber_strength = parse_f64(key, value)?
            }
            "propagation.absorber_power" => {
                self.propagation.absorber_power =
                    value.parse().map_err(|_| bad(key, value, "an integer"))?
            }
            "ground.tol" => self.ground.tol = parse_f64(key, value)?,
            "ground.dtau" => self.ground.dtau = parse_f64(key, value)?,
            "ground.max_iter" => self.ground.max_iter = parse_usize(key, value)?,
            "output.directory" => self.output.directory = PathBuf::from(value),
            "output.snapshot_times" => self.output.snapshot_times = parse_list(key, value)?,
            "output.snapshot_every_cycles" => {
                self.output.snapshot_every_cycles = parse_f64(key, value)?
            }
            _ => {
                return Err(Error::Config {
                    line: 0,
                    message: format!("unknown key `{key}`"),
                })
            }
        }
        self.explicit.insert(key.to_string());
        Ok(())
    }

    /// Textual value of a key as written to the manifest.
    pub fn get(&self, key: &str) -> Option<String> {
        let p = &self.propagation;
        Some(match key {
            "grid.ndim" => self.grid.ndim.to_string(),
            "grid.half_extents" => fmt_list(&self.grid.half_extents),
            "grid.points" => fmt_list(&self.grid.points),
            "trap.omega_x" => self.trap.omega_x.to_string(),
            "trap.omega_y" => self.trap.omega_y.to_string(),
            "trap.omega_z" => self.trap.omega_z.to_string(),
            "trap.v_cut" => self.trap.v_cut.map_or("none".into(), |v| v.to_string()),
            "drive.alpha0" => self.drive.alpha0.to_string(),
            "drive.omega" => self.drive.omega.to_string(),
            "drive.t_on_cycles" => self.drive.t_on_cycles.to_string(),
            "coupling.g_eff" => self.coupling.g_eff.to_string(),
            "two_level.omega_r" => self
                .two_level
                .map_or("none".into(), |t| t.omega_r.to_string()),
            "two_level.delta" => self
                .two_level
                .map_or("none".into(), |t| t.delta.to_string()),
            "propagation.dt" => self.dt().to_string(),
            "propagation.cycles_total" => p.cycles_total.to_string(),
            "propagation.record_every" => self.record_every().to_string(),
            "propagation.mode" => match p.mode {
                PotentialMode::Shaken => "shaken".into(),
                PotentialMode::Effective => "effective".into(),
            },
            "propagation.absorber" => p.absorber.to_string(),
            "propagation.absorber_width" => p.absorber_width.to_string(),
            "propagation.absorber_strength" => p.absorber_strength.to_string(),
            "propagation.absorber_power" => p.absorber_power.to_string(),
            "ground.tol" => self.ground.tol.to_string(),
            "ground.dtau" => self.ground.dtau.to_string(),
            "ground.max_iter" => self.ground.max_iter.to_string(),
            "output.directory" => self.output.directory.display().to_string(),
            "output.snapshot_times" => fmt_list(&self.output.snapshot_times),
            "output.snapshot_every_cycles" => self.output.snapshot_every_cycles.to_string(),
            _ => return None,
        })
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    /// Keys left at their defaults.
    pub fn defaulted_keys(&self) -> Vec<&'static str> {
        KEYS.iter()
            .copied()
            .filter(|k| !self.is_explicit(k))
            .collect()
    }

    /// Checks every invariant by building the typed specs.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid_spec()?;
        TrapSpec::new(
            self.trap.omega_x,
            self.trap.omega_y,
            self.trap.omega_z,
            self.trap.v_cut,
        )?;
        let drive = self.drive_schedule()?;
        Coupling::new(self.coupling.g_eff)?;
        if let Some(tl) = self.two_level {
            TwoLevelCoupling::new(tl.omega_r, tl.delta)?;
            if self.propagation.mode == PotentialMode::Effective {
                return Err(Error::InvalidParameter(
                    "effective-potential mode applies to single-component runs only".into(),
                ));
            }
        }
        if !(self.propagation.cycles_total >= 0.0 && self.propagation.cycles_total.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cycles_total must be >= 0, got {}",
                self.propagation.cycles_total
            )));
        }
        let dt = self.dt();
        if drive.alpha0 > 0.0 && dt > drive.period() / 64.0 {
            return Err(Error::InvalidParameter(format!(
                "dt = {dt} does not resolve the drive period {} (need dt <= T/64)",
                drive.period()
            )));
        }
        let cfg = self.propagator_config()?;
        if let Some(a) = cfg.absorber {
            a.check(&grid)?;
        }
        if !(self.output.snapshot_every_cycles >= 0.0) {
            return Err(Error::InvalidParameter(
                "snapshot_every_cycles must be >= 0".into(),
            ));
        }
        if !(self.ground.tol > 0.0 && self.ground.dtau > 0.0 && self.ground.max_iter > 0) {
            return Err(Error::InvalidParameter(
                "ground solver needs tol > 0, dtau > 0, max_iter > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<Arc<GridSpec>> {
        Ok(Arc::new(GridSpec::new(
            self.grid.ndim,
            &self.grid.half_extents,
            &self.grid.points,
        )?))
    }

    pub fn drive_schedule(&self) -> Result<DriveSchedule> {
        DriveSchedule::with_cycles(self.drive.alpha0, self.drive.omega, self.drive.t_on_cycles)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.drive.omega
    }

    pub fn dt(&self) -> f64 {
        self.propagation.dt.unwrap_or_else(|| {
            DriveSchedule::new(self.drive.alpha0, self.drive.omega, 0.0)
                .map(|d| propagation::default_dt(&d))
                .unwrap_or(propagation::MAX_DEFAULT_DT)
        })
    }

    /// Whole number of steps covering `cycles_total` drive periods.
    pub fn steps(&self) -> usize {
        (self.propagation.cycles_total * self.period() / self.dt()).round() as usize
    }

    pub fn t_final(&self) -> f64 {
        self.steps() as f64 * self.dt()
    }

    pub fn record_every(&self) -> usize {
        self.propagation
            .record_every
            .unwrap_or_else(|| ((self.period() / self.dt()).round() as usize).max(1))
    }

    /// Explicit snapshot times plus the periodic ones, sorted.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let mut times = self.output.snapshot_times.clone();
        let every = self.output.snapshot_every_cycles;
        if every > 0.0 {
            let n = (self.propagation.cycles_total / every).floor() as usize;
            times.extend((0..=n).map(|k| k as f64 * every * self.period()));
        }
        times.sort_by(f64::total_cmp);
        times
    }

    pub fn absorber(&self) -> Result<Option<AbsorberSpec>> {
        let p = &self.propagation;
        if !p.absorber {
            return Ok(None);
        }
        AbsorberSpec::new(p.absorber_width, p.absorber_strength, p.absorber_power).map(Some)
    }

    pub fn propagator_config(&self) -> Result<PropagatorConfig> {
        PropagatorConfig::new(self.dt(), self.absorber()?, self.record_every())
    }

    /// Manifest text: the fully resolved configuration, re-parseable, with
    /// defaulted keys marked.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for key in KEYS {
            let (sec, _) = key.split_once('.').unwrap_or((key, ""));
            if sec == "two_level" && self.two_level.is_none() {
                continue;
            }
            if sec != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = sec;
            }
            let value = self.get(key).unwrap_or_default();
            if self.is_explicit(key) {
                let _ = writeln!(out, "{key} = {value}");
            } else {
                let _ = writeln!(out, "{key} = {value}  # default");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "grid.ndim = 1\ntrap.v_cut = 80\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.drive.alpha0, 0.0);
        assert_eq!(cfg.grid.points, vec![1024]);
        assert_eq!(cfg.trap.v_cut, Some(80.0));
        assert!(cfg.defaulted_keys().contains(&"drive.alpha0"));
        assert!(!cfg.defaulted_keys().contains(&"trap.v_cut"));
    }

    #[test]
    fn dichotomy_parameters() {
        let text = "# shaken cut trap\ngrid.points = 2048\ntrap.v_cut = 80\ndrive.alpha0 = 30\ndrive.omega = 10\ndrive.t_on_cycles = 150\ncoupling.g_eff = 100  # gN\n";
        let cfg = parse_config(text).unwrap();
        let d = cfg.drive_schedule().unwrap();
        assert_eq!(d.alpha0, 30.0);
        assert!((d.turn_on_cycles() - 150.0).abs() < 1e-12);
        assert_eq!(cfg.coupling.g_eff, 100.0);
        assert_eq!(
            cfg.record_every(),
            (cfg.period() / cfg.dt()).round() as usize
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_config("grid.ndim = 1\ntrap.v_cut = 80\ndrive.omega = 0\n").is_err());
        let e = parse_config("grid.ndim = 1\ntrap.v_cut = 80\ndrive.omgea = 3\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 3, .. }), "{e}");
        assert!(matches!(
            parse_config("grid.ndim = 1\n"),
            Err(Error::Config { line: 0, .. })
        ));
        assert!(parse_config("grid.ndim = one\ntrap.v_cut = 1\n").is_err());
        assert!(parse_config("grid.ndim 1\n").is_err());
        // drive not resolved
        assert!(parse_config(
            "grid.ndim = 1\ntrap.v_cut = 80\ndrive.alpha0 = 1\npropagation.dt = 0.1\n"
        )
        .is_err());
    }

    #[test]
    fn manifest_reproduces_config() {
        let text = "grid.ndim = 2\ngrid.half_extents = [8, 96]\ngrid.points = [64, 1024]\ntrap.omega_x = 5\ntrap.v_cut = 30\ndrive.alpha0 = 60\ntwo_level.omega_r = 50\noutput.snapshot_times = [0, 1.5]\n";
        let cfg = parse_config(text).unwrap();
        let again = parse_config(&cfg.to_text()).unwrap();
        for key in KEYS {
            assert_eq!(cfg.get(key), again.get(key), "{key}");
        }
        assert_eq!(again.two_level.unwrap().delta, 200.0);
    }

    #[test]
    fn whole_steps() {
        let cfg = parse_config(
            "grid.ndim = 1\ntrap.v_cut = 80\ndrive.alpha0 = 30\npropagation.cycles_total = 300\n",
        )
        .unwrap();
        let steps = cfg.steps();
        assert_eq!(steps % cfg.record_every(), 0);
        assert!((cfg.t_final() - 300.0 * cfg.period()).abs() < 1e-9);
    }
}
