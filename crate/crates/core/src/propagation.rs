//! Real-time split-step evolution of the one- and two-component equations in
//! a shaken trap, with optional absorbing layers at the `z` boundaries.
//!
//! One step is the Strang sequence
//!
//! ```text
//! K(dt/2) · A · P(t + dt/2, dt) · K(dt/2)
//! ```
//!
//! with `K` the spectral kinetic phase, `P` the potential and mean-field
//! phase (a 2×2 unitary per point for two components) sampled at the
//! midpoint of the step, and `A` the absorber mask. Consecutive half kinetic
//! phases are fused inside [`SingleComponentPropagator::advance`] and
//! [`TwoComponentPropagator::advance`].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::groundstate::Coupling;
use crate::numerics::{
    norm2, Complex64, ComplexField, GridSpec, KineticStep, ScalarField, Spectral,
};
use crate::observables::{self, DichotomyReport};
use crate::potentials::{self, DriveSchedule, TrapSpec, TwoLevelCoupling};

/// Largest default step.
pub const MAX_DEFAULT_DT: f64 = 0.002;

/// Default step: the largest `dt ≤ min(0.002, T/128)` dividing the drive
/// period `T` into a whole number of steps.
pub fn default_dt(drive: &DriveSchedule) -> f64 {
    if drive.alpha0 == 0.0 {
        return MAX_DEFAULT_DT;
    }
    let period = drive.period();
    let steps = ((period / MAX_DEFAULT_DT).ceil() as usize).max(128);
    period / steps as f64
}

/// Imaginary-potential layer at each `z` boundary:
/// `W(z) = strength·((|z| - (L - width))/width)^power` inside the layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorberSpec {
    pub width: f64,
    pub strength: f64,
    pub power: i32,
}

impl AbsorberSpec {
    pub fn new(width: f64, strength: f64, power: i32) -> Result<Self> {
        if !(width > 0.0 && strength > 0.0 && power >= 1) {
            return Err(Error::InvalidParameter(format!(
                "absorber needs width > 0, strength > 0, power >= 1 (got {width}, {strength}, {power})"
            )));
        }
        Ok(Self {
            width,
            strength,
            power,
        })
    }

    pub fn check(&self, grid: &GridSpec) -> Result<()> {
        let l = grid.half_extents()[grid.z_axis()];
        if self.width >= 0.5 * l {
            return Err(Error::InvalidParameter(format!(
                "absorber width {} must stay below half the z half-extent {l}",
                self.width
            )));
        }
        Ok(())
    }

    pub fn rate(&self, z: f64, half_extent: f64) -> f64 {
        let depth = (z.abs() - (half_extent - self.width)) / self.width;
        if depth <= 0.0 {
            0.0
        } else {
            self.strength * depth.min(1.0).powi(self.power)
        }
    }
}

impl Default for AbsorberSpec {
    fn default() -> Self {
        Self {
            width: 8.0,
            strength: 20.0,
            power: 3,
        }
    }
}

/// Per-`z` damping factors `exp(-W(z)dt)`.
fn absorber_mask(grid: &GridSpec, spec: &AbsorberSpec, dt: f64) -> Vec<f64> {
    let l = grid.half_extents()[grid.z_axis()];
    grid.z_coords()
        .iter()
        .map(|&z| (-spec.rate(z, l) * dt).exp())
        .collect()
}

/// Multiplies by `exp(-W(z)dt)`; the interior is left untouched.
pub fn apply_absorber(psi: &mut ComplexField, spec: &AbsorberSpec, dt: f64) -> Result<()> {
    spec.check(psi.grid())?;
    let mask = absorber_mask(psi.grid(), spec, dt);
    apply_mask(psi.values_mut(), &mask);
    Ok(())
}

fn apply_mask(values: &mut [Complex64], mask: &[f64]) {
    let nz = mask.len();
    for row in values.chunks_exact_mut(nz) {
        for (c, m) in row.iter_mut().zip(mask) {
            if *m != 1.0 {
                *c *= m;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub absorber: Option<AbsorberSpec>,
    pub record_every: usize,
}

impl PropagatorConfig {
    pub fn new(dt: f64, absorber: Option<AbsorberSpec>, record_every: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        Ok(Self {
            dt,
            absorber,
            record_every,
        })
    }

    /// Default step with one record per drive cycle.
    pub fn for_drive(drive: &DriveSchedule, absorber: Option<AbsorberSpec>) -> Self {
        let dt = default_dt(drive);
        let record_every = if drive.alpha0 == 0.0 {
            500
        } else {
            (drive.period() / dt).round() as usize
        };
        Self {
            dt,
            absorber,
            record_every,
        }
    }
}

/// Which potential the single-component equation sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialMode {
    /// The instantaneous shaken trap `V(r + α(t)e_z)`.
    Shaken,
    /// The static drive-period average `V_eff(r, α₀)`.
    Effective,
}

/// Trapped and untrapped components, jointly normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoComponentState {
    pub trapped: ComplexField,
    pub untrapped: ComplexField,
}

impl TwoComponentState {
    /// All atoms in the trapped state.
    pub fn all_trapped(psi: ComplexField) -> Self {
        let untrapped = ComplexField::zeros(psi.grid().clone());
        Self {
            trapped: psi,
            untrapped,
        }
    }

    /// Places the single-component density `psi` in the local lower dressed
    /// eigenvector of the trap shifted by `alpha`.
    pub fn lower_dressed(
        psi: &ComplexField,
        trap: &TrapSpec,
        coupling: &TwoLevelCoupling,
        alpha: f64,
    ) -> Self {
        let grid = psi.grid().clone();
        let mut trapped = psi.clone();
        let mut untrapped = psi.clone();
        let (a, b) = (trapped.values_mut(), untrapped.values_mut());
        grid.for_each_point(|i, r| {
            let h = trap.harmonic([r[0], r[1], r[2] + alpha]);
            let (s, c) = observables::dressed_mixing_angle(h, coupling).sin_cos();
            a[i] *= c;
            b[i] *= -s;
        });
        Self { trapped, untrapped }
    }

    pub fn norms(&self) -> (f64, f64) {
        (norm2(&self.trapped), norm2(&self.untrapped))
    }

    pub fn joint_norm(&self) -> f64 {
        let (a, b) = self.norms();
        a + b
    }

    pub fn total_density(&self) -> ScalarField {
        let mut d = self.trapped.density();
        d.values_mut()
            .iter_mut()
            .zip(self.untrapped.values())
            .for_each(|(n, c)| *n += c.norm_sqr());
        d
    }
}

/// Transverse energy per transverse index and z coordinates, shared by the
/// potential substeps.
struct TrapGeometry {
    transverse: Vec<f64>,
    z: Vec<f64>,
}

impl TrapGeometry {
    fn new(grid: &GridSpec, trap: &TrapSpec) -> Self {
        let nz = grid.points()[grid.z_axis()];
        let mut transverse = vec![0.0; grid.len() / nz];
        grid.for_each_point(|i, r| {
            if i % nz == 0 {
                transverse[i / nz] = trap.harmonic([r[0], r[1], 0.0]);
            }
        });
        Self {
            transverse,
            z: grid.z_coords(),
        }
    }

    /// `½ω_z²(z + α)²` per z index.
    fn axial(&self, trap: &TrapSpec, alpha: f64, out: &mut Vec<f64>) {
        let w2 = 0.5 * trap.omega_z * trap.omega_z;
        out.clear();
        out.extend(self.z.iter().map(|z| w2 * (z + alpha).powi(2)));
    }
}

/// Split-step integrator for the single-component equation.
pub struct SingleComponentPropagator {
    spectral: Spectral,
    half_kinetic: Vec<Complex64>,
    full_kinetic: Vec<Complex64>,
    geometry: TrapGeometry,
    trap: TrapSpec,
    drive: DriveSchedule,
    g: f64,
    dt: f64,
    effective: Option<Vec<f64>>,
    mask: Option<Vec<f64>>,
    axial: Vec<f64>,
}

impl SingleComponentPropagator {
    pub fn new(
        grid: &Arc<GridSpec>,
        trap: TrapSpec,
        drive: DriveSchedule,
        coupling: Coupling,
        mode: PotentialMode,
        dt: f64,
        absorber: Option<AbsorberSpec>,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        let mask = match absorber {
            Some(a) => {
                a.check(grid)?;
                Some(absorber_mask(grid, &a, dt))
            }
            None => None,
        };
        let spectral = Spectral::new(grid.clone());
        let effective = match mode {
            PotentialMode::Shaken => None,
            PotentialMode::Effective => Some(
                potentials::time_averaged_potential(grid, &trap, drive.alpha0)
                    .values()
                    .to_vec(),
            ),
        };
        Ok(Self {
            half_kinetic: spectral.kinetic_multiplier(KineticStep::Real(0.5 * dt)),
            full_kinetic: spectral.kinetic_multiplier(KineticStep::Real(dt)),
            geometry: TrapGeometry::new(grid, &trap),
            spectral,
            trap,
            drive,
            g: coupling.g_eff,
            dt,
            effective,
            mask,
            axial: Vec::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn potential_substep(&mut self, psi: &mut [Complex64], t_mid: f64) {
        let dt = self.dt;
        let g = self.g;
        match &self.effective {
            Some(v) => {
                for (c, v) in psi.iter_mut().zip(v) {
                    *c *= Complex64::from_polar(1.0, -(v + g * c.norm_sqr()) * dt);
                }
            }
            None => {
                let alpha = self.drive.amplitude(t_mid);
                self.geometry.axial(&self.trap, alpha, &mut self.axial);
                let nz = self.axial.len();
                let cut = self.trap.v_cut.unwrap_or(f64::INFINITY);
                for (row, e_t) in psi.chunks_exact_mut(nz).zip(&self.geometry.transverse) {
                    for (c, q) in row.iter_mut().zip(&self.axial) {
                        let v = (e_t + q).min(cut);
                        *c *= Complex64::from_polar(1.0, -(v + g * c.norm_sqr()) * dt);
                    }
                }
            }
        }
        if let Some(mask) = &self.mask {
            apply_mask(psi, mask);
        }
    }

    /// One unfused Strang step from `t` to `t + dt`.
    pub fn step(&mut self, psi: &mut ComplexField, t: f64) {
        let data = psi.values_mut();
        self.spectral.apply_multiplier(data, &self.half_kinetic);
        self.potential_substep(data, t + 0.5 * self.dt);
        self.spectral.apply_multiplier(data, &self.half_kinetic);
    }

    /// `n` steps from `t`, fusing adjacent half kinetic phases.
    pub fn advance(&mut self, psi: &mut ComplexField, t: f64, n: usize) {
        if n == 0 {
            return;
        }
        let data = psi.values_mut();
        self.spectral.apply_multiplier(data, &self.half_kinetic);
        for k in 0..n {
            self.potential_substep(data, t + (k as f64 + 0.5) * self.dt);
            let m = if k + 1 == n {
                &self.half_kinetic
            } else {
                &self.full_kinetic
            };
            self.spectral.apply_multiplier(data, m);
        }
    }
}

/// Split-step integrator for the microwave-coupled two-state model.
///
/// The trapped state sees the uncut harmonic `½Σω_i²(r + αe_z)_i²`, the
/// untrapped state the constant detuning; all interaction constants are equal.
pub struct TwoComponentPropagator {
    spectral: Spectral,
    half_kinetic: Vec<Complex64>,
    full_kinetic: Vec<Complex64>,
    geometry: TrapGeometry,
    trap: TrapSpec,
    drive: DriveSchedule,
    levels: TwoLevelCoupling,
    g: f64,
    dt: f64,
    mask: Option<Vec<f64>>,
    axial: Vec<f64>,
}

impl TwoComponentPropagator {
    pub fn new(
        grid: &Arc<GridSpec>,
        trap: TrapSpec,
        drive: DriveSchedule,
        coupling: Coupling,
        levels: TwoLevelCoupling,
        dt: f64,
        absorber: Option<AbsorberSpec>,
    ) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        let mask = match absorber {
            Some(a) => {
                a.check(grid)?;
                Some(absorber_mask(grid, &a, dt))
            }
            None => None,
        };
        let spectral = Spectral::new(grid.clone());
        Ok(Self {
            half_kinetic: spectral.kinetic_multiplier(KineticStep::Real(0.5 * dt)),
            full_kinetic: spectral.kinetic_multiplier(KineticStep::Real(dt)),
            geometry: TrapGeometry::new(grid, &trap),
            spectral,
            trap,
            drive,
            levels,
            g: coupling.g_eff,
            dt,
            mask,
            axial: Vec::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Exact exponential of the per-point Hermitian 2×2 potential matrix with
    /// the joint density frozen (it is invariant under the rotation).
    fn potential_substep(&mut self, a: &mut [Complex64], b: &mut [Complex64], t_mid: f64) {
        let dt = self.dt;
        let g = self.g;
        let c = 0.5 * self.levels.omega_r;
        let delta = self.levels.delta;
        let alpha = self.drive.amplitude(t_mid);
        self.geometry.axial(&self.trap, alpha, &mut self.axial);
        let nz = self.axial.len();
        let i = Complex64::i();
        for ((ra, rb), e_t) in a
            .chunks_exact_mut(nz)
            .zip(b.chunks_exact_mut(nz))
            .zip(&self.geometry.transverse)
        {
            for ((pa, pb), q) in ra.iter_mut().zip(rb.iter_mut()).zip(&self.axial) {
                let h = e_t + q;
                let mf = g * (pa.norm_sqr() + pb.norm_sqr());
                let mean = 0.5 * (h + delta) + mf;
                let half = 0.5 * (h - delta);
                let omega = (half * half + c * c).sqrt();
                let (sn, cs) = (omega * dt).sin_cos();
                let sinc = if omega > 0.0 { sn / omega } else { dt };
                let phase = Complex64::from_polar(1.0, -mean * dt);
                let (x, y) = (*pa, *pb);
                *pa = phase * (x * cs - i * sinc * (x * half + y * c));
                *pb = phase * (y * cs - i * sinc * (x * c - y * half));
            }
        }
        if let Some(mask) = &self.mask {
            apply_mask(a, mask);
            apply_mask(b, mask);
        }
    }

    pub fn step(&mut self, state: &mut TwoComponentState, t: f64) {
        let (a, b) = (state.trapped.values_mut(), state.untrapped.values_mut());
        self.spectral.apply_multiplier(a, &self.half_kinetic);
        self.spectral.apply_multiplier(b, &self.half_kinetic);
        self.potential_substep(a, b, t + 0.5 * self.dt);
        self.spectral.apply_multiplier(a, &self.half_kinetic);
        self.spectral.apply_multiplier(b, &self.half_kinetic);
    }

    pub fn advance(&mut self, state: &mut TwoComponentState, t: f64, n: usize) {
        if n == 0 {
            return;
        }
        let (a, b) = (state.trapped.values_mut(), state.untrapped.values_mut());
        self.spectral.apply_multiplier(a, &self.half_kinetic);
        self.spectral.apply_multiplier(b, &self.half_kinetic);
        for k in 0..n {
            self.potential_substep(a, b, t + (k as f64 + 0.5) * self.dt);
            let m = if k + 1 == n {
                &self.half_kinetic
            } else {
                &self.full_kinetic
            };
            self.spectral.apply_multiplier(a, m);
            self.spectral.apply_multiplier(b, m);
        }
    }
}

/// One Strang step of the single-component equation.
///
/// Convenience wrapper that rebuilds the propagator; use
/// [`SingleComponentPropagator`] for repeated stepping.
#[allow(clippy::too_many_arguments)]
pub fn step_single(
    psi: &mut ComplexField,
    t: f64,
    dt: f64,
    trap: &TrapSpec,
    drive: &DriveSchedule,
    coupling: Coupling,
    mode: PotentialMode,
    absorber: Option<AbsorberSpec>,
) -> Result<()> {
    let grid = psi.grid().clone();
    SingleComponentPropagator::new(&grid, *trap, *drive, coupling, mode, dt, absorber)?
        .step(psi, t);
    if !psi.is_finite() {
        return Err(Error::NumericalBlowup { step: 0 });
    }
    Ok(())
}

/// One Strang step of the two-state model.
#[allow(clippy::too_many_arguments)]
pub fn step_two_component(
    state: &mut TwoComponentState,
    t: f64,
    dt: f64,
    trap: &TrapSpec,
    drive: &DriveSchedule,
    coupling: Coupling,
    levels: &TwoLevelCoupling,
    absorber: Option<AbsorberSpec>,
) -> Result<()> {
    let grid = state.trapped.grid().clone();
    TwoComponentPropagator::new(&grid, *trap, *drive, coupling, *levels, dt, absorber)?
        .step(state, t);
    if !(state.trapped.is_finite() && state.untrapped.is_finite()) {
        return Err(Error::NumericalBlowup { step: 0 });
    }
    Ok(())
}

/// Wave function being evolved.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveState {
    Single(ComplexField),
    Two(TwoComponentState),
}

impl WaveState {
    pub fn grid(&self) -> &Arc<GridSpec> {
        match self {
            WaveState::Single(psi) => psi.grid(),
            WaveState::Two(s) => s.trapped.grid(),
        }
    }

    pub fn total_density(&self) -> ScalarField {
        match self {
            WaveState::Single(psi) => psi.density(),
            WaveState::Two(s) => s.total_density(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            WaveState::Single(psi) => norm2(psi),
            WaveState::Two(s) => s.joint_norm(),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            WaveState::Single(psi) => psi.is_finite(),
            WaveState::Two(s) => s.trapped.is_finite() && s.untrapped.is_finite(),
        }
    }
}

/// Everything `evolve` needs besides the initial state.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub trap: TrapSpec,
    pub drive: DriveSchedule,
    pub coupling: Coupling,
    pub two_level: Option<TwoLevelCoupling>,
    pub config: PropagatorConfig,
    pub mode: PotentialMode,
    pub t_final: f64,
    pub snapshot_times: Vec<f64>,
    /// Reference state for [`observables::adiabaticity_fidelity`] records.
    pub reference: Option<ComplexField>,
}

impl Scenario {
    pub fn total_steps(&self) -> usize {
        (self.t_final / self.config.dt).round() as usize
    }
}

/// Observables at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub step: usize,
    pub t: f64,
    pub cycle: f64,
    pub norm_total: f64,
    pub norm_trapped: Option<f64>,
    pub norm_untrapped: Option<f64>,
    pub z_mean: f64,
    pub z2_mean: f64,
    pub dichotomy: Option<DichotomyReport>,
    pub p_lower: Option<f64>,
    pub p_upper: Option<f64>,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// 0 for single-component or trapped, 1 for untrapped.
    pub component: usize,
    pub field: ComplexField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: WaveState,
    /// Set when the run stopped early; holds the failing step.
    pub failed_at: Option<usize>,
}

impl Trajectory {
    pub fn last(&self) -> &Record {
        self.records
            .last()
            .expect("trajectory has at least one record")
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.norm_total).collect()
    }
}

enum Engine {
    Single(SingleComponentPropagator),
    Two(TwoComponentPropagator),
}

/// Runs a scenario to `t_final`, recording every `record_every` steps (and
/// at the final step). Deterministic for identical inputs.
///
/// A non-finite amplitude stops the run; the partial trajectory is returned
/// with `failed_at` set rather than discarded.
pub fn evolve(initial: WaveState, scenario: &Scenario) -> Result<Trajectory> {
    let grid = initial.grid().clone();
    let cfg = &scenario.config;
    if cfg.record_every == 0 || !(cfg.dt > 0.0) {
        return Err(Error::InvalidParameter("invalid propagator config".into()));
    }
    let mut engine = match (&initial, scenario.two_level) {
        (WaveState::Single(_), None) => Engine::Single(SingleComponentPropagator::new(
            &grid,
            scenario.trap,
            scenario.drive,
            scenario.coupling,
            scenario.mode,
            cfg.dt,
            cfg.absorber,
        )?),
        (WaveState::Two(_), Some(levels)) => Engine::Two(TwoComponentPropagator::new(
            &grid,
            scenario.trap,
            scenario.drive,
            scenario.coupling,
            levels,
            cfg.dt,
            cfg.absorber,
        )?),
        _ => {
            return Err(Error::InvalidParameter(
                "two-component states need a two-level coupling and vice versa".into(),
            ))
        }
    };

    let total = scenario.total_steps();
    let mut snapshot_steps: Vec<usize> = scenario
        .snapshot_times
        .iter()
        .map(|t| ((t / cfg.dt).round() as usize).min(total))
        .collect();
    snapshot_steps.sort_unstable();
    snapshot_steps.dedup();

    let mut state = initial;
    let mut records = vec![record(&state, 0, 0.0, scenario)?];
    let mut snapshots = Vec::new();
    let take_snapshots = |state: &WaveState, step: usize, snaps: &mut Vec<Snapshot>| {
        if snapshot_steps.binary_search(&step).is_ok() {
            let t = step as f64 * cfg.dt;
            match state {
                WaveState::Single(psi) => snaps.push(Snapshot {
                    t,
                    component: 0,
                    field: psi.clone(),
                }),
                WaveState::Two(s) => {
                    snaps.push(Snapshot {
                        t,
                        component: 0,
                        field: s.trapped.clone(),
                    });
                    snaps.push(Snapshot {
                        t,
                        component: 1,
                        field: s.untrapped.clone(),
                    });
                }
            }
        }
    };
    take_snapshots(&state, 0, &mut snapshots);

    let mut step = 0;
    let mut failed_at = None;
    while step < total {
        // stop at the next record or snapshot boundary
        let next_record = ((step / cfg.record_every) + 1) * cfg.record_every;
        let next_snap = snapshot_steps
            .iter()
            .copied()
            .find(|&s| s > step)
            .unwrap_or(usize::MAX);
        let target = next_record.min(next_snap).min(total);
        let t = step as f64 * cfg.dt;
        match (&mut engine, &mut state) {
            (Engine::Single(p), WaveState::Single(psi)) => p.advance(psi, t, target - step),
            (Engine::Two(p), WaveState::Two(s)) => p.advance(s, t, target - step),
            _ => unreachable!("engine matches state kind"),
        }
        step = target;
        if !state.is_finite() {
            failed_at = Some(step);
            break;
        }
        take_snapshots(&state, step, &mut snapshots);
        if step % cfg.record_every == 0 || step == total {
            records.push(record(&state, step, step as f64 * cfg.dt, scenario)?);
        }
    }

    Ok(Trajectory {
        records,
        snapshots,
        final_state: state,
        failed_at,
    })
}

fn moments(density: &ScalarField) -> (f64, f64, f64) {
    let grid = density.grid();
    let nz = grid.points()[grid.z_axis()];
    let z = grid.z_coords();
    let (mut n, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for row in density.values().chunks_exact(nz) {
        for (rho, z) in row.iter().zip(&z) {
            n += rho;
            m1 += rho * z;
            m2 += rho * z * z;
        }
    }
    let dv = grid.volume_element();
    (n * dv, m1 * dv, m2 * dv)
}

fn record(state: &WaveState, step: usize, t: f64, scenario: &Scenario) -> Result<Record> {
    let density = state.total_density();
    let (norm_total, m1, m2) = moments(&density);
    let (z_mean, z2_mean) = if norm_total > 0.0 {
        (m1 / norm_total, m2 / norm_total)
    } else {
        (0.0, 0.0)
    };
    let grid = density.grid();
    let dichotomy = observables::dichotomy_metric(&grid.z_coords(), &density.axial_slice()).ok();
    let (norm_trapped, norm_untrapped, p_lower, p_upper) = match (state, scenario.two_level) {
        (WaveState::Two(s), Some(levels)) => {
            let (a, b) = s.norms();
            let alpha = scenario.drive.amplitude(t);
            let (lo, up) = observables::branch_populations(s, &levels, &scenario.trap, alpha);
            (Some(a), Some(b), Some(lo), Some(up))
        }
        _ => (None, None, None, None),
    };
    let fidelity = match (&scenario.reference, state) {
        (Some(reference), WaveState::Single(psi)) => {
            Some(observables::adiabaticity_fidelity(psi, reference)?)
        }
        _ => None,
    };
    Ok(Record {
        step,
        t,
        cycle: t / scenario.drive.period(),
        norm_total,
        norm_trapped,
        norm_untrapped,
        z_mean,
        z2_mean,
        dichotomy,
        p_lower,
        p_upper,
        fidelity,
    })
}
