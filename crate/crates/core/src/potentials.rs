//! Trap models, the shaking schedule, drive-period averages and dressed
//! two-level branches.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{GridSpec, ScalarField};

/// Default quadrature node count for drive-phase averages.
pub const DEFAULT_PHASE_NODES: usize = 512;

/// Anisotropic harmonic trap, optionally clipped at the energy `v_cut`.
///
/// The clip acts on the full harmonic sum, not per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    /// `None` means uncut.
    pub v_cut: Option<f64>,
}

impl TrapSpec {
    pub fn new(omega_x: f64, omega_y: f64, omega_z: f64, v_cut: Option<f64>) -> Result<Self> {
        for (name, w) in [
            ("omega_x", omega_x),
            ("omega_y", omega_y),
            ("omega_z", omega_z),
        ] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be > 0, got {w}"
                )));
            }
        }
        if let Some(vc) = v_cut {
            if !(vc > 0.0) || vc.is_nan() {
                return Err(Error::InvalidParameter(format!(
                    "v_cut must be > 0, got {vc}"
                )));
            }
        }
        // an infinite cut is the same as none
        let v_cut = v_cut.filter(|v| v.is_finite());
        Ok(Self {
            omega_x,
            omega_y,
            omega_z,
            v_cut,
        })
    }

    /// Isotropic unit-frequency trap clipped at `v_cut`.
    pub fn cut(v_cut: f64) -> Result<Self> {
        Self::new(1.0, 1.0, 1.0, Some(v_cut))
    }

    pub fn uncut() -> Self {
        Self {
            omega_x: 1.0,
            omega_y: 1.0,
            omega_z: 1.0,
            v_cut: None,
        }
    }

    pub fn without_cut(self) -> Self {
        Self {
            v_cut: None,
            ..self
        }
    }

    pub fn harmonic(&self, r: [f64; 3]) -> f64 {
        0.5 * (self.omega_x.powi(2) * r[0] * r[0]
            + self.omega_y.powi(2) * r[1] * r[1]
            + self.omega_z.powi(2) * r[2] * r[2])
    }
}

/// `min(½Σω_i²r_i², V_c)`.
pub fn trap_value(r: [f64; 3], trap: &TrapSpec) -> f64 {
    let h = trap.harmonic(r);
    match trap.v_cut {
        Some(vc) => h.min(vc),
        None => h,
    }
}

/// Shaking amplitude α₀, drive frequency ω and envelope turn-on time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSchedule {
    pub alpha0: f64,
    pub omega: f64,
    pub t_on: f64,
}

impl DriveSchedule {
    pub fn new(alpha0: f64, omega: f64, t_on: f64) -> Result<Self> {
        if !(alpha0 >= 0.0 && alpha0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha0 must be >= 0, got {alpha0}"
            )));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega must be > 0, got {omega}"
            )));
        }
        if !(t_on >= 0.0 && t_on.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_on must be >= 0, got {t_on}"
            )));
        }
        Ok(Self {
            alpha0,
            omega,
            t_on,
        })
    }

    /// Turn-on time given in drive cycles.
    pub fn with_cycles(alpha0: f64, omega: f64, t_on_cycles: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be > 0, got {omega}"
            )));
        }
        Self::new(alpha0, omega, t_on_cycles * 2.0 * PI / omega)
    }

    /// No shaking at all.
    pub fn at_rest() -> Self {
        Self {
            alpha0: 0.0,
            omega: 1.0,
            t_on: 0.0,
        }
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn turn_on_cycles(&self) -> f64 {
        self.t_on / self.period()
    }

    /// `sin²(πt/2t_on)` during turn-on, 1 afterwards.
    pub fn envelope(&self, t: f64) -> f64 {
        if t >= self.t_on {
            1.0
        } else if t <= 0.0 {
            0.0
        } else {
            (0.5 * PI * t / self.t_on).sin().powi(2)
        }
    }

    pub fn amplitude(&self, t: f64) -> f64 {
        drive_amplitude(t, self)
    }
}

/// α(t) with the smooth `sin²` turn-on.
pub fn drive_amplitude(t: f64, drive: &DriveSchedule) -> f64 {
    drive.alpha0 * drive.envelope(t) * (drive.omega * t).sin()
}

/// Rabi frequency and detuning of the trapped/untrapped microwave coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelCoupling {
    pub omega_r: f64,
    pub delta: f64,
}

impl TwoLevelCoupling {
    pub fn new(omega_r: f64, delta: f64) -> Result<Self> {
        if !(omega_r >= 0.0 && omega_r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega_r must be >= 0, got {omega_r}"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be finite, got {delta}"
            )));
        }
        Ok(Self { omega_r, delta })
    }
}

/// Trap sampled with its centre displaced to `z = -α`.
pub fn shifted_trap_field(grid: &Arc<GridSpec>, trap: &TrapSpec, alpha: f64) -> ScalarField {
    ScalarField::from_fn(grid.clone(), |r| {
        trap_value([r[0], r[1], r[2] + alpha], trap)
    })
}

/// Uniform-node trapezoidal average of `f(sin φ)` over one period.
pub fn phase_average(n_quad: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = 2.0 * PI / n_quad as f64;
    (0..n_quad)
        .map(|j| f((-PI + j as f64 * h).sin()))
        .sum::<f64>()
        / n_quad as f64
}

fn check_nodes(n_quad: usize) -> Result<()> {
    if n_quad < 32 {
        return Err(Error::InvalidParameter(format!(
            "phase average needs at least 32 nodes, got {n_quad}"
        )));
    }
    Ok(())
}

/// Drive-period average `(1/2π)∫dφ V(r + α₀ sin φ e_z)`, evaluated exactly.
///
/// The period is split where the shifted trap crosses the cut; inside, the
/// integrand is a quadratic in `s = sin φ` whose moments under the arcsine
/// weight `1/(π√(1-s²))` are closed-form. Independent of the drive frequency.
pub fn time_averaged_potential(grid: &Arc<GridSpec>, trap: &TrapSpec, alpha0: f64) -> ScalarField {
    ScalarField::from_fn(grid.clone(), |r| averaged_trap_value(r, trap, alpha0))
}

/// Same average by the uniform `n_quad`-node rule. Exact for uncut traps;
/// only second-order accurate across the kinks of a cut trap.
pub fn time_averaged_potential_quadrature(
    grid: &Arc<GridSpec>,
    trap: &TrapSpec,
    alpha0: f64,
    n_quad: usize,
) -> Result<ScalarField> {
    check_nodes(n_quad)?;
    if alpha0 == 0.0 {
        return Ok(shifted_trap_field(grid, trap, 0.0));
    }
    Ok(ScalarField::from_fn(grid.clone(), |r| {
        phase_average(n_quad, |s| {
            trap_value([r[0], r[1], r[2] + alpha0 * s], trap)
        })
    }))
}

/// Pointwise exact drive-period average of the (cut) trap.
pub fn averaged_trap_value(r: [f64; 3], trap: &TrapSpec, alpha0: f64) -> f64 {
    let a = alpha0.abs();
    if a == 0.0 {
        return trap_value(r, trap);
    }
    let e_t = 0.5 * (trap.omega_x.powi(2) * r[0] * r[0] + trap.omega_y.powi(2) * r[1] * r[1]);
    let wz2 = trap.omega_z * trap.omega_z;
    let z = r[2];
    // s-interval where the shifted trap lies below the cut
    let (lo, hi, vc) = match trap.v_cut {
        None => (-1.0, 1.0, 0.0),
        Some(vc) => {
            if e_t >= vc {
                return vc;
            }
            let reach = (2.0 * (vc - e_t) / wz2).sqrt();
            (((-reach - z) / a).max(-1.0), ((reach - z) / a).min(1.0), vc)
        }
    };
    if lo >= hi {
        return vc;
    }
    let sq = |s: f64| (1.0 - s * s).max(0.0).sqrt();
    let m0 = (hi.asin() - lo.asin()) / PI;
    let m1 = (sq(lo) - sq(hi)) / PI;
    let m2 = ((hi.asin() - hi * sq(hi)) - (lo.asin() - lo * sq(lo))) / (2.0 * PI);
    let inside = (e_t + 0.5 * wz2 * z * z) * m0 + wz2 * z * a * m1 + 0.5 * wz2 * a * a * m2;
    inside + vc * (1.0 - m0)
}

/// Lower and upper dressed branches for a trapped-state energy `h`.
///
/// Uses `V₋V₊ = hΔ - ω_R²/4` to avoid cancellation far from resonance.
pub fn dressed_branches(h: f64, coupling: &TwoLevelCoupling) -> (f64, f64) {
    let d = coupling.delta;
    let c = 0.5 * coupling.omega_r;
    let sum = h + d;
    let root = ((h - d).powi(2) + coupling.omega_r.powi(2)).sqrt();
    let det = h * d - c * c;
    if sum >= 0.0 {
        let upper = 0.5 * (sum + root);
        let lower = if upper != 0.0 {
            det / upper
        } else {
            0.5 * (sum - root)
        };
        (lower, upper)
    } else {
        let lower = 0.5 * (sum - root);
        let upper = if lower != 0.0 {
            det / lower
        } else {
            0.5 * (sum + root)
        };
        (lower, upper)
    }
}

/// `(V₋, V₊)` at axial position `z` with the trap shifted by `α`.
pub fn dressed_potentials(
    z: f64,
    alpha: f64,
    coupling: &TwoLevelCoupling,
    omega_z: f64,
) -> (f64, f64) {
    let h = 0.5 * omega_z * omega_z * (z + alpha).powi(2);
    dressed_branches(h, coupling)
}

/// Dressed branches on a grid; the trapped state sees the uncut harmonic.
pub fn dressed_fields(
    grid: &Arc<GridSpec>,
    trap: &TrapSpec,
    alpha: f64,
    coupling: &TwoLevelCoupling,
) -> (ScalarField, ScalarField) {
    let lower = ScalarField::from_fn(grid.clone(), |r| {
        dressed_branches(trap.harmonic([r[0], r[1], r[2] + alpha]), coupling).0
    });
    let upper = ScalarField::from_fn(grid.clone(), |r| {
        dressed_branches(trap.harmonic([r[0], r[1], r[2] + alpha]), coupling).1
    });
    (lower, upper)
}

/// Drive-period average of the lower dressed branch, taken after the square
/// root (the full `V₋(z, α₀ sin φ)` is averaged).
pub fn time_averaged_lower_branch(
    grid: &Arc<GridSpec>,
    trap: &TrapSpec,
    alpha0: f64,
    coupling: &TwoLevelCoupling,
    n_quad: usize,
) -> Result<ScalarField> {
    check_nodes(n_quad)?;
    Ok(ScalarField::from_fn(grid.clone(), |r| {
        phase_average(n_quad, |s| {
            dressed_branches(trap.harmonic([r[0], r[1], r[2] + alpha0 * s]), coupling).0
        })
    }))
}

/// Double-well structure of an axial potential profile.
#[derive(Debug, Clone, PartialEq)]
pub enum WellStructure {
    DoubleWell {
        /// Saddle value minus the shallower of the two well bottoms.
        barrier: f64,
        minima: [f64; 2],
        minimum_values: [f64; 2],
        saddle_position: f64,
        saddle_value: f64,
    },
    NoDoubleWell,
}

impl WellStructure {
    pub fn barrier(&self) -> Option<f64> {
        match self {
            WellStructure::DoubleWell { barrier, .. } => Some(*barrier),
            WellStructure::NoDoubleWell => None,
        }
    }

    pub fn saddle_value(&self) -> Option<f64> {
        match self {
            WellStructure::DoubleWell { saddle_value, .. } => Some(*saddle_value),
            WellStructure::NoDoubleWell => None,
        }
    }
}

/// Locates the two deepest wells of a profile `v(z)` and the maximum between
/// them. Plateaus never count as minima.
pub fn barrier_height(z: &[f64], v: &[f64]) -> WellStructure {
    assert_eq!(z.len(), v.len(), "coordinate and value lengths differ");
    let n = v.len();
    if n < 3 {
        return WellStructure::NoDoubleWell;
    }

    // a minimum is entered by a strict descent and left without descending
    let mut minima = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if v[i] < v[i - 1] {
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] > v[i] {
                minima.push((i + j) / 2);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    if minima.len() < 2 {
        return WellStructure::NoDoubleWell;
    }

    let deepest = *minima
        .iter()
        .min_by(|&&a, &&b| v[a].total_cmp(&v[b]))
        .expect("non-empty");
    let saddle_between = |a: usize, b: usize| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        (lo..=hi)
            .max_by(|&p, &q| v[p].total_cmp(&v[q]))
            .expect("non-empty range")
    };
    let partner = minima
        .iter()
        .copied()
        .filter(|&m| m != deepest)
        .filter(|&m| {
            let s = saddle_between(deepest, m);
            v[s] > v[m] && v[s] > v[deepest]
        })
        .min_by(|&a, &b| v[a].total_cmp(&v[b]));
    let Some(partner) = partner else {
        return WellStructure::NoDoubleWell;
    };

    let (left, right) = if z[deepest] < z[partner] {
        (deepest, partner)
    } else {
        (partner, deepest)
    };
    let saddle = saddle_between(left, right);
    let shallow = v[left].max(v[right]);
    WellStructure::DoubleWell {
        barrier: v[saddle] - shallow,
        minima: [z[left], z[right]],
        minimum_values: [v[left], v[right]],
        saddle_position: z[saddle],
        saddle_value: v[saddle],
    }
}

/// [`barrier_height`] on the axial slice of a grid field.
pub fn axial_barrier(field: &ScalarField) -> WellStructure {
    barrier_height(&field.grid().z_coords(), &field.axial_slice())
}
