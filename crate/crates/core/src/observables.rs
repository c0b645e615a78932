//! Diagnostics computed from densities, norm histories and two-component
//! states: splitting classification, escape rates, fidelities and dressed
//! branch populations.

use crate::error::{Error, Result};
use crate::groundstate::fidelity;
use crate::numerics::{Complex64, ComplexField};
use crate::potentials::{TrapSpec, TwoLevelCoupling};
use crate::propagation::TwoComponentState;

/// Peaks below this fraction of the global maximum are ignored.
pub const PEAK_THRESHOLD: f64 = 0.05;
/// Dip ratio below which two peaks count as split.
pub const DIP_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyReport {
    pub n_peaks: usize,
    pub peak_positions: Vec<f64>,
    pub separation: f64,
    /// Smoothed density at the deepest point between the two highest peaks
    /// over the larger of them; 1 when there is a single peak.
    pub dip_ratio: f64,
    pub is_dichotomous: bool,
}

/// Classifies an axial density profile as single-lobed or split.
///
/// The profile is smoothed with a 3-point moving average; maxima below 5% of
/// the global maximum are dropped, and a remaining maximum counts as a
/// separate peak only when every path to higher terrain dips below half of
/// its height.
pub fn dichotomy_metric(z: &[f64], density: &[f64]) -> Result<DichotomyReport> {
    if z.len() != density.len() {
        return Err(Error::InvalidParameter(format!(
            "{} coordinates for {} density values",
            z.len(),
            density.len()
        )));
    }
    let n = density.len();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            density[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let top = smooth.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::EmptyDensity);
    }

    // local maxima; a flat top counts once, at its centre
    let mut candidates = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && smooth[j + 1] == smooth[i] {
            j += 1;
        }
        let rises = i == 0 || smooth[i - 1] < smooth[i];
        let falls = j == n - 1 || smooth[j + 1] < smooth[i];
        if rises && falls && smooth[i] >= PEAK_THRESHOLD * top {
            candidates.push((i, j));
        }
        i = j + 1;
    }

    let peaks: Vec<(usize, usize)> = candidates
        .into_iter()
        .filter(|&(a, b)| {
            let h = smooth[a];
            let col = key_col(&smooth, a, b);
            col.is_none_or(|c| c < DIP_THRESHOLD * h)
        })
        .collect();

    let position = |&(a, b): &(usize, usize)| 0.5 * (z[a] + z[b]);
    let peak_positions: Vec<f64> = peaks.iter().map(position).collect();
    let n_peaks = peaks.len();

    let (separation, dip_ratio) = if n_peaks >= 2 {
        let mut order: Vec<usize> = (0..n_peaks).collect();
        order.sort_by(|&p, &q| smooth[peaks[q].0].total_cmp(&smooth[peaks[p].0]));
        let (p, q) = (peaks[order[0]], peaks[order[1]]);
        let (left, right) = if p.0 < q.0 { (p, q) } else { (q, p) };
        let dip = smooth[left.1..=right.0]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let high = smooth[p.0].max(smooth[q.0]);
        ((position(&right) - position(&left)).abs(), dip / high)
    } else {
        (0.0, 1.0)
    };

    Ok(DichotomyReport {
        n_peaks,
        peak_positions,
        separation,
        dip_ratio,
        is_dichotomous: n_peaks == 2 && dip_ratio < DIP_THRESHOLD,
    })
}

/// Highest saddle connecting the plateau `a..=b` to strictly higher terrain,
/// or `None` for the global maximum.
fn key_col(s: &[f64], a: usize, b: usize) -> Option<f64> {
    let h = s[a];
    let side = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut low = h;
        for k in range {
            if s[k] > h {
                return Some(low);
            }
            low = low.min(s[k]);
        }
        None
    };
    let left = side(&mut (0..a).rev());
    let right = side(&mut (b + 1..s.len()));
    match (left, right) {
        (None, None) => None,
        (Some(l), None) => Some(l),
        (None, Some(r)) => Some(r),
        (Some(l), Some(r)) => Some(l.max(r)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeReport {
    /// Fitted loss per drive cycle, `γ·2π/ω`, clamped at zero.
    pub rate_per_cycle: f64,
    /// Fitted decay constant of `N(t) = N₀e^{-γt}` in units of Ω_z.
    pub gamma: f64,
    pub fit_window: (f64, f64),
    /// RMS residual of the fit to `ln N`.
    pub fit_quality: f64,
    /// Set when the norm rises anywhere in the window.
    pub poor_fit: bool,
    pub samples: usize,
}

/// Least-squares fit of `ln N(t)` on the samples inside `window`.
pub fn escape_rate(
    times: &[f64],
    norms: &[f64],
    window: (f64, f64),
    drive_period: f64,
) -> Result<EscapeReport> {
    if times.len() != norms.len() {
        return Err(Error::InvalidParameter(
            "time and norm series differ in length".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(&t, &n)| (t, n))
        .collect();
    if pts.len() < 20 {
        return Err(Error::InvalidParameter(format!(
            "escape fit needs at least 20 samples in the window, got {}",
            pts.len()
        )));
    }
    if pts.iter().any(|&(_, n)| !(n > 0.0)) {
        return Err(Error::EmptyDensity);
    }
    let m = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let y_mean = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(sxy, sxx), &(t, n)| {
        let dt = t - t_mean;
        (sxy + dt * (n.ln() - y_mean), sxx + dt * dt)
    });
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let gamma = -slope;
    let fit_quality = (pts
        .iter()
        .map(|&(t, n)| (n.ln() - (y_mean + slope * (t - t_mean))).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let poor_fit = pts.windows(2).any(|w| w[1].1 > w[0].1 * (1.0 + 1e-12)) || gamma < 0.0;
    Ok(EscapeReport {
        rate_per_cycle: gamma.max(0.0) * drive_period,
        gamma,
        fit_window: window,
        fit_quality,
        poor_fit,
        samples: pts.len(),
    })
}

/// `|⟨ψ_ref|ψ⟩|²` with both states normalized.
///
/// Compare at drive zero crossings (whole cycles) so the oscillation of the
/// trap does not register as infidelity.
pub fn adiabaticity_fidelity(psi: &ComplexField, reference: &ComplexField) -> Result<f64> {
    fidelity(reference, psi)
}

/// Overlap of amplitude profiles `(∫|a||b|)² / (‖a‖²‖b‖²)`, blind to phase
/// gradients; 1 when the densities coincide up to scale.
pub fn shape_fidelity(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    a.check_same_grid(b)?;
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.values().iter().zip(b.values()) {
        let (p, q) = (x.norm(), y.norm());
        ab += p * q;
        aa += p * p;
        bb += q * q;
    }
    if aa == 0.0 || bb == 0.0 {
        return Err(Error::EmptyDensity);
    }
    Ok(ab * ab / (aa * bb))
}

/// Mixing angle θ of the local dressed basis: lower = (cos θ, -sin θ),
/// upper = (sin θ, cos θ) in the (trapped, untrapped) basis.
pub fn dressed_mixing_angle(h: f64, coupling: &TwoLevelCoupling) -> f64 {
    0.5 * coupling.omega_r.atan2(coupling.delta - h)
}

/// Populations of the lower and upper dressed manifolds for the trap shifted
/// by `alpha`. The mean-field term is common to both internal states and does
/// not change the local eigenvectors.
pub fn branch_populations(
    state: &TwoComponentState,
    coupling: &TwoLevelCoupling,
    trap: &TrapSpec,
    alpha: f64,
) -> (f64, f64) {
    let grid = state.trapped.grid().clone();
    let a = state.trapped.values();
    let b = state.untrapped.values();
    let (mut lower, mut upper) = (0.0, 0.0);
    grid.for_each_point(|i, r| {
        let h = trap.harmonic([r[0], r[1], r[2] + alpha]);
        let (s, c) = dressed_mixing_angle(h, coupling).sin_cos();
        let lo: Complex64 = a[i] * c - b[i] * s;
        let up: Complex64 = a[i] * s + b[i] * c;
        lower += lo.norm_sqr();
        upper += up.norm_sqr();
    });
    let dv = grid.volume_element();
    (lower * dv, upper * dv)
}
