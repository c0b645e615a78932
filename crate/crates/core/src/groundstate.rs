//! Stationary states of the time-independent equation
//! `μψ = [-½∇² + V + g|ψ|²]ψ` in an arbitrary static potential.
//!
//! The solver runs normalized imaginary-time split-step descent, kept
//! nonnegative, until the residual is moderate or the chemical potential
//! settles. It then polishes the state with a locally optimal block update over
//! `{ψ, preconditioned residual, previous step}`, which removes the O(dτ²)
//! splitting bias so the residual `‖(H[ψ] - μ)ψ‖` reaches the requested
//! tolerance. Potentials are real, so the state is kept real throughout.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numerics::{
    norm2, overlap, Complex64, ComplexField, GridSpec, KineticStep, ScalarField, Spectral,
};
use crate::potentials::{self, TrapSpec, WellStructure};

/// Dimensionless nonlinear coupling `gN`.
///
/// Values for 1D and 3D runs are not interconvertible; each is the coupling
/// of the dimensionality being simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub g_eff: f64,
}

impl Coupling {
    pub fn new(g_eff: f64) -> Result<Self> {
        if !(g_eff >= 0.0 && g_eff.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "g_eff must be >= 0, got {g_eff}"
            )));
        }
        Ok(Self { g_eff })
    }

    pub fn none() -> Self {
        Self { g_eff: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialTag {
    Bare,
    Effective,
    Custom(String),
}

#[derive(Debug, Clone)]
pub struct StationaryState {
    pub psi: ComplexField,
    pub mu: f64,
    pub energy: f64,
    pub residual: f64,
    pub potential_tag: PotentialTag,
    pub iterations: usize,
}

/// Ground state in the drive-averaged potential.
#[derive(Debug, Clone)]
pub struct EffectiveGroundState {
    pub state: StationaryState,
    pub potential: ScalarField,
    pub wells: WellStructure,
    /// `μ_eff` below the saddle of the double well.
    pub dichotomy_feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Initial imaginary-time step; halved whenever the energy rises.
    pub dtau: f64,
    /// Relative μ drift bound; the residual must fall below `10·tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dtau: 1e-3,
            tol: 1e-9,
            max_iter: 400_000,
        }
    }
}

/// Energies and residual of a state in a fixed potential.
pub struct Functional {
    spectral: Spectral,
    potential: Vec<f64>,
    g: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub mu: f64,
    pub energy: f64,
    pub residual: f64,
}

impl Functional {
    pub fn new(potential: &ScalarField, coupling: Coupling) -> Self {
        Self {
            spectral: Spectral::new(potential.grid().clone()),
            potential: potential.values().to_vec(),
            g: coupling.g_eff,
        }
    }

    pub fn spectral_mut(&mut self) -> &mut Spectral {
        &mut self.spectral
    }

    /// `H[ψ]ψ` with the mean field of `density` frozen.
    fn apply_h(&mut self, psi: &[Complex64], density: &[f64]) -> Vec<Complex64> {
        let mut out = psi.to_vec();
        self.spectral.forward(&mut out);
        out.iter_mut()
            .zip(self.spectral.k_squared())
            .for_each(|(c, k2)| *c *= 0.5 * k2);
        self.spectral.inverse(&mut out);
        for (((o, p), v), n) in out.iter_mut().zip(psi).zip(&self.potential).zip(density) {
            *o += p * (v + self.g * n);
        }
        out
    }

    pub fn chemical_potential(&mut self, psi: &ComplexField) -> f64 {
        let (kin, pot, int) = self.parts(psi);
        kin + pot + int
    }

    pub fn energy(&mut self, psi: &ComplexField) -> f64 {
        let (kin, pot, int) = self.parts(psi);
        kin + pot + 0.5 * int
    }

    fn parts(&mut self, psi: &ComplexField) -> (f64, f64, f64) {
        let dv = psi.grid().volume_element();
        let kin = self.spectral.kinetic_energy(psi);
        let (pot, int) =
            psi.values()
                .iter()
                .zip(&self.potential)
                .fold((0.0, 0.0), |(p, i), (c, v)| {
                    let n = c.norm_sqr();
                    (p + v * n, i + self.g * n * n)
                });
        (kin, pot * dv, int * dv)
    }

    /// μ, E and `‖(H[ψ] - μ)ψ‖` for a normalized ψ.
    pub fn evaluate(&mut self, psi: &ComplexField) -> Evaluation {
        let dv = psi.grid().volume_element();
        let density: Vec<f64> = psi.values().iter().map(|c| c.norm_sqr()).collect();
        let hpsi = self.apply_h(psi.values(), &density);
        let mu: f64 = psi
            .values()
            .iter()
            .zip(&hpsi)
            .map(|(p, h)| (p.conj() * h).re)
            .sum::<f64>()
            * dv;
        let residual = (psi
            .values()
            .iter()
            .zip(&hpsi)
            .map(|(p, h)| (h - p * mu).norm_sqr())
            .sum::<f64>()
            * dv)
            .sqrt();
        let int: f64 = density.iter().map(|n| n * n).sum::<f64>() * dv * self.g;
        Evaluation {
            mu,
            energy: mu - 0.5 * int,
            residual,
        }
    }
}

/// `μ = ∫[½|∇ψ|² + V|ψ|² + g|ψ|⁴]`.
pub fn chemical_potential(psi: &ComplexField, potential: &ScalarField, coupling: Coupling) -> f64 {
    Functional::new(potential, coupling).chemical_potential(psi)
}

/// `E = ∫[½|∇ψ|² + V|ψ|² + (g/2)|ψ|⁴]`.
pub fn energy_functional(psi: &ComplexField, potential: &ScalarField, coupling: Coupling) -> f64 {
    Functional::new(potential, coupling).energy(psi)
}

/// One unnormalized imaginary-time Strang step of length `dtau`.
pub struct ImaginaryTimeStepper {
    spectral: Spectral,
    half_decay: Vec<Complex64>,
    potential: Vec<f64>,
    g: f64,
    dtau: f64,
}

impl ImaginaryTimeStepper {
    pub fn new(potential: &ScalarField, coupling: Coupling, dtau: f64) -> Self {
        let spectral = Spectral::new(potential.grid().clone());
        let half_decay = spectral.kinetic_multiplier(KineticStep::Imaginary(0.5 * dtau));
        Self {
            spectral,
            half_decay,
            potential: potential.values().to_vec(),
            g: coupling.g_eff,
            dtau,
        }
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn set_dtau(&mut self, dtau: f64) {
        self.dtau = dtau;
        self.half_decay = self
            .spectral
            .kinetic_multiplier(KineticStep::Imaginary(0.5 * dtau));
    }

    pub fn step(&mut self, psi: &mut ComplexField) {
        let data = psi.values_mut();
        self.spectral.apply_multiplier(data, &self.half_decay);
        for (c, v) in data.iter_mut().zip(&self.potential) {
            *c *= (-(v + self.g * c.norm_sqr()) * self.dtau).exp();
        }
        self.spectral.apply_multiplier(data, &self.half_decay);
    }
}

/// Ground state for `potential` starting from a nonnegative guess
/// `exp(-(V - V_min)/2)`, which follows every well of the potential.
pub fn solve_ground(
    potential: &ScalarField,
    coupling: Coupling,
    options: &SolverOptions,
) -> Result<StationaryState> {
    let vmin = potential
        .values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let guess = ComplexField::from_values(
        potential.grid().clone(),
        potential
            .values()
            .iter()
            .map(|v| Complex64::new((-(v - vmin) / 2.0).exp(), 0.0))
            .collect(),
    )?;
    solve_ground_from(
        potential,
        coupling,
        guess,
        options,
        PotentialTag::Custom("potential".into()),
    )
}

/// Ground state of the bare trap from a Gaussian matched to its frequencies.
pub fn solve_ground_in_trap(
    grid: &Arc<GridSpec>,
    trap: &TrapSpec,
    coupling: Coupling,
    options: &SolverOptions,
) -> Result<StationaryState> {
    let potential = potentials::shifted_trap_field(grid, trap, 0.0);
    let guess = gaussian_guess(grid, trap, &[0.0]);
    solve_ground_from(&potential, coupling, guess, options, PotentialTag::Bare)
}

/// Ground state in `V_eff(r, α₀)` and the double-well feasibility check.
pub fn solve_ground_effective(
    trap: &TrapSpec,
    alpha0: f64,
    coupling: Coupling,
    grid: &Arc<GridSpec>,
    options: &SolverOptions,
) -> Result<EffectiveGroundState> {
    let potential = potentials::time_averaged_potential(grid, trap, alpha0);
    let wells = potentials::axial_barrier(&potential);
    let centres = match &wells {
        WellStructure::DoubleWell { minima, .. } => minima.to_vec(),
        WellStructure::NoDoubleWell => vec![0.0],
    };
    let guess = gaussian_guess(grid, trap, &centres);
    let state = solve_ground_from(
        &potential,
        coupling,
        guess,
        options,
        PotentialTag::Effective,
    )?;
    let dichotomy_feasible = wells.saddle_value().is_some_and(|s| state.mu < s);
    Ok(EffectiveGroundState {
        state,
        potential,
        wells,
        dichotomy_feasible,
    })
}

/// Smallest coupling at which `μ_eff` reaches the double-well saddle, by
/// bisection on `[g_lo, g_hi]`. `None` when the bracket does not straddle it.
///
/// A coupling whose solve fails to converge with `μ` already above the saddle
/// (the condensate spills over the cut) counts as above threshold.
pub fn critical_coupling(
    trap: &TrapSpec,
    alpha0: f64,
    grid: &Arc<GridSpec>,
    mut g_lo: f64,
    mut g_hi: f64,
    g_tol: f64,
    options: &SolverOptions,
) -> Result<Option<f64>> {
    let saddle =
        potentials::axial_barrier(&potentials::time_averaged_potential(grid, trap, alpha0))
            .saddle_value();
    let feasible = |g: f64| -> Result<bool> {
        match solve_ground_effective(trap, alpha0, Coupling::new(g)?, grid, options) {
            Ok(eff) => Ok(eff.dichotomy_feasible),
            Err(Error::NotConverged { mu, .. }) if saddle.is_some_and(|s| mu > s) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if !feasible(g_lo)? || feasible(g_hi)? {
        return Ok(None);
    }
    while g_hi - g_lo > g_tol {
        let mid = 0.5 * (g_lo + g_hi);
        if feasible(mid)? {
            g_lo = mid;
        } else {
            g_hi = mid;
        }
    }
    Ok(Some(0.5 * (g_lo + g_hi)))
}

/// Sum of trap-matched Gaussians centred at the given axial positions.
pub fn gaussian_guess(grid: &Arc<GridSpec>, trap: &TrapSpec, z_centres: &[f64]) -> ComplexField {
    ComplexField::from_fn(grid.clone(), |r| {
        let transverse = trap.omega_x * r[0] * r[0] + trap.omega_y * r[1] * r[1];
        let v: f64 = z_centres
            .iter()
            .map(|z0| (-(transverse + trap.omega_z * (r[2] - z0).powi(2)) / 2.0).exp())
            .sum();
        Complex64::new(v, 0.0)
    })
}

pub fn solve_ground_from(
    potential: &ScalarField,
    coupling: Coupling,
    mut psi: ComplexField,
    options: &SolverOptions,
    potential_tag: PotentialTag,
) -> Result<StationaryState> {
    if !(options.tol > 0.0 && options.dtau > 0.0) {
        return Err(Error::InvalidParameter(
            "solver tol and dtau must be > 0".into(),
        ));
    }
    if psi.grid().as_ref() != potential.grid().as_ref() {
        return Err(Error::GridMismatch);
    }
    // the minimizer in a real potential is nonnegative; stray phases would
    // otherwise relax only through the soft ½∫ρ|∇φ|² modes, and sign changes
    // from kernel ringing can trap the descent near excited states
    discard_phase(&mut psi);
    psi.normalize()?;
    let mut functional = Functional::new(potential, coupling);
    let mut stepper = ImaginaryTimeStepper::new(potential, coupling, options.dtau);

    // stage one: imaginary-time descent to a coarse residual or a settled μ
    const CHECK_EVERY: usize = 25;
    const HANDOFF_RESIDUAL: f64 = 1e-2;
    let coarse_tol = options.tol.max(1e-5);
    let mut eval = functional.evaluate(&psi);
    let mut iterations = 0;
    loop {
        if iterations >= options.max_iter {
            return Err(Error::NotConverged {
                iterations,
                mu: eval.mu,
                residual: eval.residual,
            });
        }
        let before = psi.clone();
        for _ in 0..CHECK_EVERY {
            stepper.step(&mut psi);
            discard_phase(&mut psi);
            psi.normalize()?;
        }
        iterations += CHECK_EVERY;
        let next = functional.evaluate(&psi);
        if next.energy > eval.energy + 1e-10 * eval.energy.abs().max(1.0) {
            psi = before;
            stepper.set_dtau(0.5 * stepper.dtau());
            continue;
        }
        let drift = (next.mu - eval.mu).abs()
            / (next.mu.abs().max(1e-300) * CHECK_EVERY as f64 * stepper.dtau());
        eval = next;
        if drift < coarse_tol || eval.residual < HANDOFF_RESIDUAL.max(10.0 * options.tol) {
            break;
        }
    }

    // stage two: preconditioned Rayleigh-Ritz polish over {ψ, P r, previous step}
    let vmin = functional
        .potential
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let shift = (eval.mu - vmin).abs().max(1.0);
    let dv = psi.grid().volume_element();
    let mut last_mu = eval.mu;
    let mut previous: Option<Vec<Complex64>> = None;
    loop {
        let density: Vec<f64> = psi.values().iter().map(|c| c.norm_sqr()).collect();
        let hpsi = functional.apply_h(psi.values(), &density);
        let mu: f64 = dot(psi.values(), &hpsi, dv).re;
        let r: Vec<Complex64> = hpsi
            .iter()
            .zip(psi.values())
            .map(|(h, p)| h - p * mu)
            .collect();
        let residual = dot(&r, &r, dv).re.sqrt();
        let drift = (mu - last_mu).abs() / mu.abs().max(1e-300);
        last_mu = mu;
        if residual < 10.0 * options.tol && drift < options.tol {
            let energy = functional.energy(&psi);
            return Ok(StationaryState {
                psi,
                mu,
                energy,
                residual,
                potential_tag,
                iterations,
            });
        }
        if iterations >= options.max_iter {
            return Err(Error::NotConverged {
                iterations,
                mu,
                residual,
            });
        }
        iterations += 1;

        let d = precondition(&mut functional, r, &density, shift, vmin);
        let mut basis: Vec<Vec<Complex64>> = vec![psi.values().to_vec()];
        for v in std::iter::once(d).chain(previous.take()) {
            if let Some(v) = orthonormalize(v, &basis, dv) {
                basis.push(v);
            }
        }
        if basis.len() == 1 {
            continue;
        }
        let h_basis: Vec<Vec<Complex64>> = std::iter::once(hpsi)
            .chain(basis[1..].iter().map(|b| functional.apply_h(b, &density)))
            .collect();
        let n = basis.len();
        // projected H - μ, plus the mean-field response 2gρ that the energy
        // curvature adds along the search directions
        let m = DMatrix::from_fn(n, n, |i, j| {
            let mut v = dot(&basis[i], &h_basis[j], dv);
            if i == j {
                v -= mu;
            }
            if i > 0 && j > 0 {
                v += basis[i]
                    .iter()
                    .zip(&basis[j])
                    .zip(&density)
                    .map(|((a, b), rho)| a.conj() * b * *rho)
                    .sum::<Complex64>()
                    * (2.0 * coupling.g_eff * dv);
            }
            v
        });
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = m.symmetric_eigen();
        let lowest = (0..n)
            .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
            .expect("non-empty basis");
        let c = eig.eigenvectors.column(lowest);
        // keep the global phase of ψ
        let phase = if c[0].norm() > 0.0 {
            c[0].conj() / c[0].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut step = vec![Complex64::new(0.0, 0.0); basis[0].len()];
        for (b, ci) in basis[1..].iter().zip(c.iter().skip(1)) {
            let ci = ci * phase;
            step.iter_mut().zip(b).for_each(|(s, x)| *s += x * ci);
        }
        let c0 = c[0] * phase;
        psi.values_mut()
            .iter_mut()
            .zip(&step)
            .for_each(|(p, s)| *p = *p * c0 + s);
        drop_imaginary(&mut psi);
        psi.normalize()?;
        previous = Some(step);
    }
}

fn discard_phase(psi: &mut ComplexField) {
    psi.values_mut()
        .iter_mut()
        .for_each(|c| *c = Complex64::new(c.norm(), 0.0));
}

fn drop_imaginary(psi: &mut ComplexField) {
    psi.values_mut().iter_mut().for_each(|c| c.im = 0.0);
}

/// `Q(shift + ½k²)⁻¹Q r` with `Q = (shift/(shift + V - V_min + gρ))^½`.
fn precondition(
    functional: &mut Functional,
    mut r: Vec<Complex64>,
    density: &[f64],
    shift: f64,
    vmin: f64,
) -> Vec<Complex64> {
    let g = functional.g;
    let q: Vec<f64> = functional
        .potential
        .iter()
        .zip(density)
        .map(|(v, n)| (shift / (shift + (v - vmin) + g * n)).sqrt())
        .collect();
    r.iter_mut().zip(&q).for_each(|(c, q)| *c *= q);
    let sp = functional.spectral_mut();
    sp.forward(&mut r);
    for (c, k2) in r.iter_mut().zip(sp.k_squared()) {
        *c /= shift + 0.5 * k2;
    }
    sp.inverse(&mut r);
    r.iter_mut().zip(&q).for_each(|(c, q)| *c *= q);
    r
}

/// Gram-Schmidt against an orthonormal basis (twice, for stability);
/// `None` when little of `v` survives.
fn orthonormalize(
    mut v: Vec<Complex64>,
    basis: &[Vec<Complex64>],
    dv: f64,
) -> Option<Vec<Complex64>> {
    let n0 = dot(&v, &v, dv).re.sqrt();
    for _ in 0..2 {
        for b in basis {
            let proj = dot(b, &v, dv);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= y * proj);
        }
    }
    let n = dot(&v, &v, dv).re.sqrt();
    if !(n > 1e-10 * n0) || n == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

fn dot(a: &[Complex64], b: &[Complex64], dv: f64) -> Complex64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        * dv
}

/// Largest `|Im(ψe^{-iθ})|` after removing the best global phase.
pub fn imaginary_part_after_phase(psi: &ComplexField) -> f64 {
    let s: Complex64 = psi.values().iter().map(|c| c * c).sum();
    let theta = 0.5 * s.arg();
    let rot = Complex64::from_polar(1.0, -theta);
    psi.values()
        .iter()
        .map(|c| (c * rot).im.abs())
        .fold(0.0, f64::max)
}

/// `‖ψ(r) - ψ(-r)‖`.
pub fn parity_defect(psi: &ComplexField) -> f64 {
    let g = psi.grid();
    let v = psi.values();
    ((0..v.len())
        .map(|i| (v[i] - v[g.mirror_index(i)]).norm_sqr())
        .sum::<f64>()
        * g.volume_element())
    .sqrt()
}

/// Fidelity `|⟨a|b⟩|²` of two normalized states.
pub fn fidelity(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    Ok(overlap(a, b)?.norm_sqr() / (norm2(a) * norm2(b)))
}
