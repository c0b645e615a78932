use std::f64::consts::PI;
use std::sync::Arc;

use gpe_core::groundstate::{
    chemical_potential, critical_coupling, energy_functional, fidelity, imaginary_part_after_phase,
    parity_defect, solve_ground, solve_ground_effective, solve_ground_in_trap, Coupling,
    ImaginaryTimeStepper, PotentialTag, SolverOptions,
};
use gpe_core::numerics::{norm2, Complex64, ComplexField, GridSpec, ScalarField};
use gpe_core::observables::dichotomy_metric;
use gpe_core::potentials::{shifted_trap_field, time_averaged_potential, TrapSpec};
use gpe_core::Error;
use proptest::prelude::*;

fn line(l: f64, n: usize) -> Arc<GridSpec> {
    Arc::new(GridSpec::line(l, n).unwrap())
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn thomas_fermi_mu(g: f64) -> f64 {
    (3.0 * g / (4.0 * 2f64.sqrt())).powf(2.0 / 3.0)
}

/// `E/μ` of the 1D Thomas-Fermi profile, by brute-force quadrature of
/// `ρ = (μ - z²/2)/g` normalized to one.
fn thomas_fermi_energy_ratio(g: f64) -> f64 {
    // normalization fixes μ; bisect it rather than use the closed form
    let norm = |mu: f64| {
        let r = (2.0 * mu).sqrt();
        let n = 20_000;
        let h = 2.0 * r / n as f64;
        (0..n)
            .map(|j| {
                let z = -r + (j as f64 + 0.5) * h;
                (mu - 0.5 * z * z).max(0.0) / g * h
            })
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (0.0, 1e4);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let r = (2.0 * mu).sqrt();
    let n = 20_000;
    let h = 2.0 * r / n as f64;
    let energy: f64 = (0..n)
        .map(|j| {
            let z = -r + (j as f64 + 0.5) * h;
            let rho = (mu - 0.5 * z * z).max(0.0) / g;
            (0.5 * z * z * rho + 0.5 * g * rho * rho) * h
        })
        .sum();
    energy / mu
}

fn oscillator_ground(grid: &Arc<GridSpec>) -> ComplexField {
    ComplexField::from_fn(grid.clone(), |r| {
        Complex64::new(PI.powf(-0.25) * (-r[2] * r[2] / 2.0).exp(), 0.0)
    })
}

#[test]
fn oscillator_gaussian_energies() {
    let g = line(16.0, 256);
    let v = shifted_trap_field(&g, &TrapSpec::uncut(), 0.0);
    let psi = oscillator_ground(&g);
    let mu = chemical_potential(&psi, &v, Coupling::none());
    let e = energy_functional(&psi, &v, Coupling::none());
    assert!((mu - 0.5).abs() < 1e-12);
    assert!((e - 0.5).abs() < 1e-12);
}

#[test]
fn uniform_box_chemical_potential() {
    let grid = line(5.0, 64);
    let volume: f64 = 10.0;
    let psi = ComplexField::from_fn(grid.clone(), |_| Complex64::new(volume.powf(-0.5), 0.0));
    let v = ScalarField::from_fn(grid, |_| 0.0);
    let mu = chemical_potential(&psi, &v, Coupling::new(7.0).unwrap());
    assert!((mu - 7.0 / volume).abs() < 1e-12);
}

#[test]
fn uncut_oscillator_ground_state() {
    let g = line(16.0, 256);
    let st = solve_ground_in_trap(&g, &TrapSpec::uncut(), Coupling::none(), &opts()).unwrap();
    assert!((st.mu - 0.5).abs() < 1e-6);
    assert!(fidelity(&st.psi, &oscillator_ground(&g)).unwrap() > 1.0 - 1e-8);
    assert_eq!(st.potential_tag, PotentialTag::Bare);
}

#[test]
fn cut_trap_chemical_potential() {
    let g = line(64.0, 2048);
    let st = solve_ground_in_trap(
        &g,
        &TrapSpec::cut(80.0).unwrap(),
        Coupling::new(100.0).unwrap(),
        &opts(),
    )
    .unwrap();
    assert!((st.mu / 14.13 - 1.0).abs() < 0.01, "mu = {}", st.mu);
    assert!((norm2(&st.psi) - 1.0).abs() < 1e-8);
    assert!(st.residual < 10.0 * opts().tol);
}

#[test]
fn approaches_thomas_fermi_from_above() {
    let g = line(64.0, 2048);
    let mut last_excess = f64::INFINITY;
    let mut last_ratio_gap = f64::INFINITY;
    for coupling in [100.0, 400.0, 1000.0] {
        let st = solve_ground_in_trap(
            &g,
            &TrapSpec::uncut(),
            Coupling::new(coupling).unwrap(),
            &opts(),
        )
        .unwrap();
        let tf = thomas_fermi_mu(coupling);
        let excess = st.mu / tf - 1.0;
        assert!(excess > 0.0 && excess < 0.05, "g = {coupling}: {excess}");
        assert!(excess < last_excess);
        last_excess = excess;

        let gap = (st.energy / st.mu - thomas_fermi_energy_ratio(coupling)).abs();
        assert!(gap < last_ratio_gap, "g = {coupling}: E/mu gap {gap}");
        last_ratio_gap = gap;
    }
    assert!(last_ratio_gap < 1e-3);
}

#[test]
fn solution_is_real_and_even() {
    let g = line(64.0, 1024);
    let st = solve_ground_in_trap(
        &g,
        &TrapSpec::cut(80.0).unwrap(),
        Coupling::new(100.0).unwrap(),
        &opts(),
    )
    .unwrap();
    assert!(imaginary_part_after_phase(&st.psi) < 1e-6);
    assert!(parity_defect(&st.psi) < 1e-6);
}

#[test]
fn chemical_potential_matches_decay_rate() {
    let g = line(64.0, 1024);
    let trap = TrapSpec::cut(80.0).unwrap();
    let coupling = Coupling::new(100.0).unwrap();
    let st = solve_ground_in_trap(&g, &trap, coupling, &opts()).unwrap();
    let v = shifted_trap_field(&g, &trap, 0.0);
    let dtau = 1e-5;
    let mut psi = st.psi.clone();
    ImaginaryTimeStepper::new(&v, coupling, dtau).step(&mut psi);
    let decay = -norm2(&psi).sqrt().ln() / dtau;
    assert!((decay / st.mu - 1.0).abs() < 1e-6, "{decay} vs {}", st.mu);
}

#[test]
fn imaginary_time_lowers_energy() {
    let g = line(32.0, 512);
    let trap = TrapSpec::cut(80.0).unwrap();
    let coupling = Coupling::new(100.0).unwrap();
    let v = shifted_trap_field(&g, &trap, 0.0);
    let mut psi = ComplexField::from_fn(g.clone(), |r| {
        Complex64::new((-(r[2] - 1.0).powi(2) / 8.0).exp(), 0.0)
    });
    psi.normalize().unwrap();
    let mut stepper = ImaginaryTimeStepper::new(&v, coupling, 1e-3);
    let mut e = energy_functional(&psi, &v, coupling);
    for _ in 0..2000 {
        stepper.step(&mut psi);
        psi.normalize().unwrap();
        let next = energy_functional(&psi, &v, coupling);
        assert!(next <= e + 1e-10, "{next} > {e}");
        e = next;
    }
}

#[test]
fn grid_refinement() {
    let trap = TrapSpec::cut(80.0).unwrap();
    let coupling = Coupling::new(100.0).unwrap();
    let coarse = solve_ground_in_trap(&line(64.0, 1024), &trap, coupling, &opts()).unwrap();
    let fine = solve_ground_in_trap(&line(64.0, 2048), &trap, coupling, &opts()).unwrap();
    assert!((coarse.mu / fine.mu - 1.0).abs() < 1e-4);
}

#[test]
fn effective_without_drive_is_bare() {
    let g = line(64.0, 1024);
    let trap = TrapSpec::cut(80.0).unwrap();
    let coupling = Coupling::new(100.0).unwrap();
    let bare = solve_ground_in_trap(&g, &trap, coupling, &opts()).unwrap();
    let eff = solve_ground_effective(&trap, 0.0, coupling, &g, &opts()).unwrap();
    assert_eq!(eff.state.potential_tag, PotentialTag::Effective);
    assert!((eff.state.mu - bare.mu).abs() < 1e-8);
    assert!(fidelity(&eff.state.psi, &bare.psi).unwrap() > 1.0 - 1e-10);
    assert!(!eff.dichotomy_feasible);
}

/// Minima of the phase-averaged cut trap on a dense scan, by brute force.
fn effective_minima(vc: f64, alpha0: f64) -> f64 {
    let average = |z: f64| {
        let n = 20_000;
        (0..n)
            .map(|j| {
                let phi = 2.0 * PI * (j as f64 + 0.5) / n as f64;
                (0.5 * (z + alpha0 * phi.sin()).powi(2)).min(vc)
            })
            .sum::<f64>()
            / n as f64
    };
    (1..4000)
        .map(|j| j as f64 * 0.01)
        .min_by(|a, b| average(*a).total_cmp(&average(*b)))
        .unwrap()
}

#[test]
fn shaken_ground_state_splits() {
    let g = line(64.0, 2048);
    let trap = TrapSpec::cut(80.0).unwrap();
    let eff =
        solve_ground_effective(&trap, 30.0, Coupling::new(100.0).unwrap(), &g, &opts()).unwrap();
    assert!(eff.dichotomy_feasible);
    let z = g.z_coords();
    let d = dichotomy_metric(&z, eff.state.psi.density().values()).unwrap();
    assert!(d.is_dichotomous);
    let well = effective_minima(80.0, 30.0);
    for p in &d.peak_positions {
        assert!((p.abs() - well).abs() < 1.0, "peak {p} vs well {well}");
    }
    assert!((d.peak_positions[0] + d.peak_positions[1]).abs() < 1e-9);
}

#[test]
fn feasibility_flips_at_critical_coupling() {
    let g = line(64.0, 1024);
    let trap = TrapSpec::cut(80.0).unwrap();
    let o = SolverOptions {
        tol: 1e-7,
        max_iter: 50_000,
        ..opts()
    };
    let gstar = critical_coupling(&trap, 30.0, &g, 1.0, 1000.0, 1.0, &o)
        .unwrap()
        .expect("bracket straddles the threshold");
    let saddle = gpe_core::potentials::axial_barrier(&time_averaged_potential(&g, &trap, 30.0))
        .saddle_value()
        .unwrap();
    let below =
        solve_ground_effective(&trap, 30.0, Coupling::new(gstar - 5.0).unwrap(), &g, &o).unwrap();
    assert!(below.dichotomy_feasible && below.state.mu < saddle);
    match solve_ground_effective(&trap, 30.0, Coupling::new(gstar + 5.0).unwrap(), &g, &o) {
        Ok(above) => assert!(!above.dichotomy_feasible && above.state.mu > saddle),
        Err(Error::NotConverged { mu, .. }) => assert!(mu > saddle),
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn iteration_budget_is_reported() {
    let g = line(64.0, 1024);
    let err = solve_ground_in_trap(
        &g,
        &TrapSpec::uncut(),
        Coupling::new(100.0).unwrap(),
        &SolverOptions {
            max_iter: 50,
            ..opts()
        },
    )
    .unwrap_err();
    match err {
        Error::NotConverged { mu, residual, .. } => assert!(mu > 0.0 && residual > 0.0),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn arbitrary_potential_solve() {
    // a tilted double well that is not a trap preset
    let g = line(12.0, 256);
    let v = ScalarField::from_fn(g.clone(), |r| {
        let z = r[2];
        0.05 * (z * z - 9.0).powi(2) + 0.2 * z
    });
    let st = solve_ground(&v, Coupling::new(5.0).unwrap(), &opts()).unwrap();
    assert!(st.residual < 10.0 * opts().tol);
    assert!((st.mu - chemical_potential(&st.psi, &v, Coupling::new(5.0).unwrap())).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interaction_energy_gap(
        a in 0.3f64..3.0,
        z0 in -4.0f64..4.0,
        k in -2.0f64..2.0,
        coupling in 0.0f64..500.0,
    ) {
        let g = line(16.0, 256);
        let mut psi = ComplexField::from_fn(g.clone(), |r| {
            Complex64::from_polar((-(r[2] - z0).powi(2) / (2.0 * a * a)).exp(), k * r[2])
        });
        psi.normalize().unwrap();
        let v = shifted_trap_field(&g, &TrapSpec::cut(20.0).unwrap(), 0.0);
        let c = Coupling::new(coupling).unwrap();
        let quartic: f64 = psi.values().iter().map(|c| c.norm_sqr().powi(2)).sum::<f64>()
            * g.volume_element();
        let gap = chemical_potential(&psi, &v, c) - energy_functional(&psi, &v, c);
        prop_assert!((gap - 0.5 * coupling * quartic).abs() < 1e-9);
        prop_assert!(gap >= -1e-12);
    }
}
