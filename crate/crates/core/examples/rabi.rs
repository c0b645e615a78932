//! Resonant Rabi flopping of a homogeneous two-level condensate compared
//! with sin²(ω_R t / 2).
//!
//! ```bash
//! cargo run --release -p gpe-core --example rabi
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use gpe_core::groundstate::Coupling;
use gpe_core::numerics::{norm2, Complex64, ComplexField, GridSpec};
use gpe_core::potentials::{DriveSchedule, TrapSpec, TwoLevelCoupling};
use gpe_core::propagation::{TwoComponentPropagator, TwoComponentState};

fn main() -> gpe_core::Result<()> {
    let grid = Arc::new(GridSpec::line(8.0, 64)?);
    let omega_r = 2.0;
    let dt = 1e-3;
    // ω_z → 0 leaves a flat trapped-state potential
    let flat = TrapSpec::new(1.0, 1.0, 1e-12, None)?;
    let mut prop = TwoComponentPropagator::new(
        &grid,
        flat,
        DriveSchedule::at_rest(),
        Coupling::none(),
        TwoLevelCoupling::new(omega_r, 0.0)?,
        dt,
        None,
    )?;
    let uniform = Complex64::new((2.0 * grid.half_extents()[0]).powf(-0.5), 0.0);
    let mut state = TwoComponentState::all_trapped(ComplexField::from_fn(grid, |_| uniform));

    let period = 2.0 * PI / omega_r;
    let per_print = (period / 8.0 / dt).round() as usize;
    let mut worst: f64 = 0.0;
    println!("{:>8} {:>12} {:>12}", "t", "P1", "sin²");
    for k in 0..=40 {
        let t = (k * per_print) as f64 * dt;
        let p1 = norm2(&state.untrapped);
        let exact = (0.5 * omega_r * t).sin().powi(2);
        worst = worst.max((p1 - exact).abs());
        println!("{t:>8.4} {p1:>12.8} {exact:>12.8}");
        prop.advance(&mut state, t, per_print);
    }
    println!("max deviation over 5 periods: {worst:.2e}");
    Ok(())
}
