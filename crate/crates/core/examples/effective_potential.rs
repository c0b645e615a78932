//! Drive-averaged trap for growing shaking amplitude: where the double well
//! appears, how deep it is, and the largest gN that still splits.
//!
//! ```bash
//! cargo run --release -p gpe-core --example effective_potential
//! ```

use std::sync::Arc;

use gpe_core::groundstate::{critical_coupling, SolverOptions};
use gpe_core::numerics::GridSpec;
use gpe_core::potentials::{axial_barrier, time_averaged_potential, TrapSpec, WellStructure};

fn main() -> gpe_core::Result<()> {
    let grid = Arc::new(GridSpec::line(64.0, 1024)?);
    let trap = TrapSpec::cut(80.0)?;

    println!(
        "{:>7} {:>10} {:>10} {:>10}",
        "alpha0", "z_min", "V_min", "barrier"
    );
    for alpha0 in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0] {
        let veff = time_averaged_potential(&grid, &trap, alpha0);
        match axial_barrier(&veff) {
            WellStructure::DoubleWell {
                barrier,
                minima,
                minimum_values,
                ..
            } => println!(
                "{alpha0:>7.1} {:>10.4} {:>10.4} {barrier:>10.4}",
                minima[1], minimum_values[1]
            ),
            WellStructure::NoDoubleWell => println!("{alpha0:>7.1} {:>10}", "single"),
        }
    }

    let options = SolverOptions {
        tol: 1e-7,
        max_iter: 50_000,
        ..SolverOptions::default()
    };
    match critical_coupling(&trap, 30.0, &grid, 1.0, 1000.0, 1.0, &options)? {
        Some(g) => println!("alpha0 = 30: mu_eff reaches the barrier top at gN = {g:.0}"),
        None => println!("alpha0 = 30: no threshold in [1, 1000]"),
    }
    Ok(())
}
