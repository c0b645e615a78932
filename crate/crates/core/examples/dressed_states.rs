//! Position-dependent dressed potentials of the microwave-coupled two-level
//! atom and the drive average of the lower branch.
//!
//! ```bash
//! cargo run --release -p gpe-core --example dressed_states
//! ```

use std::sync::Arc;

use gpe_core::numerics::GridSpec;
use gpe_core::potentials::{
    axial_barrier, dressed_fields, time_averaged_lower_branch, TrapSpec, TwoLevelCoupling,
    DEFAULT_PHASE_NODES,
};

fn main() -> gpe_core::Result<()> {
    let grid = Arc::new(GridSpec::line(64.0, 1024)?);
    let trap = TrapSpec::uncut();
    let levels = TwoLevelCoupling::new(100.0, 200.0)?;

    let (lower, upper) = dressed_fields(&grid, &trap, 0.0, &levels);
    let averaged = time_averaged_lower_branch(&grid, &trap, 30.0, &levels, DEFAULT_PHASE_NODES)?;
    let z = grid.z_coords();
    println!("{:>8} {:>12} {:>12} {:>12}", "z", "V-", "V+", "<V->");
    for i in (0..z.len()).step_by(32) {
        println!(
            "{:>8.2} {:>12.4} {:>12.4} {:>12.4}",
            z[i],
            lower.values()[i],
            upper.values()[i],
            averaged.values()[i]
        );
    }
    println!("averaged lower branch: {:?}", axial_barrier(&averaged));
    Ok(())
}
