//! Writes a ground state to the binary snapshot format, reads it back and
//! checks the round trip bit for bit.
//!
//! ```bash
//! cargo run --release -p gpe-core --example snapshot_io -- /tmp/ground.gpes
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use gpe_core::experiments::{read_snapshot, write_snapshot};
use gpe_core::groundstate::{solve_ground_in_trap, Coupling, SolverOptions};
use gpe_core::numerics::GridSpec;
use gpe_core::potentials::TrapSpec;

fn main() -> gpe_core::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("ground.gpes"), PathBuf::from);
    let grid = Arc::new(GridSpec::line(64.0, 1024)?);
    let ground = solve_ground_in_trap(
        &grid,
        &TrapSpec::cut(80.0)?,
        Coupling::new(100.0)?,
        &SolverOptions::default(),
    )?;
    write_snapshot(&ground.psi, &path, 0.0)?;
    let bytes = std::fs::metadata(&path)?.len();
    let (back, t) = read_snapshot(&path)?;
    let identical = ground
        .psi
        .values()
        .iter()
        .zip(back.values())
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    println!(
        "{}: {bytes} bytes, t = {t}, bitwise identical: {identical}",
        path.display()
    );
    Ok(())
}
