//! Shaking a cigar-shaped trap along its long axis in the (x, z) plane.
//! Prints the axial profile through x = 0 at the end. Pass the number of
//! cycles (default 400, of which 250 are turn-on) and optionally the
//! transverse point count (default 128).
//!
//! ```bash
//! cargo run --release -p gpe-core --example cigar_2d -- 400 128
//! ```

use gpe_core::experiments::{parse_config, simulate};

fn main() -> gpe_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let cycles: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(400.0);
    let nx: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(128);
    let cfg = parse_config(&format!(
        "grid.ndim = 2\n\
         grid.half_extents = [8, 96]\n\
         grid.points = [{nx}, 1024]\n\
         trap.omega_x = 5\n\
         trap.v_cut = 30\n\
         drive.alpha0 = 60\n\
         drive.omega = 10\n\
         drive.t_on_cycles = {}\n\
         coupling.g_eff = 100\n\
         propagation.cycles_total = {cycles}\n",
        cycles * 250.0 / 400.0
    ))?;
    let report = simulate(&cfg)?;
    println!("mu = {:.4}", report.ground.mu);
    for r in report.trajectory.records.iter().step_by(50) {
        let d = r.dichotomy.as_ref().expect("non-empty density");
        println!(
            "cycle {:>5.0}: norm {:.5}, peaks {}, separation {:.2}",
            r.cycle, r.norm_total, d.n_peaks, d.separation
        );
    }
    let last = report.trajectory.last();
    println!("final: {:?}", last.dichotomy);
    println!("wall time {:.1?}", report.wall_time);
    Ok(())
}
