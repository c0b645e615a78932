//! Splitting of the condensate in the shaken cut trap, printed once every
//! 25 cycles. Pass the number of cycles (default 300; turn-on lasts half).
//!
//! ```bash
//! cargo run --release -p gpe-core --example dichotomy -- 300
//! ```

use gpe_core::experiments::{parse_config, simulate};

fn main() -> gpe_core::Result<()> {
    let cycles: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(300.0);
    let cfg = parse_config(&format!(
        "grid.points = [2048]\n\
         trap.v_cut = 80\n\
         drive.alpha0 = 30\n\
         drive.omega = 10\n\
         drive.t_on_cycles = {}\n\
         coupling.g_eff = 100\n\
         propagation.cycles_total = {cycles}\n",
        cycles / 2.0
    ))?;
    let report = simulate(&cfg)?;
    println!("mu = {:.4}", report.ground.mu);
    println!(
        "{:>6} {:>10} {:>6} {:>10} {:>10}",
        "cycle", "norm", "peaks", "sep", "dip"
    );
    for r in report.trajectory.records.iter().step_by(25) {
        let d = r.dichotomy.as_ref().expect("non-empty density");
        println!(
            "{:>6.0} {:>10.6} {:>6} {:>10.3} {:>10.4}",
            r.cycle, r.norm_total, d.n_peaks, d.separation, d.dip_ratio
        );
    }
    let last = report.trajectory.last();
    println!(
        "final peaks at {:?}",
        last.dichotomy.as_ref().map(|d| &d.peak_positions)
    );
    println!("wall time {:.1?}", report.wall_time);
    Ok(())
}
