//! Escape rate from the shallow cut trap (V_c = 50) for several shaking
//! amplitudes, fitted after the turn-on. Runs the sweep on all cores.
//!
//! ```bash
//! cargo run --release -p gpe-core --example stabilization_sweep -- 10 15 20 25
//! ```

use gpe_core::experiments::{parse_config, summary_csv, sweep};

fn main() -> gpe_core::Result<()> {
    let mut values: Vec<String> = std::env::args().skip(1).collect();
    if values.len() < 2 {
        values = vec!["15".into(), "20".into()];
    }
    let base = parse_config(
        "grid.points = [2048]\n\
         trap.v_cut = 50\n\
         drive.omega = 10\n\
         drive.t_on_cycles = 100\n\
         coupling.g_eff = 100\n\
         propagation.cycles_total = 400\n",
    )?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = sweep(&base, "drive.alpha0", &values, workers, None)?;
    print!("{}", summary_csv(&report));
    for r in &report.ratios {
        println!("rate({}) / rate({}) = {:.3}", r.a, r.b, r.ratio);
    }
    for row in &report.rows {
        if let Ok(m) = &row.outcome {
            if let Some(rate) = m.rate_per_cycle {
                println!(
                    "alpha0 = {}: {:.3e} % per 100 cycles",
                    row.value,
                    1e4 * rate
                );
            }
        }
    }
    Ok(())
}
