use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gpe_core::experiments::{self, RunConfig, ScenarioOptions, ScenarioOutcome};
use gpe_core::potentials::WellStructure;

#[derive(Parser)]
#[command(
    name = "gpe",
    version,
    about = "Condensates in shaken, energy-cut harmonic traps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides `output.directory`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Concurrent runs for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the initial ground state (and the averaged-trap one if driven).
    Ground { config: PathBuf },
    /// Evolve a configuration and write its time series and snapshots.
    Evolve { config: PathBuf },
    /// Write the bare and drive-averaged trap profiles.
    Veff { config: PathBuf },
    /// Write the dressed branches and the averaged lower branch.
    Dressed { config: PathBuf },
    /// Run a named scenario; `--list` shows them.
    Scenario {
        name: Option<String>,
        #[arg(long)]
        list: bool,
        /// Full 3D variant (fig3 only).
        #[arg(long = "3d")]
        three_d: bool,
    },
    /// Run one configuration per value of a parameter.
    Sweep {
        config: PathBuf,
        /// Dotted key, e.g. `drive.alpha0`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
    },
}

fn load(path: &Path) -> gpe_core::Result<RunConfig> {
    experiments::parse_config(&fs::read_to_string(path)?)
}

fn print_wells(w: &WellStructure) {
    match w {
        WellStructure::DoubleWell {
            barrier, minima, ..
        } => println!(
            "double well: minima at {:.4} and {:.4}, barrier {:.4}",
            minima[0], minima[1], barrier
        ),
        WellStructure::NoDoubleWell => println!("no double well"),
    }
}

fn print_run(r: &experiments::RunReport, dir: &Path) {
    let last = r.trajectory.last();
    println!("initial mu = {:.6}", r.ground.mu);
    println!(
        "t = {:.4} ({:.1} cycles), norm = {:.8}",
        last.t, last.cycle, last.norm_total
    );
    if let Some(d) = &last.dichotomy {
        println!(
            "peaks = {}, separation = {:.4}, dip ratio = {:.4}",
            d.n_peaks, d.separation, d.dip_ratio
        );
    }
    if let (Some(lo), Some(up)) = (last.p_lower, last.p_upper) {
        println!("p_lower = {lo:.6}, p_upper = {up:.6}");
    }
    if let Some(e) = &r.escape {
        println!("escape rate = {:.4e} per cycle", e.rate_per_cycle);
    }
    println!("wrote {}", dir.display());
}

fn print_sweep(s: &experiments::SweepReport) {
    print!("{}", experiments::summary_csv(s));
    if !s.ratios.is_empty() {
        print!("{}", experiments::ratios_csv(s));
    }
}

fn run(cli: Cli) -> gpe_core::Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Ground { config } => {
            let cfg = load(&config)?;
            let dir = experiments::output_dir(&cfg, out);
            let g = experiments::write_ground(&cfg, &dir)?;
            println!(
                "mu = {:.6}, energy = {:.6}, residual = {:.2e}",
                g.initial.mu, g.initial.energy, g.initial.residual
            );
            if let Some(eff) = &g.effective {
                println!(
                    "mu_eff = {:.6}, dichotomy feasible = {}",
                    eff.state.mu, eff.dichotomy_feasible
                );
                print_wells(&eff.wells);
            }
            println!("wrote {}", dir.display());
        }
        Command::Evolve { config } => {
            let cfg = load(&config)?;
            let dir = experiments::output_dir(&cfg, out);
            let r = experiments::run_config(&cfg, &dir)?;
            print_run(&r, &dir);
        }
        Command::Veff { config } => {
            let cfg = load(&config)?;
            let dir = experiments::output_dir(&cfg, out);
            let t = experiments::write_veff(&cfg, &dir)?;
            print_wells(&t.wells);
            println!("wrote {}", dir.join("veff.dat").display());
        }
        Command::Dressed { config } => {
            let cfg = load(&config)?;
            let dir = experiments::output_dir(&cfg, out);
            let t = experiments::write_dressed(&cfg, &dir)?;
            print_wells(&t.wells);
            println!("wrote {}", dir.join("dressed.dat").display());
        }
        Command::Scenario {
            name,
            list,
            three_d,
        } => {
            let Some(name) = name.filter(|_| !list) else {
                for s in experiments::SCENARIOS {
                    println!("{:<14} {}", s.name, s.summary);
                }
                return Ok(());
            };
            let dir = out.map_or_else(|| PathBuf::from("out").join(&name), Path::to_path_buf);
            let opts = ScenarioOptions {
                three_d,
                workers: cli.workers,
            };
            match experiments::run_scenario(&name, &dir, opts)? {
                ScenarioOutcome::Veff(t) => print_wells(&t.wells),
                ScenarioOutcome::Dressed(t) => print_wells(&t.wells),
                ScenarioOutcome::Run(r) => print_run(&r, &dir),
                ScenarioOutcome::Sweep(s) => print_sweep(&s),
            }
        }
        Command::Sweep {
            config,
            param,
            values,
        } => {
            let cfg = load(&config)?;
            let dir = experiments::output_dir(&cfg, out);
            let values = experiments::parse_values(&values);
            let s = experiments::sweep(&cfg, &param, &values, cli.workers, Some(&dir))?;
            print_sweep(&s);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
