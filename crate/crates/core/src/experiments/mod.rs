//! Configuration, named scenarios, sweeps and file output.
//!
//! A run directory holds `manifest.txt` (the fully resolved configuration,
//! re-parseable, with defaulted keys marked), `timeseries.csv` and
//! `snapshots/*.gpes`. Identical configurations produce byte-identical CSV
//! and snapshot files.

mod config;
mod io;
mod run;
mod scenarios;
mod sweep;

pub use config::{
    parse_config, DriveBlock, GridBlock, OutputBlock, PropagationBlock, RunConfig, KEYS,
};
pub use io::{
    decode_snapshot, encode_snapshot, fmt12, read_snapshot, timeseries_csv, write_columns,
    write_snapshot, write_timeseries, SNAPSHOT_MAGIC, SNAPSHOT_VERSION, TIMESERIES_HEADER,
};
pub use run::{
    dressed_table, effective_ground, initial_ground, initial_potential, output_dir, run_config,
    scenario_for, simulate, veff_table, write_dressed, write_ground, write_run, write_veff,
    DressedTable, GroundReport, RunReport, VeffTable,
};
pub use scenarios::{
    find_scenario, run_scenario, scenario_config, scenario_names, Action, NamedScenario,
    ScenarioOptions, ScenarioOutcome, SCENARIOS,
};
pub use sweep::{
    parse_values, rate_ratios, ratios_csv, summary_csv, sweep, RateRatio, SweepMetrics,
    SweepReport, SweepRow,
};
