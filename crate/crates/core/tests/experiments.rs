use std::fs;
use std::path::Path;
use std::process::Command;

use approx::assert_relative_eq;
use gpe_core::experiments::{
    parse_config, read_snapshot, run_config, simulate, sweep, timeseries_csv, write_snapshot,
    RunConfig, KEYS, TIMESERIES_HEADER,
};
use gpe_core::numerics::{Complex64, ComplexField, GridSpec};
use gpe_core::Error;
use tempfile::tempdir;

const SMALL: &str = "\
# short shaken run
grid.ndim = 1
grid.half_extents = [48]
grid.points = [512]
trap.v_cut = 40
drive.alpha0 = 15
drive.omega = 10
drive.t_on_cycles = 4
coupling.g_eff = 50
propagation.cycles_total = 8
output.snapshot_times = [0, 3.1]
";

fn small() -> RunConfig {
    parse_config(SMALL).unwrap()
}

fn gpe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gpe"))
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn snapshot_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn minimal_config_is_defaulted() {
    let cfg = parse_config("grid.ndim = 1\ntrap.v_cut = 80\n").unwrap();
    assert_eq!(cfg.drive.alpha0, 0.0);
    assert!(cfg.is_explicit("trap.v_cut"));
    assert!(cfg.defaulted_keys().contains(&"drive.alpha0"));
}

#[test]
fn config_errors() {
    let base = "grid.ndim = 1\ntrap.v_cut = 80\n";
    match parse_config(&format!("{base}drive.omgea = 3\n")) {
        Err(Error::Config { line, message }) => {
            assert_eq!(line, 3);
            assert!(message.contains("drive.omgea"));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_config(&format!("{base}drive.omega = 0\n")),
        Err(Error::Config { .. }) | Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        parse_config(&format!("{base}coupling.g_eff = lots\n")),
        Err(Error::Config { line: 3, .. })
    ));
    assert!(parse_config("trap.v_cut = 80\n").is_err());
    assert!(parse_config("grid.ndim = 1\n").is_err());
}

#[test]
fn runs_are_byte_identical() {
    let a = tempdir().unwrap();
    let b = tempdir().unwrap();
    run_config(&small(), a.path()).unwrap();
    run_config(&small(), b.path()).unwrap();
    assert_eq!(
        read(&a.path().join("timeseries.csv")),
        read(&b.path().join("timeseries.csv"))
    );
    let names = snapshot_files(a.path());
    assert_eq!(names.len(), 2);
    assert_eq!(names, snapshot_files(b.path()));
    for n in &names {
        let p = Path::new("snapshots").join(n);
        assert_eq!(read(&a.path().join(&p)), read(&b.path().join(&p)));
    }
}

#[test]
fn manifest_reproduces_run() {
    let first = tempdir().unwrap();
    run_config(&small(), first.path()).unwrap();
    let manifest = fs::read_to_string(first.path().join("manifest.txt")).unwrap();
    // a single-component run has no coupling block to record
    for key in KEYS.iter().filter(|k| !k.starts_with("two_level.")) {
        assert!(
            manifest.lines().any(|l| l.starts_with(&format!("{key} ="))),
            "{key} missing from manifest"
        );
    }
    assert!(manifest.contains("# default"));
    for n in snapshot_files(first.path()) {
        assert!(manifest.contains(&n), "snapshot {n} not indexed");
    }

    let again = parse_config(&manifest).unwrap();
    let second = tempdir().unwrap();
    run_config(&again, second.path()).unwrap();
    assert_eq!(
        read(&first.path().join("timeseries.csv")),
        read(&second.path().join("timeseries.csv"))
    );
}

#[test]
fn timeseries_layout() {
    let report = simulate(&small()).unwrap();
    let csv = timeseries_csv(&report.trajectory);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), TIMESERIES_HEADER);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), report.trajectory.records.len());
    assert_eq!(rows.len(), 9, "one record per cycle plus the start");
    for (row, rec) in rows.iter().zip(&report.trajectory.records) {
        assert_eq!(row.len(), 12);
        // single-component runs leave the two-component columns empty
        for i in [3, 4, 10, 11] {
            assert!(row[i].is_empty());
        }
        let t: f64 = row[0].parse().unwrap();
        let norm: f64 = row[2].parse().unwrap();
        assert_relative_eq!(t, rec.t, max_relative = 1e-11);
        assert_relative_eq!(norm, rec.norm_total, max_relative = 1e-11);
    }
    let times: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn zero_duration_run_has_one_row() {
    let mut cfg = small();
    cfg.set("propagation.cycles_total", "0").unwrap();
    let report = simulate(&cfg).unwrap();
    assert_eq!(timeseries_csv(&report.trajectory).lines().count(), 2);
}

#[test]
fn snapshot_files_round_trip() {
    let dir = tempdir().unwrap();
    let g = std::sync::Arc::new(GridSpec::new(2, &[3.0, 5.0], &[8, 16]).unwrap());
    let f = ComplexField::from_fn(g, |r| Complex64::new(r[0].sin() * 1e-7, r[2].cos() / 3.0));
    let path = dir.path().join("f.gpes");
    write_snapshot(&f, &path, 12.5).unwrap();
    assert_eq!(
        fs::metadata(&path).unwrap().len(),
        4 + 4 + 4 + 2 * 4 + 2 * 8 + 8 + 128 * 16
    );
    let (back, t) = read_snapshot(&path).unwrap();
    assert_eq!(t, 12.5);
    assert_eq!(back.grid().points(), &[8, 16]);
    for (a, b) in f.values().iter().zip(back.values()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }

    let mut bytes = fs::read(&path).unwrap();
    bytes[..4].copy_from_slice(b"XXXX");
    fs::write(&path, &bytes).unwrap();
    let err = read_snapshot(&path).unwrap_err().to_string();
    assert!(err.contains("version"), "{err}");
    fs::write(&path, &fs::read(dir.path().join("f.gpes")).unwrap()[..40]).unwrap();
    assert!(read_snapshot(&path).is_err());
}

#[test]
fn repeated_sweep_values_agree() {
    let values = vec!["50".to_string(), "50".to_string()];
    let serial = sweep(&small(), "coupling.g_eff", &values, 1, None).unwrap();
    assert_eq!(serial.rows[0], serial.rows[1]);
    let parallel = sweep(&small(), "coupling.g_eff", &values, 2, None).unwrap();
    assert_eq!(serial.rows, parallel.rows);
}

#[test]
fn failed_sweep_member_is_a_row() {
    let dir = tempdir().unwrap();
    let values = vec!["15".to_string(), "oops".to_string(), "10".to_string()];
    let report = sweep(&small(), "drive.alpha0", &values, 2, Some(dir.path())).unwrap();
    assert!(report.rows[0].outcome.is_ok());
    assert!(report.rows[1].outcome.is_err());
    assert!(report.rows[2].outcome.is_ok());
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(dir.path().join("ratios.csv").exists());
    assert!(sweep(&small(), "drive.alpha0", &values[..1], 1, None).is_err());
    assert!(sweep(&small(), "drive.nonsense", &values, 1, None).is_err());
}

#[test]
fn faster_drive_excites_upper_branch() {
    let base = parse_config(
        "grid.ndim = 1\n\
         grid.half_extents = [64]\n\
         grid.points = [1024]\n\
         trap.v_cut = none\n\
         drive.alpha0 = 30\n\
         drive.t_on_cycles = 20\n\
         coupling.g_eff = 100\n\
         two_level.omega_r = 100\n\
         two_level.delta = 200\n\
         propagation.cycles_total = 30\n",
    )
    .unwrap();
    let values: Vec<String> = ["2.5", "5", "10"].iter().map(|s| s.to_string()).collect();
    let report = sweep(&base, "drive.omega", &values, 1, None).unwrap();
    let p: Vec<f64> = report
        .rows
        .iter()
        .map(|r| r.outcome.as_ref().unwrap().p_upper.unwrap())
        .collect();
    assert!(p[0] < p[1] && p[1] < p[2], "p_upper {p:?}");
}

#[test]
fn cli_unknown_scenario() {
    let out = gpe().args(["scenario", "fig9"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["fig1a", "fig1b", "fig2a", "fig2b", "fig3", "stabilization"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn cli_lists_scenarios() {
    let out = gpe().args(["scenario", "--list"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 6);
}

/// Interior local minima of a sampled profile.
fn count_minima(v: &[f64]) -> usize {
    v.windows(3).filter(|w| w[1] < w[0] && w[1] <= w[2]).count()
}

#[test]
fn cli_fig1a_profiles() {
    let dir = tempdir().unwrap();
    let out = gpe()
        .args(["scenario", "fig1a", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("veff.dat")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    let bare: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let averaged: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    assert_eq!(count_minima(&bare), 1);
    assert_eq!(count_minima(&averaged), 2);
}

#[test]
fn cli_ground_and_sweep() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, SMALL).unwrap();

    let out = gpe()
        .arg("ground")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("ground"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("mu ="));
    assert!(dir.path().join("ground/ground.gpes").exists());
    assert!(dir.path().join("ground/ground_eff.gpes").exists());

    let out = gpe()
        .arg("sweep")
        .arg(&cfg)
        .args([
            "--param",
            "drive.alpha0",
            "--values",
            "10,15",
            "--workers",
            "2",
        ])
        .arg("--out")
        .arg(dir.path().join("sweep"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = fs::read_to_string(dir.path().join("sweep/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);

    let out = gpe()
        .arg("evolve")
        .arg(dir.path().join("missing.cfg"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
