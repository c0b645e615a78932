//! Parameter sweeps over one configuration key.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::error::{Error, Result};

use super::config::RunConfig;
use super::io::fmt12;
use super::run::{self, RunReport};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepMetrics {
    pub mu: f64,
    pub final_norm: f64,
    pub rate_per_cycle: Option<f64>,
    pub separation: Option<f64>,
    pub p_upper: Option<f64>,
}

impl SweepMetrics {
    fn from_report(r: &RunReport) -> Self {
        let last = r.trajectory.last();
        Self {
            mu: r.ground.mu,
            final_norm: last.norm_total,
            rate_per_cycle: r.escape.as_ref().map(|e| e.rate_per_cycle),
            separation: last.dichotomy.as_ref().map(|d| d.separation),
            p_upper: last.p_upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    /// Failure message for runs that did not complete.
    pub outcome: std::result::Result<SweepMetrics, String>,
}

/// `rate(a) / rate(b)` for a pair of sweep values.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRatio {
    pub a: String,
    pub b: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub param: String,
    pub rows: Vec<SweepRow>,
    pub ratios: Vec<RateRatio>,
}

fn run_one(base: &RunConfig, param: &str, value: &str, dir: Option<&Path>) -> Result<SweepMetrics> {
    let mut cfg = base.clone();
    cfg.set(param, value)?;
    cfg.validate()?;
    let report = match dir {
        Some(d) => run::run_config(&cfg, d)?,
        None => run::simulate(&cfg)?,
    };
    if let Some(step) = report.trajectory.failed_at {
        return Err(Error::NumericalBlowup { step });
    }
    Ok(SweepMetrics::from_report(&report))
}

fn run_dir_name(idx: usize, param: &str, value: &str) -> String {
    let clean: String = value
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("run{idx:03}_{param}={clean}")
}

/// Runs `base` once per value of `param`, on up to `workers` threads.
///
/// Every run is independent; failures become failed rows and the sweep goes
/// on. With `out` set, each run writes into its own subdirectory and the
/// summary goes to `summary.csv` and `ratios.csv`.
pub fn sweep(
    base: &RunConfig,
    param: &str,
    values: &[String],
    workers: usize,
    out: Option<&Path>,
) -> Result<SweepReport> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(
            "a sweep needs at least two values".into(),
        ));
    }
    base.get(param).ok_or_else(|| Error::Config {
        line: 0,
        message: format!("unknown sweep parameter `{param}`"),
    })?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; values.len()]);
    let workers = workers.clamp(1, values.len());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(value) = values.get(idx) else { break };
                let dir = out.map(|d| d.join(run_dir_name(idx, param, value)));
                let outcome =
                    run_one(base, param, value, dir.as_deref()).map_err(|e| e.to_string());
                results.lock().unwrap()[idx] = Some(SweepRow {
                    value: value.clone(),
                    outcome,
                });
            });
        }
    });
    let rows: Vec<SweepRow> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every sweep value is run"))
        .collect();
    let ratios = rate_ratios(&rows);
    let report = SweepReport {
        param: param.to_string(),
        rows,
        ratios,
    };
    if let Some(dir) = out {
        fs::write(dir.join("summary.csv"), summary_csv(&report))?;
        fs::write(dir.join("ratios.csv"), ratios_csv(&report))?;
    }
    Ok(report)
}

/// All ordered pairs `i < j` whose rates are both available and nonzero.
pub fn rate_ratios(rows: &[SweepRow]) -> Vec<RateRatio> {
    let mut out = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            if let (Ok(ma), Ok(mb)) = (&a.outcome, &b.outcome) {
                if let (Some(ra), Some(rb)) = (ma.rate_per_cycle, mb.rate_per_cycle) {
                    if rb > 0.0 {
                        out.push(RateRatio {
                            a: a.value.clone(),
                            b: b.value.clone(),
                            ratio: ra / rb,
                        });
                    }
                }
            }
        }
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

pub fn summary_csv(report: &SweepReport) -> String {
    let mut s = format!(
        "{},status,mu,final_norm,escape_rate_per_cycle,separation,p_upper,error\n",
        report.param
    );
    for row in &report.rows {
        match &row.outcome {
            Ok(m) => {
                let _ = writeln!(
                    s,
                    "{},ok,{},{},{},{},{},",
                    row.value,
                    fmt12(m.mu),
                    fmt12(m.final_norm),
                    opt(m.rate_per_cycle),
                    opt(m.separation),
                    opt(m.p_upper)
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{},failed,,,,,,\"{}\"", row.value, e.replace('"', "'"));
            }
        }
    }
    s
}

pub fn ratios_csv(report: &SweepReport) -> String {
    let mut s = String::from("value_a,value_b,rate_ratio\n");
    for r in &report.ratios {
        let _ = writeln!(s, "{},{},{}", r.a, r.b, fmt12(r.ratio));
    }
    s
}

/// Splits `"15,20"` or `"[15, 20]"` into trimmed values.
pub fn parse_values(list: &str) -> Vec<String> {
    list.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}
