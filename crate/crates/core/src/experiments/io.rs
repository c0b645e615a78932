//! Binary snapshots and CSV time series.
//!
//! Snapshot layout, all little-endian:
//!
//! | bytes        | content                                  |
//! |--------------|------------------------------------------|
//! | 4            | magic `GPES`                             |
//! | 4            | format version (`u32`)                   |
//! | 4            | `ndim` (`u32`)                           |
//! | 4·ndim       | points per axis (`u32`)                  |
//! | 8·ndim       | half-extent per axis (`f64`)             |
//! | 8            | time stamp (`f64`)                       |
//! | 16·len       | interleaved `(re, im)` pairs, row-major  |

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexField, GridSpec};
use crate::propagation::Trajectory;

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"GPES";
pub const SNAPSHOT_VERSION: u32 = 1;

pub const TIMESERIES_HEADER: &str =
    "t,cycle,norm_total,norm_trapped,norm_untrapped,z_mean,z2_mean,n_peaks,separation,dip_ratio,p_lower,p_upper";

pub fn encode_snapshot(field: &ComplexField, time: f64) -> Vec<u8> {
    let grid = field.grid();
    let ndim = grid.ndim();
    let mut buf = Vec::with_capacity(20 + 12 * ndim + 16 * field.values().len());
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(ndim as u32).to_le_bytes());
    for &n in grid.points() {
        buf.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &l in grid.half_extents() {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    buf.extend_from_slice(&time.to_le_bytes());
    for c in field.values() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    buf
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let s = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64(&mut self) -> Option<f64> {
        self.take(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }
}

/// Decodes a snapshot; `path` only labels errors.
pub fn decode_snapshot(bytes: &[u8], path: &Path) -> Result<(ComplexField, f64)> {
    let err = |message: String| Error::Snapshot {
        path: path.to_path_buf(),
        message,
    };
    let truncated = || err("truncated payload".into());
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4).ok_or_else(truncated)?;
    if magic != SNAPSHOT_MAGIC {
        return Err(err(format!(
            "bad magic {:?}, not a snapshot of a supported version",
            String::from_utf8_lossy(magic)
        )));
    }
    let version = r.u32().ok_or_else(truncated)?;
    if version != SNAPSHOT_VERSION {
        return Err(err(format!(
            "unsupported version {version} (expected {SNAPSHOT_VERSION})"
        )));
    }
    let ndim = r.u32().ok_or_else(truncated)? as usize;
    if !(1..=3).contains(&ndim) {
        return Err(err(format!("invalid ndim {ndim}")));
    }
    let points = (0..ndim)
        .map(|_| r.u32().map(|n| n as usize).ok_or_else(truncated))
        .collect::<Result<Vec<_>>>()?;
    let half_extents = (0..ndim)
        .map(|_| r.f64().ok_or_else(truncated))
        .collect::<Result<Vec<_>>>()?;
    let time = r.f64().ok_or_else(truncated)?;
    let grid = GridSpec::new(ndim, &half_extents, &points).map_err(|e| err(e.to_string()))?;
    let len = grid.len();
    let payload = r.take(16 * len).ok_or_else(truncated)?;
    if r.pos != bytes.len() {
        return Err(err(format!(
            "{} trailing bytes after payload",
            bytes.len() - r.pos
        )));
    }
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((ComplexField::from_values(Arc::new(grid), values)?, time))
}

pub fn write_snapshot(field: &ComplexField, path: &Path, time: f64) -> Result<()> {
    fs::write(path, encode_snapshot(field, time))?;
    Ok(())
}

/// Reads a snapshot back as `(field, time)`.
pub fn read_snapshot(path: &Path) -> Result<(ComplexField, f64)> {
    decode_snapshot(&fs::read(path)?, path)
}

/// Formats a value with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

pub fn timeseries_csv(trajectory: &Trajectory) -> String {
    let mut out = String::with_capacity(200 * (trajectory.records.len() + 1));
    out.push_str(TIMESERIES_HEADER);
    out.push('\n');
    for r in &trajectory.records {
        let (n_peaks, sep, dip) = match &r.dichotomy {
            Some(d) => (
                d.n_peaks.to_string(),
                fmt12(d.separation),
                fmt12(d.dip_ratio),
            ),
            None => Default::default(),
        };
        let cols = [
            fmt12(r.t),
            fmt12(r.cycle),
            fmt12(r.norm_total),
            opt(r.norm_trapped),
            opt(r.norm_untrapped),
            fmt12(r.z_mean),
            fmt12(r.z2_mean),
            n_peaks,
            sep,
            dip,
            opt(r.p_lower),
            opt(r.p_upper),
        ];
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

pub fn write_timeseries(trajectory: &Trajectory, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(timeseries_csv(trajectory).as_bytes())?;
    w.flush()?;
    Ok(())
}

/// Whitespace-separated columns with a `#` header line.
pub fn write_columns(path: &Path, names: &[&str], columns: &[&[f64]]) -> Result<()> {
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) || names.len() != columns.len() {
        return Err(Error::InvalidParameter("column lengths differ".into()));
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "# {}", names.join(" "))?;
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| fmt12(c[i])).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}
