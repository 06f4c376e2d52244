//! CSV and JSON artifacts: atomic writes, provenance header, readers.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flow::{Checkpoint, PathExtremes, PathResult, StopReason};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Version, seed and a SHA-256 of the canonical JSON of the run config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Header {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Header {
    pub fn new(seed: u64, config: &impl Serialize) -> Result<Self> {
        let bytes = serde_json::to_vec(config)?;
        let hash = hex::encode(Sha256::digest(&bytes));
        Ok(Self { version: VERSION.to_string(), seed, config_hash: hash })
    }

    pub fn comment_line(&self) -> String {
        format!("# tiltflow {} seed={} config_sha256={}\n", self.version, self.seed, self.config_hash)
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory
/// and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// `<out>.checkpoints.csv`.
pub fn checkpoint_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".checkpoints.csv");
    PathBuf::from(s)
}

pub const PATH_COLUMNS: [&str; 9] =
    ["path_id", "T_hat", "W_T", "n_steps", "stop_reason", "tau_diag", "max_Ab", "max_A", "max_S_ratio"];

pub const CHECKPOINT_COLUMNS: [&str; 13] =
    ["path_id", "t", "w", "b", "c", "A", "S", "F_q10", "F_q50", "F_q90", "E_q10", "E_q50", "E_q90"];

fn csv_bytes(header: &Header, columns: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut buf = header.comment_line().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(columns)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

/// The per-path CSV.
pub fn paths_csv(header: &Header, paths: &[PathResult]) -> Result<Vec<u8>> {
    let rows = paths.iter().map(|p| {
        vec![
            p.path_id.to_string(),
            p.t_hat.to_string(),
            p.w_t.to_string(),
            p.n_steps.to_string(),
            p.stop_reason.as_str().to_string(),
            p.tau_diag.to_string(),
            p.extremes.max_ab.to_string(),
            p.extremes.max_a.to_string(),
            p.extremes.max_s_ratio.to_string(),
        ]
    });
    csv_bytes(header, &PATH_COLUMNS, rows)
}

/// The checkpoint CSV, rows grouped by path in checkpoint order.
pub fn checkpoints_csv(header: &Header, paths: &[PathResult]) -> Result<Vec<u8>> {
    let rows = paths.iter().flat_map(|p| {
        p.checkpoints.iter().map(move |c| {
            let mut r = vec![p.path_id.to_string()];
            r.extend([c.t, c.w, c.b, c.c, c.var, c.s].iter().map(f64::to_string));
            r.extend(c.f.iter().chain(c.e.iter()).map(f64::to_string));
            r
        })
    });
    csv_bytes(header, &CHECKPOINT_COLUMNS, rows)
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::MalformedSpec(format!("bad or missing column {name}")))
}

/// Read a per-path CSV written by [`paths_csv`]; checkpoints are left empty.
pub fn read_paths_csv(path: &Path) -> Result<Vec<PathResult>> {
    let mut out = Vec::new();
    for rec in reader(path)?.records() {
        let rec = rec?;
        let reason: String = field(&rec, 4, "stop_reason")?;
        out.push(PathResult {
            path_id: field(&rec, 0, "path_id")?,
            t_hat: field(&rec, 1, "T_hat")?,
            w_t: field(&rec, 2, "W_T")?,
            n_steps: field(&rec, 3, "n_steps")?,
            stop_reason: reason.parse::<StopReason>()?,
            tau_diag: field(&rec, 5, "tau_diag")?,
            checkpoints: Vec::new(),
            extremes: PathExtremes {
                max_ab: field(&rec, 6, "max_Ab")?,
                max_a: field(&rec, 7, "max_A")?,
                max_s_ratio: field(&rec, 8, "max_S_ratio")?,
                max_gap: f64::NAN,
            },
        });
    }
    Ok(out)
}

/// Attach the rows of a checkpoint CSV to the paths they belong to. The
/// tilted mean `a` is not stored and comes back as NaN.
pub fn attach_checkpoints(paths: &mut [PathResult], path: &Path) -> Result<()> {
    let index: std::collections::HashMap<u64, usize> = paths.iter().enumerate().map(|(i, p)| (p.path_id, i)).collect();
    for rec in reader(path)?.records() {
        let rec = rec?;
        let id: u64 = field(&rec, 0, "path_id")?;
        let v = |i: usize| field::<f64>(&rec, i, CHECKPOINT_COLUMNS[i]);
        let cp = Checkpoint {
            t: v(1)?,
            w: v(2)?,
            b: v(3)?,
            c: v(4)?,
            a: f64::NAN,
            var: v(5)?,
            s: v(6)?,
            f: [v(7)?, v(8)?, v(9)?],
            e: [v(10)?, v(11)?, v(12)?],
        };
        let i = *index
            .get(&id)
            .ok_or_else(|| Error::MissingCheckpoints(format!("checkpoint row for unknown path {id}")))?;
        paths[i].checkpoints.push(cp);
    }
    Ok(())
}
