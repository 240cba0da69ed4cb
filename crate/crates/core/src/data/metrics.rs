//! Per-step metrics as CSV with a fixed column order.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::trainer::StepMetrics;

pub const METRICS_COLUMNS: [&str; 9] = [
    "step",
    "log_d_real",
    "log_1m_d_fake",
    "log_d_fake",
    "ratio",
    "d_loss",
    "g_loss",
    "rbm_recon_error",
    "sample_diversity",
];

fn header() -> String {
    METRICS_COLUMNS.join(",")
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn format_row(m: &StepMetrics) -> String {
    let vals = [
        m.log_d_real,
        m.log_1m_d_fake,
        m.log_d_fake,
        m.ratio,
        m.d_loss,
        m.g_loss,
        m.rbm_recon_error,
        m.sample_diversity,
    ];
    let mut s = m.step.to_string();
    for v in vals {
        s.push(',');
        s.push_str(&format_float(v));
    }
    s
}

/// Exclusive appender for one metrics file.
///
/// A sibling `<file>.lock` marks the file as open; a second writer on the same
/// path is rejected until the first is dropped.
#[derive(Debug)]
pub struct MetricsWriter {
    file: File,
    path: PathBuf,
    lock: PathBuf,
}

impl MetricsWriter {
    /// Opens `path` for appending, writing the header if the file is new or empty.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut lock = path.clone().into_os_string();
        lock.push(".lock");
        let lock = PathBuf::from(lock);
        OpenOptions::new().write(true).create_new(true).open(&lock).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                Error::Config(format!("{} is already open by another metrics writer", path.display()))
            } else {
                Error::io(&lock, e)
            }
        })?;
        let result = Self::open_locked(&path, &lock);
        if result.is_err() {
            let _ = std::fs::remove_file(&lock);
        }
        result
    }

    fn open_locked(path: &Path, lock: &Path) -> Result<Self> {
        let existing = std::fs::metadata(path).map(|m| m.len()).unwrap_or(0);
        if existing > 0 {
            let first = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?)
                .lines()
                .next()
                .transpose()
                .map_err(|e| Error::io(path, e))?
                .unwrap_or_default();
            if first != header() {
                return Err(Error::Format {
                    what: "metrics CSV",
                    offset: 0,
                    detail: format!("existing header '{first}' does not match"),
                });
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        if existing == 0 {
            writeln!(file, "{}", header()).map_err(|e| Error::io(path, e))?;
        }
        Ok(MetricsWriter {
            file,
            path: path.to_path_buf(),
            lock: lock.to_path_buf(),
        })
    }

    pub fn append(&mut self, row: &StepMetrics) -> Result<()> {
        writeln!(self.file, "{}", format_row(row)).map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.file.flush().map_err(|e| Error::io(&self.path, e))
    }
}

impl Drop for MetricsWriter {
    fn drop(&mut self) {
        let _ = self.file.flush();
        let _ = std::fs::remove_file(&self.lock);
    }
}

/// Appends one row to `path`, creating it with a header if needed.
pub fn append_metrics(row: &StepMetrics, path: impl AsRef<Path>) -> Result<()> {
    let mut w = MetricsWriter::open(path)?;
    w.append(row)
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<StepMetrics>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let mut offset = 0u64;
    match lines.next() {
        Some(h) if h == header() => offset += h.len() as u64 + 1,
        other => {
            return Err(Error::Format {
                what: "metrics CSV",
                offset: 0,
                detail: format!("unexpected header {other:?}"),
            })
        }
    }
    let mut rows = Vec::new();
    for line in lines {
        let bad = |detail: String| Error::Format { what: "metrics CSV", offset, detail };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != METRICS_COLUMNS.len() {
            return Err(bad(format!("{} fields", fields.len())));
        }
        let step = fields[0].parse::<u64>().map_err(|e| bad(e.to_string()))?;
        let f = |i: usize| fields[i].parse::<f64>().map_err(|e| bad(format!("{}: {e}", METRICS_COLUMNS[i])));
        rows.push(StepMetrics {
            step,
            log_d_real: f(1)?,
            log_1m_d_fake: f(2)?,
            log_d_fake: f(3)?,
            ratio: f(4)?,
            d_loss: f(5)?,
            g_loss: f(6)?,
            rbm_recon_error: f(7)?,
            sample_diversity: f(8)?,
        });
        offset += line.len() as u64 + 1;
    }
    Ok(rows)
}
