//! CSV curves and `key: value` summaries.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use spinbath_core::ensemble::EnsembleStats;
use spinbath_core::{TimeGrid, C64};

use crate::error::{CliError, CliResult};

pub const CURVE_HEADER: &str = "t,re,im,abs2";
pub const ENSEMBLE_HEADER: &str = "t,mean,variance,std_error";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_owned(), |v| format!("{v:e}"))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<PathBuf> {
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    fs::write(path, text).map_err(io_err(path))?;
    Ok(path.to_owned())
}

fn write_rows<I>(path: &Path, header: &str, rows: I) -> CliResult<PathBuf>
where
    I: Iterator<Item = String>,
{
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{header}").map_err(io_err(path))?;
    for row in rows {
        writeln!(w, "{row}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(path.to_owned())
}

/// One row per grid point: `t, Re v, Im v, |v|²`.
pub fn write_curve(
    path: &Path,
    grid: &TimeGrid,
    values: &[C64],
    abs2: &[f64],
) -> CliResult<PathBuf> {
    let rows = grid
        .times()
        .zip(values)
        .zip(abs2)
        .map(|((t, v), a)| format!("{},{},{},{}", num(t), num(v.re), num(v.im), num(*a)));
    write_rows(path, CURVE_HEADER, rows)
}

pub fn write_ensemble(path: &Path, stats: &EnsembleStats) -> CliResult<PathBuf> {
    let rows = stats.grid.times().enumerate().map(|(k, t)| {
        format!(
            "{},{},{},{}",
            num(t),
            num(stats.mean[k]),
            num(stats.variance[k]),
            num(stats.standard_error(k))
        )
    });
    write_rows(path, ENSEMBLE_HEADER, rows)
}

/// Ordered `key: value` document.
#[derive(Debug, Default)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.lines.push((key.to_owned(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(s, "{k}: {v}");
        }
        s
    }
}

/// Parses a document produced by [`Summary::render`].
pub fn parse_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}
