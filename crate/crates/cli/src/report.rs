//! Report envelope, verdict aggregation and output files.

use std::fs;
use std::path::{Path, PathBuf};

use kglab_core::fock::standard_constant;
use kglab_core::testfn::{FourierConvention, CONVENTION};
use serde::Serialize;

use crate::config::RunConfig;
use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Status {
    NotApplicable,
    Advisory,
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    /// FAIL dominates INCONCLUSIVE, which dominates PASS; NOT-APPLICABLE only
    /// survives when nothing else is present.
    pub fn combine<I: IntoIterator<Item = Status>>(items: I) -> Status {
        items.into_iter().max().unwrap_or(Status::Pass)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Advisory => "ADVISORY",
            Status::NotApplicable => "NOT-APPLICABLE",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::Fail => "FAIL",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Fail => 1,
            Status::Inconclusive => 2,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub fourier: FourierConvention,
    pub dimension: Option<usize>,
    /// Commutator constant of the standard free field, (2π)^{−(d−1)}.
    pub a0: Option<f64>,
}

impl Conventions {
    pub fn new(dimension: Option<usize>) -> Self {
        Self {
            fourier: CONVENTION,
            dimension,
            a0: dimension.map(standard_constant),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub status: Status,
    pub conventions: Conventions,
    pub config: &'a RunConfig,
    pub warnings: Vec<String>,
    pub results: T,
}

pub const TOOL: &str = "kglab";

#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir)
            .map_err(|e| RunError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| RunError::Io(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        let path = self.path(name);
        fs::write(&path, text).map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))
    }

    pub fn csv(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), RunError> {
        let path = self.path(name);
        let io = |e: csv::Error| RunError::Io(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))
    }
}

/// Shortest round-trip text for a float.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}
