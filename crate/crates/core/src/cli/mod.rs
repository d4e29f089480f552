//! Reproducible experiment orchestration: configuration parsing, seeded runs,
//! experiment recipes and CSV/JSON output.

mod config;
mod experiments;

pub use config::{parse_config, parse_entries, resolve_coupling, Experiment, ExperimentSpec, Value};
pub use experiments::run_experiment;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map};
use thiserror::Error;

use crate::bounds::BoundsError;
use crate::fkising::FkError;
use crate::rcsampler::SamplerError;
use crate::spinchain::SpinChainError;

/// Version recorded in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible request: {0}")]
    Feasibility(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for configuration errors, 3 for infeasible sizes, 4 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Feasibility(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

macro_rules! infeasible_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Feasibility(e.to_string())
            }
        }
    )*};
}
infeasible_from!(SpinChainError, SamplerError, FkError, BoundsError);

/// A CSV table with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values of one column, by name.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }
}

/// What an experiment produces before the header is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub table: Option<Table>,
    /// JSON summary, for example fitted decay constants.
    pub summary: Option<serde_json::Value>,
}

/// Provenance attached to every output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub version: String,
    pub spec: ExperimentSpec,
    /// Seconds since the Unix epoch, from `SOURCE_DATE_EPOCH` (0 when unset).
    pub wall_clock: u64,
    pub spec_sha1: String,
}

impl Header {
    pub fn new(spec: &ExperimentSpec, wall_clock: u64) -> Self {
        Self {
            version: VERSION.to_string(),
            spec: spec.clone(),
            wall_clock,
            spec_sha1: spec.content_hash(),
        }
    }

    fn comment_lines(&self) -> String {
        let mut s = format!("# isingrc {}\n# experiment = {}\n", self.version, self.spec.experiment);
        for (k, v) in self.spec.entries() {
            let _ = writeln!(s, "# spec: {k} = {v}");
        }
        let _ = writeln!(s, "# seed = {}", self.spec.seed());
        let _ = writeln!(s, "# wall_clock = {}", self.wall_clock);
        let _ = writeln!(s, "# spec_sha1 = {}", self.spec_sha1);
        s
    }

    fn json(&self) -> serde_json::Value {
        let spec: Map<String, serde_json::Value> =
            self.spec.entries().map(|(k, v)| (k.to_string(), json!(v.to_string()))).collect();
        json!({
            "version": self.version,
            "experiment": self.spec.experiment.name(),
            "spec": spec,
            "seed": self.spec.seed(),
            "wall_clock": self.wall_clock,
            "spec_sha1": self.spec_sha1,
        })
    }
}

/// Rendered output files.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub csv: Option<String>,
    pub json: Option<String>,
}

pub fn render(header: &Header, artifact: &Artifact) -> Rendered {
    let csv = artifact.table.as_ref().map(|t| {
        let mut s = header.comment_lines();
        s.push_str(&t.columns.join(","));
        s.push('\n');
        for r in &t.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    });
    let json = artifact.summary.as_ref().map(|summary| {
        let mut doc = header.json();
        doc["summary"] = summary.clone();
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        s.push('\n');
        s
    });
    Rendered { csv, json }
}

/// `SOURCE_DATE_EPOCH` if set and valid, otherwise 0.
pub fn wall_clock_from_env() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(0)
}

/// Run an experiment and render its outputs.
pub fn run(spec: &ExperimentSpec, wall_clock: u64) -> Result<Rendered, CliError> {
    let artifact = run_experiment(spec)?;
    Ok(render(&Header::new(spec, wall_clock), &artifact))
}

/// Where outputs go: the CSV at `base` and the JSON summary beside it, or the
/// JSON at `base` when there is no table.
pub fn write_outputs(rendered: &Rendered, base: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    let mut written = Vec::new();
    let json_path = if rendered.csv.is_some() { base.with_extension("json") } else { base.to_path_buf() };
    if let Some(csv) = &rendered.csv {
        std::fs::write(base, csv).map_err(|e| io(base, e))?;
        written.push(base.to_path_buf());
    }
    if let Some(json) = &rendered.json {
        std::fs::write(&json_path, json).map_err(|e| io(&json_path, e))?;
        written.push(json_path);
    }
    Ok(written)
}

/// Shortest round-trip text of a float, used for every number written to CSV.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Feasibility(String::new()).exit_code(), 3);
        assert_eq!(CliError::Io(String::new()).exit_code(), 4);
    }

    #[test]
    fn header_records_spec_seed_and_hash() {
        let spec = ExperimentSpec::from_text(Experiment::EdEntropy, "theta = 0.3\nm = 1\nL = 1").unwrap();
        let r = run(&spec, 1234).unwrap();
        let csv = r.csv.unwrap();
        assert!(csv.starts_with(&format!("# isingrc {VERSION}\n# experiment = ed-entropy\n")));
        assert!(csv.contains("# seed = 0\n"));
        assert!(csv.contains("# wall_clock = 1234\n"));
        assert!(csv.contains(&format!("# spec_sha1 = {}\n", spec.content_hash())));
        assert!(csv.contains("\nm,L,theta,entropy_bits\n"));
    }

    #[test]
    fn outputs_are_written_beside_each_other() {
        let dir = tempfile::tempdir().unwrap();
        let spec = ExperimentSpec::from_text(Experiment::EdNormdiff, "theta = 1\nm = 0..2\nL = 0\nn_ref = 3").unwrap();
        let r = run(&spec, 0).unwrap();
        let files = write_outputs(&r, &dir.path().join("out.csv")).unwrap();
        assert_eq!(files.len(), 2);
        assert!(dir.path().join("out.json").exists());
        let missing = dir.path().join("no/such/dir/out.csv");
        assert!(matches!(write_outputs(&r, &missing), Err(CliError::Io(_))));
    }
}
