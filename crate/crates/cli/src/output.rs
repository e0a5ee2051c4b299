//! Persisted run outputs: denoiser parameter files, CSV tables with JSON
//! sidecars, and the run artifact.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use denoiser_core::channels::{ChannelParams, NoiseModel};
use denoiser_core::circuits::{DenoiserSpec, TrotterSpec};
use denoiser_core::sampler::EstimatorResult;
use denoiser_core::QubitCount;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const SOFTWARE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `sha256:<hex>` of the canonical JSON encoding of `spec`.
pub fn fingerprint(spec: &TrotterSpec) -> String {
    let json = serde_json::to_string(spec).expect("TrotterSpec serializes");
    let digest = Sha256::digest(json.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenoiserFile {
    pub schema_version: u32,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "M")]
    pub depth: usize,
    pub p: f64,
    pub t: f64,
    pub m_trot: usize,
    /// Fingerprint of the Trotter circuit the denoiser was optimized for.
    pub fingerprint: String,
    pub channels: Vec<ChannelParams>,
}

impl DenoiserFile {
    pub fn new(spec: &DenoiserSpec, target: &TrotterSpec) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            l: spec.n.get(),
            depth: spec.depth,
            p: spec.noise.p(),
            t: target.t,
            m_trot: target.m_trot,
            fingerprint: fingerprint(target),
            channels: spec.layers.clone(),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("denoiser file {}: {e}", path.display())))?;
        let file: Self = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("denoiser file {}: {e}", path.display())))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "denoiser file {} has schema version {}, expected {SCHEMA_VERSION}",
                path.display(),
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self).expect("denoiser file serializes");
        std::fs::write(path, text + "\n").map_err(CliError::io(path))
    }

    pub fn spec(&self) -> CliResult<DenoiserSpec> {
        let n = QubitCount::new(self.l)?;
        let noise = NoiseModel::new(self.p)?;
        Ok(DenoiserSpec::new(n, self.depth, self.channels.clone(), noise)?)
    }
}

/// Metadata written next to every table as `<name>.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableSidecar {
    pub schema_version: u32,
    pub software_version: String,
    pub table: String,
    pub columns: Vec<String>,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
}

/// A finished table: header plus rows of already formatted cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes `<dir>/<name>.csv`, appending when a file with the same header
    /// already exists, and `<dir>/<name>.json`.
    pub fn write(&self, dir: &Path, command: &str, config: &RunConfig) -> CliResult<TableRecord> {
        let path = dir.join(format!("{}.csv", self.name));
        let existing = if path.exists() {
            let f = std::fs::File::open(&path).map_err(CliError::io(&path))?;
            let mut header = String::new();
            BufReader::new(f).read_line(&mut header).map_err(CliError::io(&path))?;
            Some(header.trim_end().to_string())
        } else {
            None
        };
        let header = self.columns.join(",");
        let append = match existing {
            Some(h) if h == header => true,
            Some(h) if h.is_empty() => false,
            Some(h) => {
                return Err(CliError::Output(format!(
                    "{} has columns `{h}`, refusing to append rows with `{header}`",
                    path.display()
                )))
            }
            None => false,
        };
        let file = OpenOptions::new()
            .create(true)
            .append(append)
            .write(true)
            .truncate(!append)
            .open(&path)
            .map_err(CliError::io(&path))?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if !append {
            w.write_record(&self.columns)?;
        }
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(CliError::io(&path))?;

        let sidecar = TableSidecar {
            schema_version: SCHEMA_VERSION,
            software_version: SOFTWARE_VERSION.into(),
            table: self.name.clone(),
            columns: self.columns.clone(),
            command: command.into(),
            seed: config.seed,
            config: config.clone(),
        };
        let side_path = dir.join(format!("{}.json", self.name));
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        std::fs::write(&side_path, text + "\n").map_err(CliError::io(&side_path))?;
        Ok(TableRecord { name: self.name.clone(), file: path, rows: self.rows.len() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub name: String,
    pub file: PathBuf,
    pub rows: usize,
}

/// One optimization stage: on the configured chain, or on the shorter
/// chain before a transfer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    #[serde(rename = "L")]
    pub l: usize,
    pub iterations: usize,
    pub converged: bool,
    pub baseline_epsilon: f64,
    pub final_epsilon: f64,
    pub epsilon_trace: Vec<f64>,
    pub grad_norm_trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationSummary {
    pub t: f64,
    #[serde(rename = "M")]
    pub depth: usize,
    pub stages: Vec<StageReport>,
    /// Cost without denoiser on the configured chain, when it can be composed.
    pub baseline_epsilon: Option<f64>,
    pub final_epsilon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub schema_version: u32,
    pub software_version: String,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub denoiser: Option<DenoiserFile>,
    pub denoiser_file: Option<PathBuf>,
    pub optimizations: Vec<OptimizationSummary>,
    pub tables: Vec<TableRecord>,
    pub gamma: Option<f64>,
    pub hoeffding_bound: Option<u64>,
    pub estimator: Option<EstimatorResult>,
    pub timing: Timing,
}

impl RunArtifact {
    pub fn save(&self, dir: &Path) -> CliResult<PathBuf> {
        let path = dir.join(format!("artifact_{}.json", self.command));
        let text = serde_json::to_string_pretty(self).expect("artifact serializes");
        std::fs::write(&path, text + "\n").map_err(CliError::io(&path))?;
        Ok(path)
    }
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig::from_json(r#"{"system":{"L":4},"trotter":{"t":1.0,"m_trot":8},"noise":{"p":0.01}}"#).unwrap()
    }

    #[test]
    fn fingerprint_tracks_every_field() {
        let cfg = config();
        let base = cfg.trotter_spec(1.0).unwrap();
        let f = fingerprint(&base);
        assert!(f.starts_with("sha256:") && f.len() == 7 + 64);
        assert_eq!(f, fingerprint(&base));
        assert_ne!(f, fingerprint(&cfg.trotter_spec(1.5).unwrap()));
        assert_ne!(f, fingerprint(&TrotterSpec { m_trot: 9, ..base }));
        assert_ne!(f, fingerprint(&base.noiseless()));
    }

    #[test]
    fn denoiser_file_round_trips_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config();
        let target = cfg.trotter_spec(1.0).unwrap();
        let mut spec = DenoiserSpec::identity(target.n, 1, target.noise);
        spec = spec.with_params(&(0..34).map(|k| 0.1 * (k as f64).sin() / 3.0).collect::<Vec<_>>()).unwrap();
        let file = DenoiserFile::new(&spec, &target);
        let path = dir.path().join("d.json");
        file.save(&path).unwrap();
        let back = DenoiserFile::load(&path).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.spec().unwrap().to_vec(), spec.to_vec());
        let raw: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(raw["channels"].as_array().unwrap().len(), 2);
        assert_eq!(raw["channels"][0].as_object().unwrap().len(), 7);
    }

    #[test]
    fn tables_append_with_matching_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config();
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        t.write(dir.path(), "test", &cfg).unwrap();
        t.write(dir.path(), "test", &cfg).unwrap();
        let text = std::fs::read_to_string(dir.path().join("demo.csv")).unwrap();
        assert_eq!(text, "a,b\n1,2\n1,2\n");
        let side: TableSidecar = serde_json::from_str(&std::fs::read_to_string(dir.path().join("demo.json")).unwrap()).unwrap();
        assert_eq!(side.schema_version, SCHEMA_VERSION);
        assert_eq!(side.columns, vec!["a", "b"]);

        let other = Table::new("demo", &["a", "c"]);
        assert!(other.write(dir.path(), "test", &cfg).is_err());
    }
}
