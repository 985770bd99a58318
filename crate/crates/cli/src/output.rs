use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

/// One CSV column: name and type tag for the schema line.
#[derive(Debug, Clone, Copy)]
pub struct Column {
    pub name: &'static str,
    pub kind: &'static str,
}

pub const fn f64_col(name: &'static str) -> Column {
    Column { name, kind: "f64" }
}

pub const fn int_col(name: &'static str) -> Column {
    Column { name, kind: "u64" }
}

pub const fn str_col(name: &'static str) -> Column {
    Column { name, kind: "str" }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory CSV table with a `#`-prefixed schema line.
pub struct Table {
    columns: Vec<Column>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[Column]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn schema_line(&self) -> String {
        let cols: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}:{}", c.name, c.kind))
            .collect();
        format!("# schema: {}", cols.join(","))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.schema_line().into_bytes();
        out.push(b'\n');
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name))
            .expect("write to memory");
        for r in &self.rows {
            w.write_record(r).expect("write to memory");
        }
        w.into_inner().expect("flush to memory")
    }
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.join(name).display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| io(e.error))?;
    Ok(path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Provenance of one run: what was asked for and what came out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// RFC 3339; taken from SOURCE_DATE_EPOCH when set.
    pub timestamp: String,
    pub config: RunConfig,
    pub files: Vec<FileRecord>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn timestamp() -> String {
    let fixed = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0));
    fixed
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Collects output files for one command and writes them with a manifest.
pub struct OutputSet {
    dir: PathBuf,
    files: Vec<FileRecord>,
}

impl OutputSet {
    pub fn new(dir: &Path) -> Self {
        OutputSet {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        write_atomic(&self.dir, name, bytes)?;
        self.files.push(FileRecord {
            name: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn table(&mut self, name: &str, t: &Table) -> Result<(), CliError> {
        self.write(name, &t.to_bytes())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).expect("record serializes");
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn finish(self, command: &str, config: &RunConfig) -> Result<RunManifest, CliError> {
        let m = RunManifest {
            tool: "simulate".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            timestamp: timestamp(),
            config: config.clone(),
            files: self.files,
        };
        let mut s = serde_json::to_string_pretty(&m).expect("manifest serializes");
        s.push('\n');
        write_atomic(&self.dir, MANIFEST_NAME, s.as_bytes())?;
        Ok(m)
    }
}
