//! Output directory, index and manifest handling shared by every subcommand.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use kerr_echo::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};

/// Why a run stopped; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or refused request (exit 3).
    Validation(String),
    /// The engine or the file system failed (exit 4).
    Engine(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 3,
            Failure::Engine(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Engine(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter { .. } | Error::OverlappingWindows(_) => {
                Failure::Validation(e.to_string())
            }
            other => Failure::Engine(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Engine(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexEntry {
    pub panel: String,
    pub file: String,
    pub description: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub phase: String,
    pub seconds: f64,
}

/// Files written by one run, relative to the output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    pub outputs: Vec<String>,
    pub index: Vec<IndexEntry>,
    pub timings: Vec<Timing>,
}

impl OutputDir {
    /// Create `root`, refusing a non-empty directory unless `force`.
    pub fn prepare(root: &Path, force: bool) -> Result<Self, Failure> {
        if root.exists() {
            if !root.is_dir() {
                return Err(Failure::Engine(format!("{} is not a directory", root.display())));
            }
            let non_empty = fs::read_dir(root)
                .map_err(|e| Failure::Engine(format!("cannot read {}: {e}", root.display())))?
                .next()
                .is_some();
            if non_empty && !force {
                return Err(Failure::Validation(format!(
                    "output directory {} is not empty; pass --force to overwrite",
                    root.display()
                )));
            }
        } else {
            fs::create_dir_all(root)
                .map_err(|e| Failure::Engine(format!("cannot create {}: {e}", root.display())))?;
        }
        let probe = root.join(".kerr-echo-write-test");
        fs::write(&probe, b"").map_err(|e| Failure::Engine(format!("cannot write to {}: {e}", root.display())))?;
        let _ = fs::remove_file(probe);
        Ok(Self {
            root: root.to_path_buf(),
            outputs: Vec::new(),
            index: Vec::new(),
            timings: Vec::new(),
        })
    }

    /// Write `name` with `body` and record it as an output.
    pub fn write<F>(&mut self, name: &str, body: F) -> Result<(), Failure>
    where
        F: FnOnce(&mut dyn Write) -> kerr_echo::Result<()>,
    {
        let path = self.root.join(name);
        let file = fs::File::create(&path)
            .map_err(|e| Failure::Engine(format!("cannot create {}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush()?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    /// Like [`write`](Self::write), and list the file in the index under `panel`.
    pub fn panel<F>(&mut self, panel: &str, name: &str, description: &str, body: F) -> Result<(), Failure>
    where
        F: FnOnce(&mut dyn Write) -> kerr_echo::Result<()>,
    {
        self.write(name, body)?;
        self.index.push(IndexEntry {
            panel: panel.to_string(),
            file: name.to_string(),
            description: description.to_string(),
        });
        Ok(())
    }

    /// Run `f` and record its wall-clock time under `phase`.
    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(Timing {
            phase: phase.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct Index<'a> {
    pub schema: u32,
    pub subcommand: &'a str,
    pub entries: &'a [IndexEntry],
}

/// Everything needed to reproduce a run. Written on success and on failure.
#[derive(Debug, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub engine_versions: std::collections::BTreeMap<String, String>,
    pub subcommand: String,
    pub status: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub scenario_sha256: Option<String>,
    pub seed: Option<u64>,
    pub resolved_scenario: Option<String>,
    pub threads: usize,
    pub outputs: Vec<String>,
    pub timings: Vec<ManifestTiming>,
}

#[derive(Debug, Serialize, serde::Deserialize)]
pub struct ManifestTiming {
    pub phase: String,
    pub seconds: f64,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const INDEX_FILE: &str = "index.json";
