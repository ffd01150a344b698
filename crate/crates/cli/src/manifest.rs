use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

/// Why a subcommand did not pass.
#[derive(Debug)]
pub enum Failure {
    /// Bad options, unreadable or invalid configuration, I/O trouble: exit 2.
    Usage(String),
    /// A check failed or the numerics broke down: exit 1.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }
}

pub fn io_failure(path: &Path, err: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {err}", path.display()))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub tool_version: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub status: String,
    pub exit_code: u8,
    pub error: Option<String>,
    #[serde(skip)]
    dir: PathBuf,
}

impl RunManifest {
    pub fn new(subcommand: &str, dir: &Path) -> Self {
        Self {
            subcommand: subcommand.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: Value::Null,
            seed: None,
            wall_time_s: 0.0,
            outputs: Vec::new(),
            status: "running".into(),
            exit_code: 0,
            error: None,
            dir: dir.to_path_buf(),
        }
    }

    pub fn prepare(&self) -> Result<(), Failure> {
        fs::create_dir_all(&self.dir).map_err(|e| io_failure(&self.dir, e))
    }

    /// Writes `name` inside the output directory and records it.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        let mut file = fs::File::create(&path).map_err(|e| io_failure(&path, e))?;
        file.write_all(contents.as_bytes())
            .map_err(|e| io_failure(&path, e))?;
        self.outputs.push(name.into());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::Usage(format!("serializing {name}: {e}")))?;
        self.write(name, &(text + "\n"))
    }

    /// Records the outcome and writes `manifest.json`; returns the exit code.
    pub fn finish(mut self, outcome: Result<bool, Failure>, wall_time_s: f64) -> u8 {
        self.wall_time_s = wall_time_s;
        let (status, code, error) = match outcome {
            Ok(true) => ("pass", 0, None),
            Ok(false) => ("fail", 1, None),
            Err(f) => ("error", f.exit_code(), Some(f.message().to_string())),
        };
        self.status = status.into();
        self.exit_code = code;
        self.error = error;
        if let Some(msg) = &self.error {
            eprintln!("bep {}: {msg}", self.subcommand);
        }
        self.outputs.push("manifest.json".into());
        let path = self.dir.join("manifest.json");
        let written = fs::create_dir_all(&self.dir).and_then(|_| {
            let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
            fs::write(&path, text + "\n")
        });
        match written {
            Ok(()) => code,
            Err(e) => {
                eprintln!("bep: cannot write {}: {e}", path.display());
                2
            }
        }
    }
}

/// Full round-trip precision for CSV cells.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}
