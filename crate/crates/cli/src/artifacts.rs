//! Output directory layout and provenance stamping.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TOOL: &str = "fuelmodel";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(config_hash: &str) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            config_sha256: config_hash.into(),
        }
    }

    /// Leading comment line for CSV artifacts (without the `# `).
    pub fn comment(&self) -> String {
        format!("{} {} config_sha256={}", self.tool, self.version, self.config_sha256)
    }
}

/// Where each stage puts its files.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn reference_trace(&self, cycle: &str) -> PathBuf {
        self.root.join("traces").join("reference").join(format!("{cycle}.csv"))
    }

    pub fn vcd_trace(&self, cycle: &str) -> PathBuf {
        self.root.join("traces").join("vcd").join(format!("{cycle}.csv"))
    }

    pub fn extraction(&self) -> PathBuf {
        self.root.join("extraction.json")
    }

    pub fn semi_model(&self) -> PathBuf {
        self.root.join("semi_model.json")
    }

    pub fn simplified_model(&self) -> PathBuf {
        self.root.join("simplified_model.json")
    }

    pub fn profile(&self, log: &str) -> PathBuf {
        self.root.join("profiles").join(format!("{log}.csv"))
    }

    pub fn profile_meta(&self, log: &str) -> PathBuf {
        self.root.join("profiles").join(format!("{log}.json"))
    }

    pub fn measured_trace(&self, log: &str) -> PathBuf {
        self.root.join("profiles").join(format!("{log}_measured.csv"))
    }

    pub fn prediction(&self, cycle: &str, model: &str) -> PathBuf {
        self.root.join("predictions").join(format!("{cycle}_{model}.csv"))
    }

    pub fn report(&self, model: &str, reference: &str, ext: &str) -> PathBuf {
        self.root.join("reports").join(format!("{model}_vs_{reference}.{ext}"))
    }

    pub fn figure(&self, file_name: &str) -> PathBuf {
        self.root.join("figures").join(file_name)
    }
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(())
}

/// Create `path` (and its directory) for buffered writing.
pub fn create(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    ensure_parent(path)?;
    let f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(BufWriter::new(f))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Pretty JSON with a top-level `provenance` member.
pub fn write_json<T: Serialize>(path: &Path, value: &T, prov: &Provenance) -> anyhow::Result<()> {
    let mut v = serde_json::to_value(value)?;
    match &mut v {
        serde_json::Value::Object(map) => {
            map.insert("provenance".into(), serde_json::to_value(prov)?);
        }
        _ => anyhow::bail!("artifact {} is not a JSON object", path.display()),
    }
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    write_text(path, &text)?;
    Ok(())
}

/// Read a file another stage wrote; absence names that stage.
pub fn read_prerequisite(path: &Path, stage: &'static str) -> Result<String, CliError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(CliError::MissingPrerequisite {
            artifact: path.to_path_buf(),
            stage,
        }),
        Err(e) => Err(CliError::io(path, e)),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path, stage: &'static str) -> Result<T, CliError> {
    let text = read_prerequisite(path, stage)?;
    serde_json::from_str(&text).map_err(|e| CliError::input(path, e))
}
