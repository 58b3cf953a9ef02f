//! `fuelmodel.toml`: which files to read, how to fit, where to write.
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use fuelmodel::dyno::IngestSettings;
use fuelmodel::extraction::{CorrectionBins, MapDegrees};
use fuelmodel::poly::DEFAULT_MAX_TOTAL_DEGREE;
use fuelmodel::semi::DEFAULT_GEAR_HOLD_ACCEL;
use fuelmodel::simplified::FitOptions;
use fuelmodel::units::SpeedUnit;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Highest polynomial degree accepted for any one-dimensional coefficient
/// of the simplified model.
pub const SIMPLIFIED_DEGREE_CAP: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSets {
    /// Cycles driven to extract maps and constants.
    pub extraction: Vec<PathBuf>,
    /// Cycles the models are validated on.
    pub evaluation: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemiSettings {
    #[serde(default = "default_hold")]
    pub gear_hold_accel: f64,
}

fn default_hold() -> f64 {
    DEFAULT_GEAR_HOLD_ACCEL
}

impl Default for SemiSettings {
    fn default() -> Self {
        Self {
            gear_hold_accel: DEFAULT_GEAR_HOLD_ACCEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub vehicle: PathBuf,
    pub cycles: CycleSets,
    #[serde(default)]
    pub dyno_logs: Vec<PathBuf>,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Speed unit of the cycle files.
    #[serde(default = "default_unit")]
    pub unit: SpeedUnit,
    /// Simulation step, s.
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Seed for synthetic noise.
    #[serde(default)]
    pub seed: u64,
    /// Also render SVG charts next to the comparison CSVs.
    #[serde(default)]
    pub svg: bool,
    #[serde(default)]
    pub map_degrees: MapDegrees,
    #[serde(default)]
    pub correction_bins: CorrectionBins,
    #[serde(default)]
    pub semi: SemiSettings,
    #[serde(default)]
    pub simplified: FitOptions,
    #[serde(default)]
    pub ingest: IngestSettings,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_unit() -> SpeedUnit {
    SpeedUnit::Kph
}

fn default_dt() -> f64 {
    fuelmodel::cycle::DEFAULT_DT
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub unit: Option<SpeedUnit>,
    pub dt: Option<f64>,
}

/// A loaded, checked configuration with absolute paths.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    /// sha256 of the config file plus any result-changing overrides.
    pub hash: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    fn resolve(&mut self, base: &Path) {
        let abs = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        abs(&mut self.vehicle);
        self.cycles.extraction.iter_mut().for_each(abs);
        self.cycles.evaluation.iter_mut().for_each(abs);
        self.dyno_logs.iter_mut().for_each(abs);
        abs(&mut self.output_dir);
    }

    /// Check that inputs exist and settings are in range.
    pub fn check(&self) -> Result<(), CliError> {
        let inputs = std::iter::once(&self.vehicle)
            .chain(&self.cycles.extraction)
            .chain(&self.cycles.evaluation)
            .chain(&self.dyno_logs);
        for p in inputs {
            if !p.is_file() {
                return Err(CliError::Config(format!("input file {} does not exist", p.display())));
            }
        }
        if self.cycles.extraction.is_empty() {
            return Err(CliError::Config("cycles.extraction is empty".into()));
        }
        if self.cycles.evaluation.is_empty() {
            return Err(CliError::Config("cycles.evaluation is empty".into()));
        }
        for set in [&self.cycles.extraction, &self.cycles.evaluation] {
            let mut names: Vec<String> = set.iter().map(|p| stem(p)).collect();
            names.sort();
            if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
                return Err(CliError::Config(format!("two cycle files are named {}", w[0])));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CliError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        let m = &self.map_degrees;
        if m.max_total > DEFAULT_MAX_TOTAL_DEGREE {
            return Err(CliError::Config(format!(
                "map_degrees.max_total {} exceeds the cap {DEFAULT_MAX_TOTAL_DEGREE}",
                m.max_total
            )));
        }
        for (name, (d1, d2)) in [("fuel", m.fuel), ("speed", m.speed), ("torque", m.torque)] {
            if d1 + d2 > m.max_total {
                return Err(CliError::Config(format!(
                    "map_degrees.{name} has total degree {} above max_total {}",
                    d1 + d2,
                    m.max_total
                )));
            }
        }
        let d = &self.simplified.degrees;
        for (name, deg) in [("c", d.c), ("p", d.p), ("q", d.q), ("z", d.z), ("a_c", d.a_c)] {
            if deg > SIMPLIFIED_DEGREE_CAP {
                return Err(CliError::Config(format!(
                    "simplified.degrees.{name} = {deg} exceeds the cap {SIMPLIFIED_DEGREE_CAP}"
                )));
            }
        }
        Ok(())
    }

    /// Every distinct cycle file, extraction cycles first.
    pub fn all_cycles(&self) -> Vec<PathBuf> {
        let mut out: Vec<PathBuf> = Vec::new();
        for p in self.cycles.extraction.iter().chain(&self.cycles.evaluation) {
            if !out.iter().any(|q| stem(q) == stem(p)) {
                out.push(p.clone());
            }
        }
        out
    }
}

/// Artifact name of an input file.
pub fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn load(path: &Path, ov: &Overrides) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
    let mut config = RunConfig::parse(&text)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
    config.resolve(&base);
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    if let Some(u) = ov.unit {
        config.unit = u;
        hasher.update(format!("\nunit={u}").as_bytes());
    }
    if let Some(dt) = ov.dt {
        config.dt = dt;
        hasher.update(format!("\ndt={dt}").as_bytes());
    }
    if let Some(out) = &ov.out {
        config.output_dir = out.clone();
    }
    config.check()?;
    Ok(Loaded {
        config,
        hash: hex::encode(hasher.finalize()),
    })
}
