//! Run configuration: one JSON document describing sites, window, stars,
//! reader model, rate budget and analysis parameters.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bellstats::{AnalysisOptions, RateBudget};
use crate::catalogue::SelectionCriteria;
use crate::error::{Error, Result};
use crate::geometry::{CelestialTarget, GeodeticSite, RunWindow, SiteLayout, TimingBudget};
use crate::simulate::SimulationConfig;
use crate::spectra::ModelFiles;
use crate::timetag::StreamParams;
use crate::Side;

/// A star assigned to one side, given by distance rather than parallax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarSpec {
    pub hip: String,
    pub ra_deg: f64,
    pub dec_deg: f64,
    pub distance_ly: f64,
    pub distance_error_ly: f64,
    pub hp_mag: f64,
}

impl StarSpec {
    pub fn target(&self) -> Result<CelestialTarget> {
        CelestialTarget::from_distance(
            self.hip.clone(),
            self.ra_deg,
            self.dec_deg,
            self.distance_ly,
            self.distance_error_ly,
            self.hp_mag,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarPair {
    pub a: StarSpec,
    pub b: StarSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraConfig {
    /// Directory holding the standard curve file names.
    pub model_dir: PathBuf,
    #[serde(default = "default_step_nm")]
    pub step_nm: f64,
    /// Blackbody temperature per catalogue id, K.
    pub temperatures_k: BTreeMap<String, f64>,
}

fn default_step_nm() -> f64 {
    1.0
}

fn default_validity_step() -> f64 {
    1.0
}

fn default_top_pairs() -> usize {
    10
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Pre-tabulated counts and rates; used when no streams are given.
    pub tables: Option<PathBuf>,
    pub stream: StreamParams,
    pub statistics: AnalysisOptions,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Directory for command outputs; stdout when absent.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub sites: Vec<GeodeticSite>,
    pub window: RunWindow,
    #[serde(default)]
    pub budget: TimingBudget,
    #[serde(default = "default_validity_step")]
    pub validity_step_s: f64,
    #[serde(default)]
    pub selection: SelectionCriteria,
    #[serde(default)]
    pub catalogue: Option<PathBuf>,
    #[serde(default = "default_top_pairs")]
    pub top_pairs: usize,
    #[serde(default)]
    pub stars: Option<StarPair>,
    #[serde(default)]
    pub spectra: Option<SpectraConfig>,
    #[serde(default)]
    pub rates: Option<RateBudget>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    /// Read a config file, apply `key=value` overrides and validate.
    pub fn load(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, overrides, &base)
    }

    pub fn from_json(text: &str, overrides: &[String], base_dir: &Path) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let mut cfg: RunConfig = serde_json::from_value(value)?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.layout()?;
        self.budget.validate()?;
        self.selection.validate()?;
        if !(self.window.duration_s > 0.0) || !(self.validity_step_s > 0.0) {
            return Err(Error::InvalidInput(
                "window duration and validity step must be positive".into(),
            ));
        }
        if let Some(stars) = &self.stars {
            stars.a.target()?;
            stars.b.target()?;
        }
        if let Some(rates) = &self.rates {
            rates.a.validate(Side::A)?;
            rates.b.validate(Side::B)?;
        }
        self.simulation.validate()
    }

    pub fn layout(&self) -> Result<SiteLayout> {
        SiteLayout::from_sites(&self.sites)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn targets(&self) -> Result<(CelestialTarget, CelestialTarget)> {
        let stars = self
            .stars
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("config has no `stars`".into()))?;
        Ok((stars.a.target()?, stars.b.target()?))
    }

    pub fn model_files(&self) -> Result<ModelFiles> {
        let s = self
            .spectra
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("config has no `spectra`".into()))?;
        Ok(ModelFiles::in_dir(&self.resolve(&s.model_dir)))
    }
}

/// Set `path.to.key=value` in a JSON document. The value is read as JSON
/// when it parses, otherwise as a string. Numeric segments index arrays.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::InvalidInput(format!("override `{assignment}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidInput(format!("bad override key `{key}`")));
    }
    let mut node = doc;
    for (k, seg) in segments.iter().enumerate() {
        let last = k + 1 == segments.len();
        node = match node {
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("`{seg}` in `{key}` is not an array index")))?;
                items
                    .get_mut(idx)
                    .ok_or_else(|| Error::InvalidInput(format!("index {idx} out of range in `{key}`")))?
            }
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().unwrap().entry(*seg).or_insert(Value::Null)
            }
            Value::Object(map) => map.entry(*seg).or_insert(Value::Null),
            _ => return Err(Error::InvalidInput(format!("`{key}` descends into a scalar"))),
        };
        if last {
            *node = value;
            return Ok(());
        }
    }
    Ok(())
}
