use std::path::Path;

use anyhow::{Context, Result};
use mcrelay::channel::{ChannelModel, ResponseOptions, TransformForm, DEFAULT_PSI_TOL};
use mcrelay::link::LinkConfig;
use mcrelay::sim::SimConfig;
use serde::{Deserialize, Serialize};

/// Settings of the analytical binding response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub tol: f64,
    pub form: TransformForm,
    pub max_panels: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let o = ResponseOptions::default();
        AnalysisSection {
            tol: DEFAULT_PSI_TOL,
            form: o.form,
            max_panels: o.max_panels,
        }
    }
}

/// Provenance block written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInfo {
    pub version: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub started: String,
    pub finished: String,
    pub command: Vec<String>,
    pub outputs: Vec<String>,
}

/// Everything a run depends on. A manifest is this structure with `manifest` set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub link: LinkConfig,
    pub simulation: SimConfig,
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<ManifestInfo>,
}

/// Overlays `patch` onto `base`, table by table.
fn merge(base: &mut toml::Table, patch: toml::Table) {
    for (k, v) in patch {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(p)) => merge(b, p),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl RunConfig {
    /// Parses a configuration text. Keys that are absent keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let patch: toml::Table = toml::from_str(text)?;
        let mut base = toml::Table::try_from(RunConfig::default())?;
        merge(&mut base, patch);
        let cfg: RunConfig = toml::Value::Table(base).try_into()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config file {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn model(&self) -> ChannelModel {
        ChannelModel::new(ResponseOptions {
            tol: self.analysis.tol,
            form: self.analysis.form,
            max_panels: self.analysis.max_panels,
        })
    }
}
