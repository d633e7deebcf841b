//! Run and benchmark config files.
//!
//! Relative paths inside a config file are resolved against the directory
//! holding that file, so a run directory can be moved as a whole.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geoconflict::engine::{DetectorConfig, FieldWeight};
use geoconflict::eval::SyntheticSpec;
use geoconflict::ingest::{FieldMap, SchemaMapping, AUTO_ID};
use geoconflict::similarity::Bm25Params;
use geoconflict::text::PipelineConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(default = "auto_id")]
    pub id_field: String,
    /// Defaults to the detector's field names.
    #[serde(default)]
    pub similarity_fields: Vec<FieldMap>,
    #[serde(default = "lon")]
    pub lon_field: String,
    #[serde(default = "lat")]
    pub lat_field: String,
    #[serde(default)]
    pub source_label: Option<String>,
}

fn auto_id() -> String {
    AUTO_ID.to_owned()
}

fn lon() -> String {
    "lon".to_owned()
}

fn lat() -> String {
    "lat".to_owned()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    #[serde(default = "default_epsilon")]
    pub epsilon_m: f64,
    #[serde(default)]
    pub threshold: f64,
    #[serde(default = "default_fields")]
    pub fields: Vec<FieldWeight>,
    #[serde(default = "default_k1")]
    pub k1: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default = "yes")]
    pub stem: bool,
    /// Stopword list file; the built-in English list when absent.
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    #[serde(default)]
    pub dedup_query_terms: bool,
}

fn default_epsilon() -> f64 {
    200.0
}

fn default_fields() -> Vec<FieldWeight> {
    vec![FieldWeight::new("name", 1.0)]
}

fn default_k1() -> f64 {
    Bm25Params::default().k1
}

fn default_b() -> f64 {
    Bm25Params::default().b
}

fn yes() -> bool {
    true
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            epsilon_m: default_epsilon(),
            threshold: 0.0,
            fields: default_fields(),
            k1: default_k1(),
            b: default_b(),
            stem: true,
            stopwords: None,
            dedup_query_terms: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub existing: DatasetConfig,
    pub new: DatasetConfig,
    /// Ground truth CSV (`new_id,existing_id`); needed by tune and eval.
    #[serde(default)]
    pub truth: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Label of the results rows written by eval.
    #[serde(default = "default_exp")]
    pub experiment: String,
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub detector: DetectorSection,
}

fn default_exp() -> String {
    "EXP1".to_owned()
}

/// A benchmark spec plus where and how to write it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub output_dir: PathBuf,
    #[serde(default = "default_format")]
    pub format: DataFormat,
    pub spec: SyntheticSpec,
    /// Detector settings copied into the generated run config.
    #[serde(default)]
    pub detector: DetectorSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Geojson,
    Csv,
}

impl DataFormat {
    pub fn extension(self) -> &'static str {
        match self {
            DataFormat::Geojson => "geojson",
            DataFormat::Csv => "csv",
        }
    }
}

fn default_format() -> DataFormat {
    DataFormat::Geojson
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("{}: cannot read config", path.display()))?;
    toml::from_str(&text).with_context(|| format!("{}: invalid config", path.display()))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl DetectorSection {
    fn resolve(&mut self, base: &Path) {
        if let Some(s) = &self.stopwords {
            self.stopwords = Some(resolve(base, s));
        }
    }

    pub fn build(&self, config: &Path) -> Result<DetectorConfig> {
        let pipeline = match &self.stopwords {
            Some(p) => PipelineConfig::with_stopword_file(p, self.stem)
                .with_context(|| format!("{}: field `detector.stopwords`", config.display()))?,
            None => {
                let mut p = PipelineConfig::default();
                p.stem_enabled = self.stem;
                p
            }
        };
        let cfg = DetectorConfig {
            epsilon_m: self.epsilon_m,
            threshold: self.threshold,
            fields: self.fields.clone(),
            params: Bm25Params { k1: self.k1, b: self.b },
            pipeline,
            dedup_query_terms: self.dedup_query_terms,
        };
        cfg.validate()
            .with_context(|| format!("{}: section `detector`", config.display()))?;
        Ok(cfg)
    }
}

impl DatasetConfig {
    pub fn mapping(&self, detector: &DetectorSection, default_label: &str) -> SchemaMapping {
        let fields = if self.similarity_fields.is_empty() {
            detector
                .fields
                .iter()
                .map(|f| FieldMap::identity(f.name.clone()))
                .collect()
        } else {
            self.similarity_fields.clone()
        };
        SchemaMapping {
            id_field: self.id_field.clone(),
            similarity_fields: fields,
            lon_field: self.lon_field.clone(),
            lat_field: self.lat_field.clone(),
            source_label: self.source_label.clone().unwrap_or_else(|| default_label.to_owned()),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: RunConfig = read_toml(path)?;
        let base = base_dir(path);
        cfg.existing.path = resolve(&base, &cfg.existing.path);
        cfg.new.path = resolve(&base, &cfg.new.path);
        cfg.truth = cfg.truth.map(|t| resolve(&base, &t));
        cfg.output_dir = resolve(&base, &cfg.output_dir);
        cfg.detector.resolve(&base);
        for (name, p) in [("existing.path", &cfg.existing.path), ("new.path", &cfg.new.path)] {
            if !p.is_file() {
                bail!("{}: field `{name}`: no such file {}", path.display(), p.display());
            }
        }
        if let Some(t) = &cfg.truth {
            if !t.is_file() {
                bail!("{}: field `truth`: no such file {}", path.display(), t.display());
            }
        }
        Ok(cfg)
    }
}

impl SynthConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: SynthConfig = read_toml(path)?;
        cfg.output_dir = resolve(&base_dir(path), &cfg.output_dir);
        Ok(cfg)
    }
}
