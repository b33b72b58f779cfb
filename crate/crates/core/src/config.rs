//! Pipeline configuration (`key = value` files) and run manifests.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::corpus::{Document, Tokenizer};
use crate::error::{Error, Result};
use crate::evaluation::{EntryPolicy, DEFAULT_THRESHOLD};
use crate::extraction::{FilterStage, Pipeline};
use crate::filter::{check_width, load_model, parse_collocations, Algorithm, FeatureKind, DEFAULT_COLLOCATIONS};
use crate::patterns::{compile_patterns, DEFAULT_PATTERNS};
use crate::tagger::{Tagger, DEFAULT_LEXICON, DEFAULT_RULES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    #[default]
    Collocation,
    Classifier,
    None,
}

impl FromStr for FilterMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "collocation" => Ok(FilterMode::Collocation),
            "classifier" => Ok(FilterMode::Classifier),
            "none" => Ok(FilterMode::None),
            _ => Err(format!("unknown filter mode `{s}`")),
        }
    }
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterMode::Collocation => "collocation",
            FilterMode::Classifier => "classifier",
            FilterMode::None => "none",
        })
    }
}

/// Resource file names looked up under a resource root.
pub const PATTERNS_FILE: &str = "patterns.txt";
pub const COLLOCATIONS_FILE: &str = "collocations.tsv";
pub const LEXICON_FILE: &str = "lexicon.tsv";
pub const RULES_FILE: &str = "rules.txt";
pub const ABBREVIATIONS_FILE: &str = "abbreviations.txt";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub patterns_path: Option<PathBuf>,
    pub collocations_path: Option<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
    pub rules_path: Option<PathBuf>,
    pub abbreviations_path: Option<PathBuf>,
    /// Fallback directory for any resource without an explicit path.
    pub resource_root: Option<PathBuf>,
    pub filter_mode: FilterMode,
    pub model_path: Option<PathBuf>,
    #[serde(serialize_with = "display")]
    pub classifier: Algorithm,
    #[serde(serialize_with = "display")]
    pub feature_kind: FeatureKind,
    pub width: usize,
    pub alpha: f64,
    pub threshold: f64,
    pub beta: f64,
    #[serde(serialize_with = "display")]
    pub entry_policy: EntryPolicy,
}

fn display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            patterns_path: None,
            collocations_path: None,
            lexicon_path: None,
            rules_path: None,
            abbreviations_path: None,
            resource_root: None,
            filter_mode: FilterMode::default(),
            model_path: None,
            classifier: Algorithm::Gis,
            feature_kind: FeatureKind::Word,
            width: 1,
            alpha: 1.0,
            threshold: DEFAULT_THRESHOLD,
            beta: 1.0,
            entry_policy: EntryPolicy::default(),
        }
    }
}

impl PipelineConfig {
    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn parse(content: &str) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        for (n, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| Error::syntax("config", n + 1, m);
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            cfg.set(k.trim(), v.trim()).map_err(err)?;
        }
        Ok(cfg)
    }

    /// Sets one key; used by both config files and command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let path = || Some(PathBuf::from(value));
        let num = |what: &str| value.parse::<f64>().map_err(|_| format!("bad {what} `{value}`"));
        match key {
            "patterns_path" => self.patterns_path = path(),
            "collocations_path" => self.collocations_path = path(),
            "lexicon_path" => self.lexicon_path = path(),
            "rules_path" => self.rules_path = path(),
            "abbreviations_path" => self.abbreviations_path = path(),
            "resource_root" => self.resource_root = path(),
            "model_path" => self.model_path = path(),
            "filter_mode" => self.filter_mode = value.parse()?,
            "classifier" => self.classifier = value.parse()?,
            "feature_kind" => self.feature_kind = value.parse()?,
            "width" => self.width = value.parse().map_err(|_| format!("bad width `{value}`"))?,
            "alpha" => self.alpha = num("alpha")?,
            "threshold" => self.threshold = num("threshold")?,
            "beta" => self.beta = num("beta")?,
            "entry_policy" => self.entry_policy = value.parse()?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        check_width(self.width)?;
        if self.filter_mode == FilterMode::Classifier && self.model_path.is_none() {
            return Err(Error::Config("filter_mode = classifier needs model_path".into()));
        }
        if !(self.beta > 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold must lie in [0, 1], got {}", self.threshold)));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::Config(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        Ok(())
    }

    /// Explicit path, else the file under the resource root when present,
    /// else the bundled copy (None).
    fn resolve(&self, explicit: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
        explicit.clone().or_else(|| {
            self.resource_root
                .as_ref()
                .map(|r| r.join(name))
                .filter(|p| p.is_file())
        })
    }

    fn read(&self, explicit: &Option<PathBuf>, name: &str, bundled: &'static str) -> Result<String> {
        match self.resolve(explicit, name) {
            Some(p) => fs::read_to_string(&p).map_err(|e| Error::io(p, e)),
            None => Ok(bundled.to_string()),
        }
    }

    /// Loads every stage resource; any failure surfaces before processing.
    pub fn build_pipeline(&self) -> Result<Pipeline> {
        self.validate()?;
        let cascade = compile_patterns(&self.read(&self.patterns_path, PATTERNS_FILE, DEFAULT_PATTERNS)?)?;
        let tagger = Tagger::from_sources(
            &self.read(&self.lexicon_path, LEXICON_FILE, DEFAULT_LEXICON)?,
            &self.read(&self.rules_path, RULES_FILE, DEFAULT_RULES)?,
        )?;
        let tokenizer = match self.resolve(&self.abbreviations_path, ABBREVIATIONS_FILE) {
            Some(p) => Tokenizer::from_list(&fs::read_to_string(&p).map_err(|e| Error::io(p, e))?),
            None => Tokenizer::default(),
        };
        let filter = match self.filter_mode {
            FilterMode::None => FilterStage::None,
            FilterMode::Collocation => FilterStage::Collocation(parse_collocations(&self.read(
                &self.collocations_path,
                COLLOCATIONS_FILE,
                DEFAULT_COLLOCATIONS,
            )?)?),
            FilterMode::Classifier => {
                let p = self.model_path.as_ref().expect("validated");
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                FilterStage::Classifier(load_model(&text)?.1)
            }
        };
        Ok(Pipeline {
            tokenizer,
            cascade,
            filter,
            tagger,
        })
    }
}

/// SHA-256 over documents sorted by id: `id NUL text NUL` per document.
pub fn corpus_hash(docs: &[Document]) -> String {
    let mut sorted: Vec<&Document> = docs.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut h = Sha256::new();
    for d in sorted {
        h.update(d.id.as_bytes());
        h.update([0]);
        h.update(d.text.as_bytes());
        h.update([0]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Written beside every MID export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub timestamp: String,
    pub corpus_hash: String,
    pub documents: usize,
    pub entries: usize,
    pub config: PipelineConfig,
}

impl RunManifest {
    pub fn new(config: &PipelineConfig, docs: &[Document], entries: usize, timestamp: impl Into<String>) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: timestamp.into(),
            corpus_hash: corpus_hash(docs),
            documents: docs.len(),
            entries,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest always serializes");
        s.push('\n');
        s
    }
}

/// Reads a config file, then applies `key=value` overrides in order.
pub fn load_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<PipelineConfig> {
    let mut cfg = match path {
        Some(p) => PipelineConfig::parse(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
        None => PipelineConfig::default(),
    };
    for (k, v) in overrides {
        cfg.set(k, v).map_err(Error::Config)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let cfg = PipelineConfig::parse("# run\nfilter_mode = none\nwidth=2\nentry_policy = any\n").unwrap();
        assert_eq!((cfg.filter_mode, cfg.width, cfg.entry_policy), (FilterMode::None, 2, EntryPolicy::Any));
        assert!(PipelineConfig::parse("width 2").is_err());
        assert!(PipelineConfig::parse("colour = blue").is_err());
        let over = load_config(None, &[("threshold".into(), "0.8".into())]).unwrap();
        assert_eq!(over.threshold, 0.8);
    }

    #[test]
    fn classifier_needs_model() {
        let cfg = PipelineConfig {
            filter_mode: FilterMode::Classifier,
            ..PipelineConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(PipelineConfig { width: 4, ..PipelineConfig::default() }.validate().is_err());
    }

    #[test]
    fn missing_resource_is_startup_error() {
        let cfg = PipelineConfig {
            patterns_path: Some("/nonexistent/patterns.txt".into()),
            ..PipelineConfig::default()
        };
        let err = cfg.build_pipeline().unwrap_err();
        assert_eq!(err.class(), crate::error::ErrorClass::Resource);
    }

    #[test]
    fn hash_ignores_document_order() {
        let a = Document::new("a", "x");
        let b = Document::new("b", "y");
        assert_eq!(corpus_hash(&[a.clone(), b.clone()]), corpus_hash(&[b, a.clone()]));
        assert_ne!(corpus_hash(&[a]), corpus_hash(&[]));
    }
}
