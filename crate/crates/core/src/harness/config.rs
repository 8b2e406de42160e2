//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are the field
//! names of [`ExperimentConfig`]; list values are comma-separated.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::classifier::ClassifierConfig;
use crate::error::{Error, Result};
use crate::rouge::RougeConfig;
use crate::selection::DEFAULT_REDUNDANCY_THRESHOLD;
use crate::summarizer::{Mode, SummarizerConfig};
use crate::textdata::SynthConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub classification: Option<PathBuf>,
    pub clusters: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Explicit per-fold cluster files; overrides `folds`.
    pub fold_files: Vec<PathBuf>,

    /// Word embedding dimension.
    pub k: usize,
    /// Convolution feature count.
    pub m: usize,
    /// Convolution window.
    pub h: usize,
    pub omega: f64,
    pub learning_rate: f64,
    pub batch: usize,
    pub classifier_epochs: usize,
    pub classifier_patience: usize,
    /// Fraction of classification documents held out for early stopping.
    pub classifier_holdout: f64,
    pub summarizer_epochs: usize,
    pub pairs_per_cluster: usize,
    pub hi_pct: f64,
    pub lo_pct: f64,
    pub redundancy_threshold: f64,
    pub rouge_stem: bool,
    pub mode: Mode,
    pub modes: Vec<Mode>,
    pub seed: u64,
    pub folds: usize,
    pub forced_category_eval: bool,

    pub synth_categories: usize,
    pub synth_docs_per_cat: usize,
    pub synth_sents_per_doc: usize,
    pub synth_vocab_per_cat: usize,
    pub synth_style_signal: f64,
    pub synth_clusters_per_cat: usize,
    pub synth_docs_per_cluster: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let synth = SynthConfig::default();
        Self {
            classification: None,
            clusters: None,
            embeddings: None,
            out: None,
            fold_files: Vec::new(),
            k: 50,
            m: 50,
            h: 2,
            omega: 0.1,
            learning_rate: 0.1,
            batch: 128,
            classifier_epochs: 20,
            classifier_patience: 3,
            classifier_holdout: 0.1,
            summarizer_epochs: 10,
            pairs_per_cluster: 64,
            hi_pct: 0.3,
            lo_pct: 0.3,
            redundancy_threshold: DEFAULT_REDUNDANCY_THRESHOLD,
            rouge_stem: true,
            mode: Mode::TcSum,
            modes: Mode::ALL.to_vec(),
            seed: 0,
            folds: 3,
            forced_category_eval: true,
            synth_categories: synth.categories,
            synth_docs_per_cat: synth.docs_per_cat,
            synth_sents_per_doc: synth.sents_per_doc,
            synth_vocab_per_cat: synth.vocab_per_cat,
            synth_style_signal: synth.style_signal,
            synth_clusters_per_cat: synth.clusters_per_cat,
            synth_docs_per_cluster: synth.docs_per_cluster,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("invalid value {value:?} for {key}: {e}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> std::result::Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn path_str(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default()
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

const PATH_KEYS: &[&str] = &[
    "classification",
    "clusters",
    "embeddings",
    "out",
    "fold_files",
];

impl ExperimentConfig {
    /// Set one key. Unknown keys and unparsable values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "classification" => self.classification = opt_path(v),
            "clusters" => self.clusters = opt_path(v),
            "embeddings" => self.embeddings = opt_path(v),
            "out" => self.out = opt_path(v),
            "fold_files" => self.fold_files = parse_list(key, v)?,
            "k" => self.k = parse(key, v)?,
            "m" => self.m = parse(key, v)?,
            "h" => self.h = parse(key, v)?,
            "omega" => self.omega = parse(key, v)?,
            "learning_rate" => self.learning_rate = parse(key, v)?,
            "batch" => self.batch = parse(key, v)?,
            "classifier_epochs" => self.classifier_epochs = parse(key, v)?,
            "classifier_patience" => self.classifier_patience = parse(key, v)?,
            "classifier_holdout" => self.classifier_holdout = parse(key, v)?,
            "summarizer_epochs" => self.summarizer_epochs = parse(key, v)?,
            "pairs_per_cluster" => self.pairs_per_cluster = parse(key, v)?,
            "hi_pct" => self.hi_pct = parse(key, v)?,
            "lo_pct" => self.lo_pct = parse(key, v)?,
            "redundancy_threshold" => self.redundancy_threshold = parse(key, v)?,
            "rouge_stem" => self.rouge_stem = parse(key, v)?,
            "mode" => self.mode = parse(key, v)?,
            "modes" => self.modes = parse_list(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "folds" => self.folds = parse(key, v)?,
            "forced_category_eval" => self.forced_category_eval = parse(key, v)?,
            "synth_categories" => self.synth_categories = parse(key, v)?,
            "synth_docs_per_cat" => self.synth_docs_per_cat = parse(key, v)?,
            "synth_sents_per_doc" => self.synth_sents_per_doc = parse(key, v)?,
            "synth_vocab_per_cat" => self.synth_vocab_per_cat = parse(key, v)?,
            "synth_style_signal" => self.synth_style_signal = parse(key, v)?,
            "synth_clusters_per_cat" => self.synth_clusters_per_cat = parse(key, v)?,
            "synth_docs_per_cluster" => self.synth_docs_per_cluster = parse(key, v)?,
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    /// Apply a `key=value` override and log it if it changes the value.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("expected KEY=VALUE, got {assignment:?}"))
        })?;
        let before = self.get(key.trim());
        self.set(key, value).map_err(Error::InvalidArgument)?;
        let after = self.get(key.trim());
        if before != after {
            log::info!(
                "config override: {} = {}",
                key.trim(),
                after.unwrap_or_default()
            );
        }
        Ok(())
    }

    /// Parse a config file on top of the defaults.
    pub fn from_reader<R: std::io::BufRead>(reader: R, origin: &str) -> Result<Self> {
        let defaults = Self::default();
        let mut cfg = Self::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let format_err = |message: String| Error::Format {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format_err("expected key = value".into()))?;
            cfg.set(key, value).map_err(format_err)?;
            let key = key.trim();
            if cfg.get(key) != defaults.get(key) {
                log::info!(
                    "config override: {key} = {}",
                    cfg.get(key).unwrap_or_default()
                );
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file), &path.display().to_string())
    }

    /// Every key with its current value, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("classification", path_str(&self.classification)),
            ("clusters", path_str(&self.clusters)),
            ("embeddings", path_str(&self.embeddings)),
            ("out", path_str(&self.out)),
            (
                "fold_files",
                join(
                    &self
                        .fold_files
                        .iter()
                        .map(|p| p.display())
                        .collect::<Vec<_>>(),
                ),
            ),
            ("k", self.k.to_string()),
            ("m", self.m.to_string()),
            ("h", self.h.to_string()),
            ("omega", self.omega.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("batch", self.batch.to_string()),
            ("classifier_epochs", self.classifier_epochs.to_string()),
            ("classifier_patience", self.classifier_patience.to_string()),
            ("classifier_holdout", self.classifier_holdout.to_string()),
            ("summarizer_epochs", self.summarizer_epochs.to_string()),
            ("pairs_per_cluster", self.pairs_per_cluster.to_string()),
            ("hi_pct", self.hi_pct.to_string()),
            ("lo_pct", self.lo_pct.to_string()),
            (
                "redundancy_threshold",
                self.redundancy_threshold.to_string(),
            ),
            ("rouge_stem", self.rouge_stem.to_string()),
            ("mode", self.mode.to_string()),
            ("modes", join(&self.modes)),
            ("seed", self.seed.to_string()),
            ("folds", self.folds.to_string()),
            (
                "forced_category_eval",
                self.forced_category_eval.to_string(),
            ),
            ("synth_categories", self.synth_categories.to_string()),
            ("synth_docs_per_cat", self.synth_docs_per_cat.to_string()),
            ("synth_sents_per_doc", self.synth_sents_per_doc.to_string()),
            ("synth_vocab_per_cat", self.synth_vocab_per_cat.to_string()),
            ("synth_style_signal", self.synth_style_signal.to_string()),
            (
                "synth_clusters_per_cat",
                self.synth_clusters_per_cat.to_string(),
            ),
            (
                "synth_docs_per_cluster",
                self.synth_docs_per_cluster.to_string(),
            ),
        ]
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries()
            .into_iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }

    /// Config file text that parses back to `self`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// SHA-256 over all non-path settings.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.entries() {
            if !PATH_KEYS.contains(&k) {
                h.update(format!("{k}={v}\n").as_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn classifier_config(&self) -> ClassifierConfig {
        ClassifierConfig {
            features: self.m,
            window: self.h,
            epochs: self.classifier_epochs,
            batch: self.batch,
            learning_rate: self.learning_rate,
            seed: self.seed,
            patience: (self.classifier_patience > 0).then_some(self.classifier_patience),
        }
    }

    pub fn rouge_config(&self, n: usize) -> RougeConfig {
        RougeConfig::new(n).with_stem(self.rouge_stem)
    }

    pub fn summarizer_config(&self, mode: Mode) -> SummarizerConfig {
        SummarizerConfig {
            mode,
            pairs_per_cluster: self.pairs_per_cluster,
            epochs: self.summarizer_epochs,
            omega: self.omega,
            learning_rate: self.learning_rate,
            batch: self.batch,
            seed: self.seed,
            hi_pct: self.hi_pct,
            lo_pct: self.lo_pct,
            rouge: self.rouge_config(2),
            features: self.m,
            window: self.h,
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            categories: self.synth_categories,
            docs_per_cat: self.synth_docs_per_cat,
            sents_per_doc: self.synth_sents_per_doc,
            vocab_per_cat: self.synth_vocab_per_cat,
            style_signal: self.synth_style_signal,
            clusters_per_cat: self.synth_clusters_per_cat,
            docs_per_cluster: self.synth_docs_per_cluster,
            dim: self.k,
            ..SynthConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_model_settings() {
        let c = ExperimentConfig::default();
        assert_eq!((c.k, c.m, c.h, c.batch), (50, 50, 2, 128));
        assert_eq!(c.omega, 0.1);
        assert_eq!(c.learning_rate, 0.1);
    }

    #[test]
    fn render_round_trips() {
        let mut c = ExperimentConfig::default();
        c.apply_override("seed=9").unwrap();
        c.apply_override("modes = tcsum,emsim").unwrap();
        c.apply_override("clusters=/tmp/x.jsonl").unwrap();
        let back = ExperimentConfig::from_reader(c.render().as_bytes(), "mem").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn comments_and_errors() {
        let text = "# hi\n\nseed = 3\nmode = notc\n";
        let c = ExperimentConfig::from_reader(text.as_bytes(), "mem").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.mode, Mode::NoTc);
        let err =
            ExperimentConfig::from_reader("seed = 1\nbogus = 2\n".as_bytes(), "f.cfg").unwrap_err();
        assert!(err.to_string().starts_with("f.cfg:2:"), "{err}");
        assert!(ExperimentConfig::from_reader("seed\n".as_bytes(), "f").is_err());
        assert!(ExperimentConfig::from_reader("k = -1\n".as_bytes(), "f").is_err());
    }

    #[test]
    fn hash_ignores_paths() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.out = Some("/elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
