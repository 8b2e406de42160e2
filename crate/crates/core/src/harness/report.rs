//! Evaluation reports, style-analysis reports and run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::numerics::Tensor2;
use crate::summarizer::Mode;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterScore {
    pub id: String,
    pub rouge_1: f64,
    pub rouge_2: f64,
    /// Selected sentence indices into the flattened cluster, in document order.
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: Mode,
    pub mean_rouge_1: f64,
    pub mean_rouge_2: f64,
    /// Held-out pairwise ranking accuracy, when any cluster has labeled pairs.
    pub pairwise_accuracy: Option<f64>,
    pub clusters: Vec<ClusterScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_clusters: usize,
    pub test_clusters: usize,
    /// Training clusters without usable saliency labels.
    pub skipped_train: Vec<String>,
    /// Held-out clusters without usable references.
    pub skipped_eval: Vec<String>,
    pub modes: Vec<ModeResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: Mode,
    pub clusters: usize,
    pub mean_rouge_1: f64,
    pub mean_rouge_2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcedCluster {
    pub fold: usize,
    pub id: String,
    /// Index of the cluster's own category.
    pub category: usize,
    /// ROUGE-2 recall with the summary forced to each category in turn.
    pub rouge_2: Vec<f64>,
}

impl ForcedCluster {
    /// Correct category scores at least the mean over the wrong ones.
    pub fn correct_wins(&self) -> bool {
        let wrong: Vec<f64> = self
            .rouge_2
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.category)
            .map(|(_, v)| *v)
            .collect();
        if wrong.is_empty() {
            return true;
        }
        self.rouge_2[self.category] >= wrong.iter().sum::<f64>() / wrong.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcedReport {
    pub categories: Vec<String>,
    pub clusters: Vec<ForcedCluster>,
    /// Fraction of clusters where [`ForcedCluster::correct_wins`] holds.
    pub correct_wins_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSummary {
    pub categories: Vec<String>,
    pub epochs_run: usize,
    pub heldout_accuracy: Option<f64>,
}

/// Cross-validation results. Contains no timing so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub crate_version: String,
    pub seed: u64,
    pub config_hash: String,
    pub classifier: ClassifierSummary,
    pub folds: Vec<FoldReport>,
    /// Means over every held-out cluster of every fold.
    pub overall: Vec<ModeSummary>,
    pub forced: Option<ForcedReport>,
}

pub(crate) fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "report schema version {} is not supported",
                report.schema_version
            )));
        }
        Ok(report)
    }

    pub fn overall_for(&self, mode: Mode) -> Option<&ModeSummary> {
        self.overall.iter().find(|s| s.mode == mode)
    }

    pub fn fold_mode(&self, fold: usize, mode: Mode) -> Option<&ModeResult> {
        self.folds.get(fold)?.modes.iter().find(|m| m.mode == mode)
    }

    /// Aligned text table, ROUGE in percent.
    pub fn render_table(&self) -> String {
        let mut rows: Vec<[String; 6]> = vec![[
            "fold".into(),
            "mode".into(),
            "clusters".into(),
            "ROUGE-1".into(),
            "ROUGE-2".into(),
            "pair-acc".into(),
        ]];
        for f in &self.folds {
            for m in &f.modes {
                rows.push([
                    f.fold.to_string(),
                    m.mode.to_string(),
                    m.clusters.len().to_string(),
                    format!("{:.2}", 100.0 * m.mean_rouge_1),
                    format!("{:.2}", 100.0 * m.mean_rouge_2),
                    m.pairwise_accuracy
                        .map_or("-".into(), |a| format!("{a:.3}")),
                ]);
            }
        }
        for s in &self.overall {
            rows.push([
                "all".into(),
                s.mode.to_string(),
                s.clusters.to_string(),
                format!("{:.2}", 100.0 * s.mean_rouge_1),
                format!("{:.2}", 100.0 * s.mean_rouge_2),
                "-".into(),
            ]);
        }
        let mut out = align(&rows);
        if let Some(acc) = self.classifier.heldout_accuracy {
            let _ = writeln!(out, "\nclassifier held-out accuracy: {acc:.3}");
        }
        if let Some(f) = &self.forced {
            let _ = writeln!(
                out,
                "forced category: correct >= mean wrong on {:.1}% of {} clusters",
                100.0 * f.correct_wins_fraction,
                f.clusters.len()
            );
        }
        out
    }
}

/// Left-align the first two columns, right-align the rest.
fn align<const N: usize>(rows: &[[String; N]]) -> String {
    let widths: Vec<usize> = (0..N)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c < 2 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Pairwise similarity of the per-category transformation sub-matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleReport {
    pub categories: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl StyleReport {
    pub fn new(categories: Vec<String>, similarity: &Tensor2) -> Result<Self> {
        if similarity.rows() != categories.len() || similarity.cols() != categories.len() {
            return Err(Error::Shape(format!(
                "{}x{} similarity for {} categories",
                similarity.rows(),
                similarity.cols(),
                categories.len()
            )));
        }
        Ok(Self {
            categories,
            matrix: similarity.to_rows(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn render_table(&self) -> String {
        let n = self.categories.len();
        let name_w = self.categories.iter().map(|c| c.len()).max().unwrap_or(0);
        let cells: Vec<Vec<String>> = self
            .matrix
            .iter()
            .map(|r| r.iter().map(|v| format!("{v:.4}")).collect())
            .collect();
        let col_w: Vec<usize> = (0..n)
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain(std::iter::once(self.categories[j].len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = format!("{:name_w$}", "");
        for (j, c) in self.categories.iter().enumerate() {
            let _ = write!(out, "  {c:>w$}", w = col_w[j]);
        }
        out.push('\n');
        for (i, c) in self.categories.iter().enumerate() {
            let _ = write!(out, "{c:<name_w$}");
            for (j, cell) in cells[i].iter().enumerate() {
                let _ = write!(out, "  {cell:>w$}", w = col_w[j]);
            }
            out.push('\n');
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checksum {
    pub role: String,
    /// Source file, or `None` for data generated in memory.
    pub path: Option<PathBuf>,
    pub sha256: String,
}

/// Everything needed to rerun an experiment exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub crate_version: String,
    pub command: String,
    pub seed: u64,
    pub config_hash: String,
    /// Full configuration in config-file syntax.
    pub config: String,
    pub inputs: Vec<Checksum>,
    pub outputs: Vec<Checksum>,
    pub elapsed_seconds: f64,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            crate_version: crate::VERSION.to_string(),
            command: command.to_string(),
            seed: config.seed,
            config_hash: config.hash(),
            config: config.render(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            elapsed_seconds: 0.0,
        }
    }

    pub fn add_input_file(&mut self, role: &str, path: &Path) -> Result<()> {
        self.inputs.push(Checksum {
            role: role.to_string(),
            path: Some(path.to_path_buf()),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn add_input_bytes(&mut self, role: &str, bytes: &[u8]) {
        self.inputs.push(Checksum {
            role: role.to_string(),
            path: None,
            sha256: sha256_hex(bytes),
        });
    }

    pub fn add_output_file(&mut self, role: &str, path: &Path) -> Result<()> {
        self.outputs.push(Checksum {
            role: role.to_string(),
            path: Some(path.to_path_buf()),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
