//! ROUGE-N recall, used both for evaluation and for sentence saliency labels.
//!
//! Tokens are reduced to ROUGE units before counting: tokens without any
//! alphanumeric character are dropped, stopwords are optionally removed and
//! the rest are optionally Porter-stemmed. Multi-reference scores average the
//! per-reference recalls (or take the best one).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::STOPWORDS;
use crate::textdata::{tokenize, ClusterRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MultiRef {
    Average,
    Best,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RougeConfig {
    pub n: usize,
    pub stem: bool,
    pub stopword_removal: bool,
    pub multi_ref: MultiRef,
}

impl RougeConfig {
    /// Stemming on, stopwords kept, per-reference average.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            stem: true,
            stopword_removal: false,
            multi_ref: MultiRef::Average,
        }
    }

    pub fn with_stem(mut self, stem: bool) -> Self {
        self.stem = stem;
        self
    }
}

/// Actual saliency of every sentence of a flattened cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaliencyLabels {
    pub cluster_id: String,
    pub scores: Vec<f64>,
}

impl SaliencyLabels {
    /// True when at least two sentences carry different labels.
    pub fn has_distinct(&self) -> bool {
        self.scores
            .first()
            .is_some_and(|first| self.scores.iter().any(|s| s != first))
    }
}

/// Reduce raw tokens to the units that are counted.
pub fn rouge_units<S: AsRef<str>>(tokens: &[S], config: &RougeConfig) -> Vec<String> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .filter(|t| !config.stopword_removal || !STOPWORDS.contains(t))
        .map(|t| {
            let lower = t.to_lowercase();
            if config.stem {
                porter_stemmer::stem(&lower)
            } else {
                lower
            }
        })
        .collect()
}

fn ngram_counts(units: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if n == 0 || units.len() < n {
        return counts;
    }
    for w in units.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// Below this many (candidate window, reference n-gram) comparisons, match
/// counts come from a direct scan instead of a hash map.
const SCAN_LIMIT: usize = 256;

#[derive(Debug, Clone)]
struct ReferenceCounts {
    /// Distinct n-grams with their counts.
    counts: Vec<(Vec<String>, usize)>,
    total: usize,
}

/// Preprocessed references, reusable across many candidates.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    config: RougeConfig,
    references: Vec<ReferenceCounts>,
}

impl ReferenceSet {
    /// References with fewer than `n` units are skipped; if none remain this
    /// is an error.
    pub fn new<S: AsRef<str>>(references: &[Vec<S>], config: RougeConfig) -> Result<Self> {
        if config.n == 0 {
            return Err(Error::InvalidArgument(
                "ROUGE order must be at least 1".into(),
            ));
        }
        let references: Vec<ReferenceCounts> = references
            .iter()
            .map(|r| rouge_units(r, &config))
            .filter(|r| r.len() >= config.n)
            .map(|r| ReferenceCounts {
                total: r.len() + 1 - config.n,
                counts: {
                    let mut counts: Vec<(Vec<String>, usize)> = ngram_counts(&r, config.n)
                        .into_iter()
                        .map(|(g, c)| (g.to_vec(), c))
                        .collect();
                    counts.sort_unstable();
                    counts
                },
            })
            .collect();
        if references.is_empty() {
            return Err(Error::Degenerate(format!(
                "no reference has at least {} units",
                config.n
            )));
        }
        Ok(Self { config, references })
    }

    pub fn config(&self) -> &RougeConfig {
        &self.config
    }

    pub fn recall<S: AsRef<str>>(&self, candidate: &[S]) -> f64 {
        self.recall_units(&rouge_units(candidate, &self.config))
    }

    /// Recall of a candidate already reduced with [`rouge_units`] under this
    /// set's config.
    pub fn recall_units(&self, candidate: &[String]) -> f64 {
        let n = self.config.n;
        let windows = (candidate.len() + 1).saturating_sub(n);
        let mut table: Option<HashMap<&[String], usize>> = None;
        let per_ref = self.references.iter().map(|r| {
            let hits: usize = if windows * r.counts.len() <= SCAN_LIMIT {
                r.counts
                    .iter()
                    .map(|(g, c)| {
                        (*c).min(candidate.windows(n).filter(|w| *w == g.as_slice()).count())
                    })
                    .sum()
            } else {
                let t = table.get_or_insert_with(|| ngram_counts(candidate, n));
                r.counts
                    .iter()
                    .map(|(g, c)| (*c).min(t.get(g.as_slice()).copied().unwrap_or(0)))
                    .sum()
            };
            hits as f64 / r.total as f64
        });
        match self.config.multi_ref {
            MultiRef::Average => per_ref.sum::<f64>() / self.references.len() as f64,
            MultiRef::Best => per_ref.fold(0.0, f64::max),
        }
    }
}

/// ROUGE-N recall of `candidate` against `references`.
pub fn rouge_n<S: AsRef<str>, T: AsRef<str>>(
    candidate: &[S],
    references: &[Vec<T>],
    config: &RougeConfig,
) -> Result<f64> {
    Ok(ReferenceSet::new(references, *config)?.recall(candidate))
}

/// Concatenated tokens of each reference summary.
pub fn reference_tokens(references: &[String]) -> Vec<Vec<String>> {
    references
        .iter()
        .map(|r| tokenize(r).into_iter().flat_map(|s| s.tokens).collect())
        .collect()
}

/// Score every sentence of the flattened cluster against its references.
pub fn label_saliency(cluster: &ClusterRecord, config: &RougeConfig) -> Result<SaliencyLabels> {
    if cluster.references.is_empty() {
        return Err(Error::Degenerate(format!(
            "cluster {} has no references",
            cluster.id
        )));
    }
    let refs = ReferenceSet::new(&reference_tokens(&cluster.references), *config)?;
    Ok(SaliencyLabels {
        cluster_id: cluster.id.clone(),
        scores: cluster
            .sentences()
            .map(|s| refs.recall(&s.tokens))
            .collect(),
    })
}
