use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize, tokenize_sentence, SentenceTokens};
use crate::error::{Error, Result};
use crate::selection::Budget;

/// A classification document with its gold category index.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDoc {
    pub id: String,
    pub category: usize,
    pub sentences: Vec<SentenceTokens>,
}

/// Documents plus the category vocabulary they index into.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassificationCorpus {
    pub categories: Vec<String>,
    pub docs: Vec<LabeledDoc>,
}

/// One summarization unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRecord {
    pub id: String,
    pub category: Option<String>,
    pub documents: Vec<Vec<SentenceTokens>>,
    pub references: Vec<String>,
    pub budget: Budget,
}

impl ClusterRecord {
    /// Sentences of all documents, documents in file order.
    pub fn sentences(&self) -> impl Iterator<Item = &SentenceTokens> {
        self.documents.iter().flatten()
    }

    pub fn num_sentences(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterCorpus {
    /// Categories in first-seen order; clusters with a null category add nothing.
    pub categories: Vec<String>,
    pub clusters: Vec<ClusterRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    id: String,
    category: String,
    text: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCluster {
    id: String,
    #[serde(default)]
    category: Option<String>,
    documents: Vec<Vec<String>>,
    references: Vec<String>,
    budget: Budget,
}

/// Iterate non-blank lines as (line number, parsed JSON value, id if any).
fn records<'a, R: BufRead + 'a>(
    reader: R,
    origin: &'a str,
) -> impl Iterator<Item = Result<(usize, serde_json::Value, String)>> + 'a {
    reader.lines().enumerate().filter_map(move |(i, line)| {
        let lineno = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(Error::io(origin, e))),
        };
        if line.trim().is_empty() {
            return None;
        }
        let value: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(e) => {
                return Some(Err(Error::Format {
                    path: origin.to_string(),
                    line: lineno,
                    message: e.to_string(),
                }))
            }
        };
        let id = value
            .get("id")
            .and_then(|v| v.as_str())
            .unwrap_or("<no id>")
            .to_string();
        Some(Ok((lineno, value, id)))
    })
}

fn resolve_category(
    name: &str,
    categories: &mut Vec<String>,
    declared: Option<&[String]>,
) -> std::result::Result<usize, String> {
    if let Some(declared) = declared {
        if !declared.iter().any(|c| c == name) {
            return Err(format!(
                "category {name:?} is not in the declared set {declared:?}"
            ));
        }
    }
    if let Some(i) = categories.iter().position(|c| c == name) {
        return Ok(i);
    }
    categories.push(name.to_string());
    Ok(categories.len() - 1)
}

impl ClassificationCorpus {
    /// Parse JSON lines `{"id", "category", "text"}`. When `declared` is given
    /// every category must belong to it; the vocabulary then starts from the
    /// declared order.
    pub fn from_reader<R: BufRead>(
        reader: R,
        origin: &str,
        declared: Option<&[String]>,
    ) -> Result<Self> {
        let mut corpus = ClassificationCorpus {
            categories: declared.map(<[String]>::to_vec).unwrap_or_default(),
            docs: Vec::new(),
        };
        for rec in records(reader, origin) {
            let (line, value, id) = rec?;
            let rec_err = |message: String| Error::Record {
                id: id.clone(),
                line,
                message,
            };
            let raw: RawDoc = serde_json::from_value(value).map_err(|e| rec_err(e.to_string()))?;
            let category = resolve_category(&raw.category, &mut corpus.categories, declared)
                .map_err(rec_err)?;
            let sentences = tokenize(&raw.text);
            if sentences.is_empty() {
                return Err(rec_err("document has no tokens".into()));
            }
            corpus.docs.push(LabeledDoc {
                id: raw.id,
                category,
                sentences,
            });
        }
        Ok(corpus)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for doc in &self.docs {
            let name = self.categories.get(doc.category).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "document {} has category index {}",
                    doc.id, doc.category
                ))
            })?;
            let text = doc
                .sentences
                .iter()
                .map(|s| s.source_text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let raw = RawDoc {
                id: doc.id.clone(),
                category: name.clone(),
                text,
            };
            serde_json::to_writer(&mut w, &raw)?;
            w.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
        }
        Ok(())
    }
}

impl ClusterCorpus {
    pub fn from_reader<R: BufRead>(
        reader: R,
        origin: &str,
        declared: Option<&[String]>,
    ) -> Result<Self> {
        let mut corpus = ClusterCorpus {
            categories: declared.map(<[String]>::to_vec).unwrap_or_default(),
            clusters: Vec::new(),
        };
        for rec in records(reader, origin) {
            let (line, value, id) = rec?;
            let rec_err = |message: String| Error::Record {
                id: id.clone(),
                line,
                message,
            };
            let raw: RawCluster =
                serde_json::from_value(value).map_err(|e| rec_err(e.to_string()))?;
            if let Some(cat) = &raw.category {
                resolve_category(cat, &mut corpus.categories, declared).map_err(rec_err)?;
            }
            if raw.budget.value == 0 {
                return Err(rec_err("budget value must be positive".into()));
            }
            let documents: Vec<Vec<SentenceTokens>> = raw
                .documents
                .iter()
                .map(|doc| {
                    doc.iter()
                        .map(|s| tokenize_sentence(s))
                        .filter(|s| {
                            if s.is_empty() {
                                log::warn!(
                                    "{origin}:{line}: dropping empty sentence in cluster {id}"
                                );
                            }
                            !s.is_empty()
                        })
                        .collect::<Vec<_>>()
                })
                .filter(|doc| !doc.is_empty())
                .collect();
            if documents.is_empty() {
                return Err(rec_err("cluster has no non-empty documents".into()));
            }
            corpus.clusters.push(ClusterRecord {
                id: raw.id,
                category: raw.category,
                documents,
                references: raw.references,
                budget: raw.budget,
            });
        }
        Ok(corpus)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        write_clusters(&self.clusters, &mut w)
    }
}

fn write_clusters<W: Write>(clusters: &[ClusterRecord], mut w: W) -> Result<()> {
    for c in clusters {
        let raw = RawCluster {
            id: c.id.clone(),
            category: c.category.clone(),
            documents: c
                .documents
                .iter()
                .map(|d| d.iter().map(|s| s.source_text.clone()).collect())
                .collect(),
            references: c.references.clone(),
            budget: c.budget,
        };
        serde_json::to_writer(&mut w, &raw)?;
        w.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

pub fn read_classification_corpus(path: &Path) -> Result<ClassificationCorpus> {
    ClassificationCorpus::from_reader(open(path)?, &path.display().to_string(), None)
}

pub fn read_cluster_corpus(path: &Path) -> Result<ClusterCorpus> {
    ClusterCorpus::from_reader(open(path)?, &path.display().to_string(), None)
}

pub fn write_classification_corpus(path: &Path, corpus: &ClassificationCorpus) -> Result<()> {
    let mut buf = Vec::new();
    corpus.write_to(&mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn write_cluster_corpus(path: &Path, clusters: &[ClusterRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_clusters(clusters, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
