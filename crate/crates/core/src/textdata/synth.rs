//! Deterministic synthetic corpora standing in for licensed news data.
//!
//! Every category owns a disjoint style lexicon (`c{cat}s{j}`). Sentences are
//! drawn around one source: a category lexicon or pure filler (`f{j}`), and
//! also carry a few category-neutral salient tokens (`k{j}`). Documents of a
//! category favour their own lexicon, which makes classification learnable.
//! Cluster references are assembled from the sentences with the highest
//! `style_signal · own_lexicon_count + (1 − style_signal) · salient_count`,
//! so the ideal ranking depends on the cluster's category in proportion to
//! `style_signal`.

use serde::{Deserialize, Serialize};

use super::corpus::{ClassificationCorpus, ClusterCorpus, ClusterRecord, LabeledDoc};
use super::embeddings::EmbeddingTable;
use super::tokenize::{tokenize, tokenize_sentence};
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::selection::Budget;

const CATEGORY_NAMES: &[&str] = &[
    "biography",
    "culture",
    "business",
    "health",
    "politics",
    "law",
    "society",
    "natural_disaster",
    "science",
    "sports",
    "international",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub categories: usize,
    /// Classification documents per category.
    pub docs_per_cat: usize,
    pub sents_per_doc: usize,
    pub vocab_per_cat: usize,
    pub style_signal: f64,
    pub clusters_per_cat: usize,
    pub docs_per_cluster: usize,
    pub filler_vocab: usize,
    pub salient_vocab: usize,
    pub dim: usize,
    pub refs_per_cluster: usize,
    /// Sentences per reference summary.
    pub ref_sentences: usize,
    pub budget_words: u64,
    /// Probability that a cluster sentence draws on the cluster's own lexicon.
    pub own_prob: f64,
    /// Probability that a cluster sentence draws on another category's lexicon.
    pub other_prob: f64,
    /// As `own_prob`, for classification documents.
    pub doc_own_prob: f64,
    /// As `other_prob`, for classification documents.
    pub doc_other_prob: f64,
    /// Half-width of the per-token scatter around a lexicon centroid.
    pub spread: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            categories: 3,
            docs_per_cat: 200,
            sents_per_doc: 6,
            vocab_per_cat: 20,
            style_signal: 0.8,
            clusters_per_cat: 50,
            docs_per_cluster: 3,
            filler_vocab: 200,
            salient_vocab: 20,
            dim: 50,
            refs_per_cluster: 2,
            ref_sentences: 4,
            budget_words: 30,
            own_prob: 0.5,
            other_prob: 0.25,
            doc_own_prob: 0.7,
            doc_other_prob: 0.15,
            spread: 0.25,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(format!("synthetic corpus: {msg}")));
        if self.categories < 2 {
            return bad("need at least 2 categories");
        }
        if self.vocab_per_cat == 0 || self.filler_vocab == 0 || self.salient_vocab == 0 {
            return bad("every lexicon needs at least one token");
        }
        if !(0.0..=1.0).contains(&self.style_signal) {
            return bad("style_signal must be in [0, 1]");
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return bad("spread must be finite and non-negative");
        }
        if self.sents_per_doc == 0 || self.docs_per_cluster == 0 || self.dim == 0 {
            return bad("documents, clusters and embeddings must be non-empty");
        }
        if self.refs_per_cluster == 0 || self.ref_sentences == 0 || self.budget_words == 0 {
            return bad("references and budget must be non-empty");
        }
        let mixture_ok = |own: f64, other: f64| own >= 0.0 && other >= 0.0 && own + other <= 1.0;
        if !mixture_ok(self.own_prob, self.other_prob)
            || !mixture_ok(self.doc_own_prob, self.doc_other_prob)
        {
            return bad("lexicon mixture probabilities must be non-negative and sum to at most 1");
        }
        Ok(())
    }

    pub fn category_names(&self) -> Vec<String> {
        (0..self.categories)
            .map(|i| match CATEGORY_NAMES.get(i) {
                Some(n) => (*n).to_string(),
                None => format!("category_{i}"),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub classification: ClassificationCorpus,
    pub clusters: ClusterCorpus,
    pub embeddings: EmbeddingTable,
    /// Style lexicon of each category.
    pub lexicons: Vec<Vec<String>>,
}

struct Sentence {
    text: String,
    /// Style tokens per category.
    style_counts: Vec<usize>,
    salient: usize,
}

fn style_token(cat: usize, j: usize) -> String {
    format!("c{cat}s{j}")
}

fn make_sentence(source: Option<usize>, cfg: &SynthConfig, rng: &mut Rng) -> Sentence {
    let len = 6 + rng.below(4);
    let n_style = if source.is_some() {
        1 + rng.below(3)
    } else {
        0
    };
    let n_salient = rng.below(3);
    let mut style_counts = vec![0; cfg.categories];
    let mut tokens = Vec::with_capacity(len);
    if let Some(c) = source {
        for _ in 0..n_style {
            tokens.push(style_token(c, rng.below(cfg.vocab_per_cat)));
        }
        style_counts[c] = n_style;
    }
    for _ in 0..n_salient {
        tokens.push(format!("k{}", rng.below(cfg.salient_vocab)));
    }
    while tokens.len() < len {
        tokens.push(format!("f{}", rng.below(cfg.filler_vocab)));
    }
    rng.shuffle(&mut tokens);
    let mut text = tokens.join(" ");
    if let Some(first) = text.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    text.push('.');
    Sentence {
        text,
        style_counts,
        salient: n_salient,
    }
}

fn sentence_source(
    cat: usize,
    own: f64,
    other: f64,
    cfg: &SynthConfig,
    rng: &mut Rng,
) -> Option<usize> {
    let u = rng.unit();
    if u < own {
        Some(cat)
    } else if u < own + other {
        let other = rng.below(cfg.categories - 1);
        Some(if other >= cat { other + 1 } else { other })
    } else {
        None
    }
}

/// Generate classification documents, summarization clusters and a shared
/// embedding table. Identical seed and config give identical output.
pub fn synth_corpus(seed: u64, cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut root = Rng::new(seed);
    let mut emb_rng = root.fork(1);
    let mut doc_rng = root.fork(2);
    let mut cluster_rng = root.fork(3);
    let names = cfg.category_names();

    let lexicons: Vec<Vec<String>> = (0..cfg.categories)
        .map(|c| (0..cfg.vocab_per_cat).map(|j| style_token(c, j)).collect())
        .collect();
    // Lexicon tokens scatter around a random centroid per category, salient
    // tokens around a shared one; filler tokens are independent.
    let centroid =
        |rng: &mut Rng| -> Vec<f64> { (0..cfg.dim).map(|_| rng.uniform(-0.5, 0.5)).collect() };
    let mut groups: Vec<(Option<Vec<f64>>, Vec<String>)> = lexicons
        .iter()
        .map(|lex| (Some(centroid(&mut emb_rng)), lex.clone()))
        .collect();
    groups.push((
        Some(centroid(&mut emb_rng)),
        (0..cfg.salient_vocab).map(|j| format!("k{j}")).collect(),
    ));
    let mut filler: Vec<String> = (0..cfg.filler_vocab).map(|j| format!("f{j}")).collect();
    filler.push(".".to_string());
    groups.push((None, filler));
    let mut embeddings = EmbeddingTable::new(cfg.dim);
    for (center, tokens) in &groups {
        for token in tokens {
            let v: Vec<f64> = match center {
                Some(c) => c
                    .iter()
                    .map(|x| x + emb_rng.uniform(-cfg.spread, cfg.spread))
                    .collect(),
                None => (0..cfg.dim).map(|_| emb_rng.uniform(-0.5, 0.5)).collect(),
            };
            embeddings.insert(token, &v)?;
        }
    }

    let mut docs = Vec::with_capacity(cfg.categories * cfg.docs_per_cat);
    for i in 0..cfg.categories * cfg.docs_per_cat {
        let cat = i % cfg.categories;
        let text = (0..cfg.sents_per_doc)
            .map(|_| {
                let src =
                    sentence_source(cat, cfg.doc_own_prob, cfg.doc_other_prob, cfg, &mut doc_rng);
                make_sentence(src, cfg, &mut doc_rng).text
            })
            .collect::<Vec<_>>()
            .join(" ");
        docs.push(LabeledDoc {
            id: format!("doc-{i:05}"),
            category: cat,
            sentences: tokenize(&text),
        });
    }

    let mut clusters = Vec::with_capacity(cfg.categories * cfg.clusters_per_cat);
    for i in 0..cfg.categories * cfg.clusters_per_cat {
        let cat = i % cfg.categories;
        let documents: Vec<Vec<Sentence>> = (0..cfg.docs_per_cluster)
            .map(|_| {
                (0..cfg.sents_per_doc)
                    .map(|_| {
                        let src = sentence_source(
                            cat,
                            cfg.own_prob,
                            cfg.other_prob,
                            cfg,
                            &mut cluster_rng,
                        );
                        make_sentence(src, cfg, &mut cluster_rng)
                    })
                    .collect()
            })
            .collect();
        let flat: Vec<&Sentence> = documents.iter().flatten().collect();
        let references = (0..cfg.refs_per_cluster)
            .map(|_| {
                let mut scored: Vec<(f64, usize)> = flat
                    .iter()
                    .enumerate()
                    .map(|(j, s)| {
                        let score = cfg.style_signal * s.style_counts[cat] as f64
                            + (1.0 - cfg.style_signal) * s.salient as f64
                            + cluster_rng.uniform(0.0, 0.1);
                        (score, j)
                    })
                    .collect();
                scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
                scored
                    .iter()
                    .take(cfg.ref_sentences)
                    .map(|(_, j)| flat[*j].text.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        clusters.push(ClusterRecord {
            id: format!("cluster-{i:04}"),
            category: Some(names[cat].clone()),
            documents: documents
                .iter()
                .map(|d| d.iter().map(|s| tokenize_sentence(&s.text)).collect())
                .collect(),
            references,
            budget: Budget::words(cfg.budget_words),
        });
    }

    Ok(SynthCorpus {
        classification: ClassificationCorpus {
            categories: names.clone(),
            docs,
        },
        clusters: ClusterCorpus {
            categories: names,
            clusters,
        },
        embeddings,
        lexicons,
    })
}
