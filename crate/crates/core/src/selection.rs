//! Budgeted greedy sentence selection with unigram-overlap redundancy filtering.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::textdata::SentenceTokens;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetUnit {
    Words,
    Bytes,
}

/// Summary length limit, e.g. 100 words or 665 bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    pub unit: BudgetUnit,
    pub value: u64,
}

impl Budget {
    pub fn words(value: u64) -> Self {
        Self {
            unit: BudgetUnit::Words,
            value,
        }
    }

    pub fn bytes(value: u64) -> Self {
        Self {
            unit: BudgetUnit::Bytes,
            value,
        }
    }

    /// Size of already-rendered text in this budget's unit.
    pub fn measure(&self, text: &str) -> u64 {
        match self.unit {
            BudgetUnit::Words => text.split_whitespace().count() as u64,
            BudgetUnit::Bytes => text.len() as u64,
        }
    }
}

/// Default fraction of already-covered unigrams above which a candidate is skipped.
pub const DEFAULT_REDUNDANCY_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryResult {
    /// Indices into the flattened sentence list, in document order.
    pub selected: Vec<usize>,
    pub text: String,
    pub used: u64,
    pub budget: Budget,
}

/// Common English function words ignored by the redundancy test.
pub const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "said",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

fn content_unigrams(s: &SentenceTokens) -> HashSet<&str> {
    s.tokens
        .iter()
        .map(String::as_str)
        .filter(|t| t.chars().any(char::is_alphanumeric) && !STOPWORDS.contains(t))
        .collect()
}

/// Greedy selection.
///
/// Candidates are visited in descending score order, ties going to the earlier
/// sentence. A candidate is skipped when more than `redundancy_threshold` of
/// its distinct content unigrams already occur in the selection, or when it
/// would push the rendered summary past the budget. Selected sentences are
/// rendered in their original order, joined by single spaces.
pub fn greedy_select(
    sentences: &[SentenceTokens],
    scores: &[f64],
    budget: Budget,
    redundancy_threshold: f64,
) -> SummaryResult {
    assert_eq!(sentences.len(), scores.len(), "one score per sentence");
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let sizes: Vec<u64> = sentences
        .iter()
        .map(|s| budget.measure(s.source_text.trim()))
        .collect();

    let mut chosen: Vec<usize> = Vec::new();
    let mut covered: HashSet<&str> = HashSet::new();
    let mut used = 0u64;
    for i in order {
        let add = match budget.unit {
            BudgetUnit::Bytes if !chosen.is_empty() => sizes[i] + 1,
            _ => sizes[i],
        };
        if used + add > budget.value {
            continue;
        }
        let unigrams = content_unigrams(&sentences[i]);
        if !unigrams.is_empty() {
            let overlap = unigrams.iter().filter(|u| covered.contains(*u)).count();
            if overlap as f64 / unigrams.len() as f64 > redundancy_threshold {
                continue;
            }
        }
        used += add;
        covered.extend(unigrams);
        chosen.push(i);
    }
    chosen.sort_unstable();
    let text = chosen
        .iter()
        .map(|&i| sentences[i].source_text.trim())
        .collect::<Vec<_>>()
        .join(" ");
    debug_assert_eq!(budget.measure(&text), used);
    SummaryResult {
        selected: chosen,
        text,
        used,
        budget,
    }
}
