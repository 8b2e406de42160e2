//! # tcsum
//!
//! Extractive multi-document summarization that borrows its document
//! representations from a text classifier.
//!
//! A convolutional sentence encoder and a softmax category head are trained on
//! labelled classification data. The summarizer reuses the frozen encoder,
//! composes a transformation matrix from per-category sub-matrices weighted by
//! the predicted category distribution, and ranks sentences by cosine
//! similarity to the resulting summary embedding. Sub-matrices are trained
//! with a pairwise hinge loss against ROUGE-2 saliency labels.
//!
//! The crate also ships the supporting pieces needed to run experiments:
//! a ROUGE-N recall scorer, budgeted greedy selection, corpus readers, a
//! deterministic synthetic corpus generator and a cross-validation harness.

pub mod classifier;
pub mod encoder;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod rouge;
pub mod selection;
pub mod summarizer;
pub mod textdata;

pub use classifier::{CategoryDistribution, ClassifierConfig, ClassifierParams};
pub use encoder::{DocEncoding, EncoderParams, SentenceEncoding};
pub use error::{Error, Result};
pub use numerics::{AdaGrad, Rng, Tensor2};
pub use rouge::{RougeConfig, SaliencyLabels};
pub use selection::{Budget, BudgetUnit, SummaryResult};
pub use summarizer::{Mode, Model, SummarizerConfig, SummarizerParams};
pub use textdata::{ClusterRecord, EmbeddingTable, LabeledDoc, SentenceTokens};

/// Library version, recorded in model files and reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
