//! Tokenization, embeddings, corpus formats and the synthetic generator.

mod corpus;
mod embeddings;
mod synth;
mod tokenize;

pub use corpus::{
    read_classification_corpus, read_cluster_corpus, write_classification_corpus,
    write_cluster_corpus, ClassificationCorpus, ClusterCorpus, ClusterRecord, LabeledDoc,
};
pub use embeddings::{load_embeddings, EmbeddingTable, OOV_SCALE};
pub use synth::{synth_corpus, SynthConfig, SynthCorpus};
pub use tokenize::{tokenize, tokenize_sentence, SentenceTokens, ABBREVIATIONS};
