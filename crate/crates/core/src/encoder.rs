//! Convolutional sentence encoder and mean-pooled document embedding.
//!
//! A sentence of `N` tokens with `k`-dimensional word vectors is scanned by a
//! single filter `W_alpha` (`m × h·k`) over windows of `h` consecutive words.
//! Each window yields `tanh(W_alpha · window)`; the sentence embedding is the
//! per-feature maximum over windows. Sentences shorter than `h` are padded
//! on the right with zero vectors, giving exactly one window. No bias.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{init_uniform, Rng, Tensor2};
use crate::textdata::{EmbeddingTable, SentenceTokens};

/// Initialization half-width for weight matrices.
pub const INIT_SCALE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    pub w_alpha: Tensor2,
    pub window: usize,
}

impl EncoderParams {
    pub fn new(w_alpha: Tensor2, window: usize) -> Result<Self> {
        if window == 0 || !w_alpha.cols().is_multiple_of(window) || w_alpha.rows() == 0 {
            return Err(Error::Shape(format!(
                "filter {:?} is not m x (h*k) for h = {window}",
                w_alpha.shape()
            )));
        }
        Ok(Self { w_alpha, window })
    }

    pub fn init(features: usize, word_dim: usize, window: usize, rng: &mut Rng) -> Result<Self> {
        let w = init_uniform(features, window * word_dim, INIT_SCALE, rng)?;
        Self::new(w, window)
    }

    /// `m`
    pub fn features(&self) -> usize {
        self.w_alpha.rows()
    }

    /// `k`
    pub fn word_dim(&self) -> usize {
        self.w_alpha.cols() / self.window
    }
}

/// Word vectors of one sentence, zero-padded to at least `window` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSentence {
    tokens: usize,
    word_dim: usize,
    data: Vec<f64>,
}

impl EmbeddedSentence {
    pub fn new(tokens: &SentenceTokens, table: &EmbeddingTable, window: usize) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot encode an empty sentence".into(),
            ));
        }
        let k = table.dim();
        let rows = tokens.len().max(window);
        let mut data = vec![0.0; rows * k];
        for (i, t) in tokens.tokens.iter().enumerate() {
            data[i * k..(i + 1) * k].copy_from_slice(&table.embed_token(t));
        }
        Ok(Self {
            tokens: tokens.len(),
            word_dim: k,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens
    }

    pub fn is_empty(&self) -> bool {
        self.tokens == 0
    }

    pub fn num_windows(&self, window: usize) -> usize {
        (self.tokens + 1).saturating_sub(window).max(1)
    }

    fn window(&self, i: usize, window: usize) -> &[f64] {
        &self.data[i * self.word_dim..(i + window) * self.word_dim]
    }
}

/// Max-pooled sentence embedding with the winning window of each feature.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEncoding {
    pub values: Vec<f64>,
    pub argmax: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocEncoding {
    pub values: Vec<f64>,
    pub sentences: Vec<SentenceEncoding>,
}

fn check_dims(input: &EmbeddedSentence, params: &EncoderParams) -> Result<()> {
    if input.word_dim != params.word_dim() {
        return Err(Error::Shape(format!(
            "word vectors of dim {} for a filter expecting {}",
            input.word_dim,
            params.word_dim()
        )));
    }
    Ok(())
}

/// Encode an already-embedded sentence.
pub fn encode_embedded(
    input: &EmbeddedSentence,
    params: &EncoderParams,
) -> Result<SentenceEncoding> {
    check_dims(input, params)?;
    let m = params.features();
    let h = params.window;
    let mut values = vec![f64::NEG_INFINITY; m];
    let mut argmax = vec![0usize; m];
    for w in 0..input.num_windows(h) {
        let x = input.window(w, h);
        for f in 0..m {
            let g = crate::numerics::dot(params.w_alpha.row(f), x).tanh();
            // strict comparison keeps the lowest window index on ties
            if g > values[f] {
                values[f] = g;
                argmax[f] = w;
            }
        }
    }
    Ok(SentenceEncoding { values, argmax })
}

pub fn encode_sentence(
    tokens: &SentenceTokens,
    table: &EmbeddingTable,
    params: &EncoderParams,
) -> Result<SentenceEncoding> {
    encode_embedded(
        &EmbeddedSentence::new(tokens, table, params.window)?,
        params,
    )
}

/// Elementwise mean of sentence embeddings.
pub fn encode_document(sentences: Vec<SentenceEncoding>) -> Result<DocEncoding> {
    let first = sentences
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot encode an empty document".into()))?;
    let m = first.values.len();
    if sentences.iter().any(|s| s.values.len() != m) {
        return Err(Error::Shape("sentence encodings of different sizes".into()));
    }
    let mut values = vec![0.0; m];
    for s in &sentences {
        for (v, x) in values.iter_mut().zip(&s.values) {
            *v += x;
        }
    }
    let inv = 1.0 / sentences.len() as f64;
    values.iter_mut().for_each(|v| *v *= inv);
    Ok(DocEncoding { values, sentences })
}

/// Encode every sentence and mean-pool.
pub fn encode_embedded_document(
    inputs: &[EmbeddedSentence],
    params: &EncoderParams,
) -> Result<DocEncoding> {
    let sentences = inputs
        .iter()
        .map(|s| encode_embedded(s, params))
        .collect::<Result<Vec<_>>>()?;
    encode_document(sentences)
}

/// Accumulate the gradient with respect to `W_alpha` into `grad`.
///
/// `grad_doc` is the upstream gradient on the document embedding; it reaches
/// each sentence scaled by `1/|D|`. `grad_sentences`, when present, adds a
/// direct upstream gradient per sentence embedding. Gradient flows only
/// through the winning window of each feature.
pub fn encoder_backward(
    params: &EncoderParams,
    inputs: &[EmbeddedSentence],
    doc: &DocEncoding,
    grad_doc: Option<&[f64]>,
    grad_sentences: Option<&[Vec<f64>]>,
    grad: &mut Tensor2,
) -> Result<()> {
    let m = params.features();
    let h = params.window;
    if inputs.len() != doc.sentences.len() {
        return Err(Error::Shape(format!(
            "{} inputs for a cache of {} sentences",
            inputs.len(),
            doc.sentences.len()
        )));
    }
    grad.check_same_shape(&params.w_alpha)?;
    if grad_doc.is_some_and(|g| g.len() != m) {
        return Err(Error::Shape(
            "document gradient has the wrong length".into(),
        ));
    }
    if let Some(gs) = grad_sentences {
        if gs.len() != inputs.len() || gs.iter().any(|g| g.len() != m) {
            return Err(Error::Shape(
                "sentence gradients do not match the cache".into(),
            ));
        }
    }
    let share = 1.0 / inputs.len() as f64;
    let mut upstream = vec![0.0; m];
    for (j, (input, enc)) in inputs.iter().zip(&doc.sentences).enumerate() {
        check_dims(input, params)?;
        let windows = input.num_windows(h);
        if enc.values.len() != m
            || enc.argmax.len() != m
            || enc.argmax.iter().any(|&w| w >= windows)
        {
            return Err(Error::Shape(format!(
                "stale encoder cache for sentence {j}"
            )));
        }
        upstream.iter_mut().for_each(|u| *u = 0.0);
        if let Some(gd) = grad_doc {
            for (u, g) in upstream.iter_mut().zip(gd) {
                *u += g * share;
            }
        }
        if let Some(gs) = grad_sentences {
            for (u, g) in upstream.iter_mut().zip(&gs[j]) {
                *u += g;
            }
        }
        for (f, &up) in upstream.iter().enumerate().take(m) {
            if up == 0.0 {
                continue;
            }
            let g = enc.values[f];
            let d = up * (1.0 - g * g);
            let x = input.window(enc.argmax[f], h);
            for (dst, xi) in grad.row_mut(f).iter_mut().zip(x) {
                *dst += d * xi;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::grad_check;
    use crate::textdata::tokenize_sentence;

    fn table_1d(entries: &[(&str, f64)]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(1);
        for (tok, v) in entries {
            t.insert(tok, &[*v]).unwrap();
        }
        t
    }

    fn random_table(words: &[&str], k: usize, seed: u64) -> EmbeddingTable {
        let mut rng = Rng::new(seed);
        let mut t = EmbeddingTable::new(k);
        for w in words {
            let v: Vec<f64> = (0..k).map(|_| rng.uniform(-0.5, 0.5)).collect();
            t.insert(w, &v).unwrap();
        }
        t
    }

    #[test]
    fn zero_filter_gives_zero() {
        let table = random_table(&["a", "b", "c"], 4, 1);
        let params = EncoderParams::new(Tensor2::zeros(3, 8), 2).unwrap();
        let e = encode_sentence(&tokenize_sentence("a b c"), &table, &params).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
    }

    #[test]
    fn single_token_is_padded() {
        let table = table_1d(&[("x", 0.5)]);
        let params =
            EncoderParams::new(Tensor2::from_vec(1, 2, vec![1.0, 1.0]).unwrap(), 2).unwrap();
        let e = encode_sentence(&tokenize_sentence("x"), &table, &params).unwrap();
        assert!((e.values[0] - 0.5f64.tanh()).abs() < 1e-15);
        assert!((e.values[0] - 0.462117).abs() < 1e-6);
        assert_eq!(e.argmax, vec![0]);
    }

    #[test]
    fn empty_sentence_rejected() {
        let table = table_1d(&[]);
        let params = EncoderParams::new(Tensor2::zeros(1, 2), 2).unwrap();
        let empty = SentenceTokens {
            tokens: vec![],
            source_text: String::new(),
        };
        assert!(encode_sentence(&empty, &table, &params).is_err());
        assert!(encode_document(vec![]).is_err());
    }

    #[test]
    fn repeating_best_window_is_idempotent() {
        let table = random_table(&["a", "b", "c", "d"], 3, 2);
        let params = EncoderParams::init(5, 3, 2, &mut Rng::new(3)).unwrap();
        let base = encode_sentence(&tokenize_sentence("a b c d"), &table, &params).unwrap();
        let dup = encode_sentence(&tokenize_sentence("a b c d a b c d"), &table, &params).unwrap();
        // every window of the repeated sentence already occurs, except "d a"
        let da = encode_sentence(&tokenize_sentence("d a"), &table, &params).unwrap();
        for f in 0..5 {
            assert_eq!(dup.values[f], base.values[f].max(da.values[f]));
        }
        let twice = encode_sentence(&tokenize_sentence("a b a b"), &table, &params).unwrap();
        let once = encode_sentence(&tokenize_sentence("a b"), &table, &params).unwrap();
        let ba = encode_sentence(&tokenize_sentence("b a"), &table, &params).unwrap();
        for f in 0..5 {
            assert_eq!(twice.values[f], once.values[f].max(ba.values[f]));
        }
    }

    #[test]
    fn ties_take_lowest_window() {
        let table = table_1d(&[("x", 0.3)]);
        let params =
            EncoderParams::new(Tensor2::from_vec(1, 2, vec![1.0, 1.0]).unwrap(), 2).unwrap();
        let e = encode_sentence(&tokenize_sentence("x x x x"), &table, &params).unwrap();
        assert_eq!(e.argmax, vec![0]);
    }

    #[test]
    fn document_mean() {
        let a = SentenceEncoding {
            values: vec![1.0, 0.0],
            argmax: vec![0, 0],
        };
        let b = SentenceEncoding {
            values: vec![0.0, 1.0],
            argmax: vec![0, 0],
        };
        let d = encode_document(vec![a.clone(), b.clone()]).unwrap();
        assert_eq!(d.values, vec![0.5, 0.5]);
        let single = encode_document(vec![a.clone()]).unwrap();
        assert_eq!(single.values, a.values);
        let swapped = encode_document(vec![b, a]).unwrap();
        assert_eq!(swapped.values, d.values);
    }

    #[test]
    fn zero_upstream_zero_gradient() {
        let table = random_table(&["a", "b"], 3, 4);
        let params = EncoderParams::init(4, 3, 2, &mut Rng::new(5)).unwrap();
        let inputs = vec![EmbeddedSentence::new(&tokenize_sentence("a b a"), &table, 2).unwrap()];
        let doc = encode_embedded_document(&inputs, &params).unwrap();
        let mut g = Tensor2::zeros(4, 6);
        encoder_backward(&params, &inputs, &doc, Some(&[0.0; 4]), None, &mut g).unwrap();
        assert_eq!(g, Tensor2::zeros(4, 6));
    }

    #[test]
    fn losing_window_gets_no_gradient() {
        // one feature, window 1: only the winning token's vector reaches the gradient
        let table = table_1d(&[("lo", 0.1), ("hi", 0.9)]);
        let params = EncoderParams::new(Tensor2::from_vec(1, 1, vec![1.0]).unwrap(), 1).unwrap();
        let inputs = vec![EmbeddedSentence::new(&tokenize_sentence("lo hi"), &table, 1).unwrap()];
        let doc = encode_embedded_document(&inputs, &params).unwrap();
        assert_eq!(doc.sentences[0].argmax, vec![1]);
        let mut g = Tensor2::zeros(1, 1);
        encoder_backward(&params, &inputs, &doc, Some(&[1.0]), None, &mut g).unwrap();
        let t = 0.9f64.tanh();
        assert!((g.get(0, 0) - (1.0 - t * t) * 0.9).abs() < 1e-15);
    }

    #[test]
    fn stale_cache_rejected() {
        let table = random_table(&["a", "b", "c"], 2, 6);
        let params = EncoderParams::init(3, 2, 2, &mut Rng::new(7)).unwrap();
        let long = vec![EmbeddedSentence::new(&tokenize_sentence("a b c"), &table, 2).unwrap()];
        let short = vec![EmbeddedSentence::new(&tokenize_sentence("a"), &table, 2).unwrap()];
        let mut doc = encode_embedded_document(&long, &params).unwrap();
        doc.sentences[0].argmax = vec![1, 1, 1];
        let mut g = Tensor2::zeros(3, 4);
        assert!(encoder_backward(&params, &short, &doc, Some(&[1.0; 3]), None, &mut g).is_err());
        assert!(encoder_backward(&params, &[], &doc, Some(&[1.0; 3]), None, &mut g).is_err());
    }

    #[test]
    fn gradient_of_summed_document_embedding() {
        let words = ["w0", "w1", "w2", "w3", "w4", "w5"];
        let table = random_table(&words, 4, 8);
        for seed in 0..5 {
            let params = EncoderParams::init(5, 4, 2, &mut Rng::new(100 + seed)).unwrap();
            let inputs: Vec<EmbeddedSentence> = ["w0 w1 w2 w3", "w4", "w5 w2 w0"]
                .iter()
                .map(|s| EmbeddedSentence::new(&tokenize_sentence(s), &table, 2).unwrap())
                .collect();
            let doc = encode_embedded_document(&inputs, &params).unwrap();
            let mut g = Tensor2::zeros(5, 8);
            encoder_backward(&params, &inputs, &doc, Some(&[1.0; 5]), None, &mut g).unwrap();
            let f = |p: &[Tensor2]| {
                let ep = EncoderParams::new(p[0].clone(), 2).unwrap();
                encode_embedded_document(&inputs, &ep)
                    .unwrap()
                    .values
                    .iter()
                    .sum::<f64>()
            };
            let err = grad_check(f, &[g], std::slice::from_ref(&params.w_alpha), 1e-4).unwrap();
            assert!(err < 1e-3, "seed {seed}: {err}");
        }
    }
}
