//! Softmax category head over document embeddings and its training loop.

use serde::{Deserialize, Serialize};

use crate::encoder::{
    encode_embedded_document, encoder_backward, DocEncoding, EmbeddedSentence, EncoderParams,
    INIT_SCALE,
};
use crate::error::{Error, Result};
use crate::numerics::{init_uniform, AdaGrad, Rng, Tensor2, DEFAULT_EPSILON};
use crate::textdata::{EmbeddingTable, LabeledDoc, SentenceTokens};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub w_beta: Tensor2,
    pub categories: Vec<String>,
}

impl ClassifierParams {
    pub fn new(w_beta: Tensor2, categories: Vec<String>) -> Result<Self> {
        if categories.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 categories, got {}",
                categories.len()
            )));
        }
        if w_beta.rows() != categories.len() {
            return Err(Error::Shape(format!(
                "W_beta has {} rows for {} categories",
                w_beta.rows(),
                categories.len()
            )));
        }
        Ok(Self { w_beta, categories })
    }

    pub fn init(categories: Vec<String>, features: usize, rng: &mut Rng) -> Result<Self> {
        let w = init_uniform(categories.len(), features, INIT_SCALE, rng)?;
        Self::new(w, categories)
    }

    pub fn num_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == name)
    }
}

/// Predicted probability distribution over categories.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryDistribution {
    pub probs: Vec<f64>,
}

impl CategoryDistribution {
    pub fn one_hot(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::InvalidArgument(format!(
                "category {index} out of range for {n} categories"
            )));
        }
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Ok(Self { probs })
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn classify(v_d: &[f64], params: &ClassifierParams) -> Result<CategoryDistribution> {
    let logits = params.w_beta.matvec(v_d)?;
    Ok(CategoryDistribution {
        probs: softmax(&logits),
    })
}

/// Negative log-likelihood of the gold category.
pub fn cross_entropy(dist: &CategoryDistribution, category: usize) -> Result<f64> {
    let p = dist.probs.get(category).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "category {category} out of range for {} categories",
            dist.probs.len()
        ))
    })?;
    Ok(-p.ln())
}

/// Loss of one document and its gradients, accumulated into `grad_alpha` and
/// `grad_beta` with the given weight.
pub(crate) fn accumulate_doc_gradient(
    encoder: &EncoderParams,
    classifier: &ClassifierParams,
    inputs: &[EmbeddedSentence],
    category: usize,
    weight: f64,
    grad_alpha: &mut Tensor2,
    grad_beta: &mut Tensor2,
) -> Result<(f64, CategoryDistribution)> {
    let doc = encode_embedded_document(inputs, encoder)?;
    let dist = classify(&doc.values, classifier)?;
    let loss = cross_entropy(&dist, category)?;
    let mut dlogits: Vec<f64> = dist.probs.iter().map(|p| p * weight).collect();
    dlogits[category] -= weight;
    grad_beta.add_outer(1.0, &dlogits, &doc.values);
    let dv_d = classifier.w_beta.matvec_t(&dlogits)?;
    encoder_backward(encoder, inputs, &doc, Some(&dv_d), None, grad_alpha)?;
    Ok((loss, dist))
}

/// Mean cross-entropy of a set of documents and its gradient with respect to
/// `(W_alpha, W_beta)`.
pub fn classification_loss_and_grad(
    encoder: &EncoderParams,
    classifier: &ClassifierParams,
    docs: &[(Vec<EmbeddedSentence>, usize)],
) -> Result<(f64, Tensor2, Tensor2)> {
    let (r, c) = encoder.w_alpha.shape();
    let mut ga = Tensor2::zeros(r, c);
    let (r, c) = classifier.w_beta.shape();
    let mut gb = Tensor2::zeros(r, c);
    let w = 1.0 / docs.len() as f64;
    let mut total = 0.0;
    for (inputs, cat) in docs {
        let (loss, _) =
            accumulate_doc_gradient(encoder, classifier, inputs, *cat, w, &mut ga, &mut gb)?;
        total += loss * w;
    }
    Ok((total, ga, gb))
}

/// Embed every sentence of a document.
pub fn embed_sentences(
    sentences: &[SentenceTokens],
    table: &EmbeddingTable,
    window: usize,
) -> Result<Vec<EmbeddedSentence>> {
    sentences
        .iter()
        .map(|s| EmbeddedSentence::new(s, table, window))
        .collect()
}

pub fn encode_and_classify(
    encoder: &EncoderParams,
    classifier: &ClassifierParams,
    inputs: &[EmbeddedSentence],
) -> Result<(DocEncoding, CategoryDistribution)> {
    let doc = encode_embedded_document(inputs, encoder)?;
    let dist = classify(&doc.values, classifier)?;
    Ok((doc, dist))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub features: usize,
    pub window: usize,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Stop after this many epochs without held-out improvement (needs a
    /// validation set).
    pub patience: Option<usize>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        Self {
            features: 50,
            window: 2,
            epochs: 10,
            batch: 128,
            learning_rate: 0.1,
            seed: 0,
            patience: Some(3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
    pub heldout_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub encoder: EncoderParams,
    pub classifier: ClassifierParams,
    pub log: Vec<EpochStats>,
}

fn embed_docs(
    docs: &[LabeledDoc],
    table: &EmbeddingTable,
    window: usize,
) -> Result<Vec<(Vec<EmbeddedSentence>, usize)>> {
    docs.iter()
        .map(|d| Ok((embed_sentences(&d.sentences, table, window)?, d.category)))
        .collect()
}

/// Fraction of documents whose most probable category is the gold one.
pub fn accuracy(
    encoder: &EncoderParams,
    classifier: &ClassifierParams,
    docs: &[(Vec<EmbeddedSentence>, usize)],
) -> Result<f64> {
    if docs.is_empty() {
        return Ok(0.0);
    }
    let mut correct = 0usize;
    for (inputs, cat) in docs {
        let (_, dist) = encode_and_classify(encoder, classifier, inputs)?;
        if dist.argmax() == *cat {
            correct += 1;
        }
    }
    Ok(correct as f64 / docs.len() as f64)
}

/// Train `W_alpha` and `W_beta` with mini-batch AdaGrad on mean cross-entropy.
///
/// Word embeddings are never updated. Documents are reshuffled every epoch.
/// With a validation set and `patience`, training stops once held-out
/// accuracy has not improved for `patience` epochs and the best parameters
/// seen are returned.
pub fn train_classifier(
    categories: &[String],
    docs: &[LabeledDoc],
    validation: Option<&[LabeledDoc]>,
    table: &EmbeddingTable,
    config: &ClassifierConfig,
) -> Result<TrainedClassifier> {
    let mut present: Vec<usize> = docs.iter().map(|d| d.category).collect();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        return Err(Error::Degenerate(format!(
            "classification corpus covers {} categor{}; need at least 2",
            present.len(),
            if present.len() == 1 { "y" } else { "ies" }
        )));
    }
    if let Some(&bad) = present.iter().find(|&&c| c >= categories.len()) {
        return Err(Error::InvalidArgument(format!(
            "category index {bad} out of range"
        )));
    }
    if config.batch == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }

    let mut rng = Rng::new(config.seed);
    let mut encoder = EncoderParams::init(config.features, table.dim(), config.window, &mut rng)?;
    let mut classifier = ClassifierParams::init(categories.to_vec(), config.features, &mut rng)?;
    let train = embed_docs(docs, table, config.window)?;
    let heldout = validation
        .map(|v| embed_docs(v, table, config.window))
        .transpose()?;

    let mut opt = AdaGrad::new(
        &[&encoder.w_alpha, &classifier.w_beta],
        config.learning_rate,
        DEFAULT_EPSILON,
    )?;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, EncoderParams, ClassifierParams)> = None;
    let mut since_best = 0usize;

    for epoch in 0..config.epochs {
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(config.batch) {
            let mut ga = Tensor2::zeros(encoder.w_alpha.rows(), encoder.w_alpha.cols());
            let mut gb = Tensor2::zeros(classifier.w_beta.rows(), classifier.w_beta.cols());
            let w = 1.0 / batch.len() as f64;
            for &i in batch {
                let (inputs, cat) = &train[i];
                let (loss, dist) = accumulate_doc_gradient(
                    &encoder,
                    &classifier,
                    inputs,
                    *cat,
                    w,
                    &mut ga,
                    &mut gb,
                )?;
                loss_sum += loss;
                if dist.argmax() == *cat {
                    correct += 1;
                }
            }
            opt.step(
                &mut [&mut encoder.w_alpha, &mut classifier.w_beta],
                &[ga, gb],
            )?;
        }
        let heldout_accuracy = heldout
            .as_ref()
            .map(|h| accuracy(&encoder, &classifier, h))
            .transpose()?;
        let stats = EpochStats {
            epoch: epoch + 1,
            mean_loss: loss_sum / train.len() as f64,
            train_accuracy: correct as f64 / train.len() as f64,
            heldout_accuracy,
        };
        log::info!(
            "classifier epoch {}: loss {:.4}, train acc {:.3}, held-out acc {}",
            stats.epoch,
            stats.mean_loss,
            stats.train_accuracy,
            heldout_accuracy.map_or("-".to_string(), |a| format!("{a:.3}"))
        );
        log.push(stats);

        if let Some(acc) = heldout_accuracy {
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, encoder.clone(), classifier.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if config.patience.is_some_and(|p| since_best >= p) {
                    log::info!("early stop after epoch {}", epoch + 1);
                    break;
                }
            }
        }
    }
    if let (Some(_), Some((_, e, c))) = (config.patience, best) {
        encoder = e;
        classifier = c;
    }
    Ok(TrainedClassifier {
        encoder,
        classifier,
        log,
    })
}
