use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{compose_weighted, pairwise_loss, saliency, sample_pair, summary_embedding};
use super::{Mode, Model, SummarizerParams, TrainPair};
use crate::classifier::{classify, embed_sentences, ClassifierParams};
use crate::encoder::{
    encode_embedded_document, encoder_backward, DocEncoding, EmbeddedSentence, EncoderParams,
};
use crate::error::{Error, Result};
use crate::numerics::{cosine_grad, norm, AdaGrad, Rng, Tensor2, DEFAULT_EPSILON};
use crate::rouge::{label_saliency, RougeConfig, SaliencyLabels};
use crate::textdata::{ClusterRecord, EmbeddingTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarizerConfig {
    pub mode: Mode,
    pub pairs_per_cluster: usize,
    pub epochs: usize,
    pub omega: f64,
    pub learning_rate: f64,
    pub batch: usize,
    pub seed: u64,
    pub hi_pct: f64,
    pub lo_pct: f64,
    pub rouge: RougeConfig,
    /// Encoder shape, used only when the encoder is trained from scratch (NoTC).
    pub features: usize,
    pub window: usize,
}

impl Default for SummarizerConfig {
    fn default() -> Self {
        Self {
            mode: Mode::TcSum,
            pairs_per_cluster: 64,
            epochs: 10,
            omega: 0.1,
            learning_rate: 0.1,
            batch: 128,
            seed: 0,
            hi_pct: 0.3,
            lo_pct: 0.3,
            rouge: RougeConfig::new(2),
            features: 50,
            window: 2,
        }
    }
}

/// A cluster's embedded sentences plus whatever stays fixed during training.
#[derive(Debug, Clone)]
pub struct PreparedCluster {
    pub inputs: Vec<EmbeddedSentence>,
    /// Cached encoding when the encoder is frozen.
    pub doc: Option<DocEncoding>,
    /// Sub-matrix mixture weights: the predicted category distribution for
    /// TCSum, `[1.0]` otherwise. Treated as constants.
    pub weights: Vec<f64>,
}

pub fn prepare_cluster(
    cluster: &ClusterRecord,
    table: &EmbeddingTable,
    encoder: &EncoderParams,
    classifier: Option<&ClassifierParams>,
    mode: Mode,
    cache: bool,
) -> Result<PreparedCluster> {
    let sentences: Vec<_> = cluster.sentences().cloned().collect();
    let inputs = embed_sentences(&sentences, table, encoder.window)?;
    let doc = encode_embedded_document(&inputs, encoder)?;
    let weights = match mode {
        Mode::TcSum => {
            let c =
                classifier.ok_or_else(|| Error::Model("tcsum needs a classifier head".into()))?;
            classify(&doc.values, c)?.probs
        }
        _ => vec![1.0],
    };
    Ok(PreparedCluster {
        inputs,
        doc: cache.then_some(doc),
        weights,
    })
}

/// Mean pairwise hinge loss over a batch and its gradients.
#[derive(Debug, Clone)]
pub struct PairObjective {
    pub loss: f64,
    pub sub_grads: Vec<Tensor2>,
    pub encoder_grad: Option<Tensor2>,
}

/// Mean of `max(0, omega − r+ + r−)` over `pairs`.
///
/// Gradients reach each sub-matrix scaled by its mixture weight. With
/// `train_encoder` the gradient also flows through both the summary embedding
/// and the sentence embeddings into `W_alpha`.
pub fn pairwise_objective(
    encoder: &EncoderParams,
    sub_matrices: &[Tensor2],
    clusters: &[PreparedCluster],
    pairs: &[TrainPair],
    omega: f64,
    train_encoder: bool,
) -> Result<PairObjective> {
    let m = encoder.features();
    let mut sub_grads: Vec<Tensor2> = sub_matrices
        .iter()
        .map(|s| Tensor2::zeros(s.rows(), s.cols()))
        .collect();
    let mut encoder_grad =
        train_encoder.then(|| Tensor2::zeros(encoder.w_alpha.rows(), encoder.w_alpha.cols()));
    if pairs.is_empty() {
        return Ok(PairObjective {
            loss: 0.0,
            sub_grads,
            encoder_grad,
        });
    }
    let w = 1.0 / pairs.len() as f64;
    let mut groups: BTreeMap<usize, Vec<&TrainPair>> = BTreeMap::new();
    for p in pairs {
        groups.entry(p.cluster).or_default().push(p);
    }

    let mut loss = 0.0;
    for (ci, group) in groups {
        let cluster = clusters
            .get(ci)
            .ok_or_else(|| Error::InvalidArgument(format!("pair refers to cluster {ci}")))?;
        let fresh;
        let doc = match (&cluster.doc, train_encoder) {
            (Some(d), false) => d,
            _ => {
                fresh = encode_embedded_document(&cluster.inputs, encoder)?;
                &fresh
            }
        };
        let w_gamma = compose_weighted(&cluster.weights, sub_matrices)?;
        let v_summary = summary_embedding(&doc.values, &w_gamma)?;
        let summary_ok = norm(&v_summary) > 0.0;
        let mut d_summary = vec![0.0; m];
        let mut d_sentences = train_encoder.then(|| vec![vec![0.0; m]; doc.sentences.len()]);

        for pair in group {
            let n = doc.sentences.len();
            if pair.plus >= n || pair.minus >= n {
                return Err(Error::InvalidArgument(format!(
                    "pair {pair:?} out of range"
                )));
            }
            let sp = &doc.sentences[pair.plus].values;
            let sm = &doc.sentences[pair.minus].values;
            let r_plus = saliency(sp, &v_summary);
            let r_minus = saliency(sm, &v_summary);
            let l = pairwise_loss(r_plus, r_minus, omega);
            loss += w * l;
            if l <= 0.0 || !summary_ok {
                continue;
            }
            // d loss / d r+ = -1, d loss / d r- = +1
            for (idx, v_s, sign) in [(pair.plus, sp, -w), (pair.minus, sm, w)] {
                if norm(v_s) == 0.0 {
                    continue;
                }
                let (g_sentence, g_summary) = cosine_grad(v_s, &v_summary);
                for (d, g) in d_summary.iter_mut().zip(&g_summary) {
                    *d += sign * g;
                }
                if let Some(ds) = d_sentences.as_mut() {
                    for (d, g) in ds[idx].iter_mut().zip(&g_sentence) {
                        *d += sign * g;
                    }
                }
            }
        }

        let d_pre: Vec<f64> = d_summary
            .iter()
            .zip(&v_summary)
            .map(|(d, s)| d * (1.0 - s * s))
            .collect();
        for (g, mix) in sub_grads.iter_mut().zip(&cluster.weights) {
            g.add_outer(*mix, &d_pre, &doc.values);
        }
        if let Some(eg) = encoder_grad.as_mut() {
            let d_doc = w_gamma.matvec_t(&d_pre)?;
            encoder_backward(
                encoder,
                &cluster.inputs,
                doc,
                Some(&d_doc),
                d_sentences.as_deref(),
                eg,
            )?;
        }
    }
    Ok(PairObjective {
        loss,
        sub_grads,
        encoder_grad,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarizerEpoch {
    pub epoch: usize,
    pub mean_loss: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone)]
pub struct TrainedSummarizer {
    pub model: Model,
    pub log: Vec<SummarizerEpoch>,
    /// Ids of clusters left out for lack of references or distinct labels.
    pub skipped: Vec<String>,
}

/// Saliency labels for the clusters usable in pairwise training.
fn usable_labels(
    clusters: &[ClusterRecord],
    rouge: &RougeConfig,
) -> (Vec<(usize, SaliencyLabels)>, Vec<String>) {
    let mut usable = Vec::new();
    let mut skipped = Vec::new();
    for (i, c) in clusters.iter().enumerate() {
        match label_saliency(c, rouge) {
            Ok(l) if l.has_distinct() => usable.push((i, l)),
            Ok(_) => {
                log::warn!("cluster {}: all sentence labels equal, skipped", c.id);
                skipped.push(c.id.clone());
            }
            Err(e) => {
                log::warn!("cluster {}: {e}, skipped", c.id);
                skipped.push(c.id.clone());
            }
        }
    }
    (usable, skipped)
}

/// Train the transformation matrices by pairwise ranking.
///
/// For TCSum and SingleT the classification-trained encoder and classifier in
/// `base` stay frozen and only sub-matrices are updated. NoTC trains its own
/// encoder jointly, starting from random weights. EmSim has nothing to train.
pub fn train_summarizer(
    clusters: &[ClusterRecord],
    table: &EmbeddingTable,
    base: Option<(&EncoderParams, &ClassifierParams)>,
    config: &SummarizerConfig,
) -> Result<TrainedSummarizer> {
    if config.batch == 0 {
        return Err(Error::InvalidArgument("batch size must be positive".into()));
    }
    let mode = config.mode;
    let base = match (mode, base) {
        (Mode::NoTc, _) => None,
        (_, Some(b)) => Some(b),
        (_, None) => {
            return Err(Error::Model(format!(
                "{mode} needs a trained encoder and classifier"
            )))
        }
    };
    if mode == Mode::EmSim {
        let (e, c) = base.expect("checked above");
        let model = Model::new(
            e.clone(),
            Some(c.clone()),
            Some(SummarizerParams::new(Mode::EmSim, vec![])?),
        )?;
        return Ok(TrainedSummarizer {
            model,
            log: vec![],
            skipped: vec![],
        });
    }

    let (usable, skipped) = usable_labels(clusters, &config.rouge);
    if usable.is_empty() {
        return Err(Error::Degenerate(
            "no cluster has references and distinct sentence labels".into(),
        ));
    }

    let mut rng = Rng::new(config.seed);
    let mut encoder = match base {
        Some((e, _)) => e.clone(),
        None => EncoderParams::init(config.features, table.dim(), config.window, &mut rng)?,
    };
    if encoder.word_dim() != table.dim() {
        return Err(Error::Model(format!(
            "encoder expects {}-dim word vectors, embeddings have {}",
            encoder.word_dim(),
            table.dim()
        )));
    }
    let classifier = base.map(|(_, c)| c.clone());
    let count = classifier
        .as_ref()
        .map_or(1, ClassifierParams::num_categories);
    let mut params = SummarizerParams::init(mode, count, encoder.features(), &mut rng)?;
    let train_encoder = mode == Mode::NoTc;

    let prepared = usable
        .iter()
        .map(|(i, _)| {
            prepare_cluster(
                &clusters[*i],
                table,
                &encoder,
                classifier.as_ref(),
                mode,
                !train_encoder,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let mut opt = {
        let mut shapes: Vec<&Tensor2> = params.sub_matrices.iter().collect();
        if train_encoder {
            shapes.push(&encoder.w_alpha);
        }
        AdaGrad::new(&shapes, config.learning_rate, DEFAULT_EPSILON)?
    };

    let mut order: Vec<usize> = (0..usable.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        rng.shuffle(&mut order);
        let mut pairs = Vec::with_capacity(order.len() * config.pairs_per_cluster);
        for &u in &order {
            for _ in 0..config.pairs_per_cluster {
                pairs.push(sample_pair(
                    &usable[u].1,
                    u,
                    config.hi_pct,
                    config.lo_pct,
                    &mut rng,
                )?);
            }
        }
        let mut loss_sum = 0.0;
        for batch in pairs.chunks(config.batch) {
            let obj = pairwise_objective(
                &encoder,
                &params.sub_matrices,
                &prepared,
                batch,
                config.omega,
                train_encoder,
            )?;
            loss_sum += obj.loss * batch.len() as f64;
            let mut grads = obj.sub_grads;
            let mut targets: Vec<&mut Tensor2> = params.sub_matrices.iter_mut().collect();
            if let Some(eg) = obj.encoder_grad {
                grads.push(eg);
                targets.push(&mut encoder.w_alpha);
            }
            opt.step(&mut targets, &grads)?;
        }
        let stats = SummarizerEpoch {
            epoch: epoch + 1,
            mean_loss: if pairs.is_empty() {
                0.0
            } else {
                loss_sum / pairs.len() as f64
            },
            pairs: pairs.len(),
        };
        log::info!(
            "{mode} epoch {}: mean hinge loss {:.4} over {} pairs",
            stats.epoch,
            stats.mean_loss,
            stats.pairs
        );
        log.push(stats);
    }

    let model = Model::new(encoder, classifier, Some(params))?;
    Ok(TrainedSummarizer {
        model,
        log,
        skipped,
    })
}

/// Fraction of sampled high/low pairs the model orders correctly (`r+ > r−`).
pub fn pairwise_accuracy(
    model: &Model,
    mode: Mode,
    clusters: &[ClusterRecord],
    table: &EmbeddingTable,
    config: &SummarizerConfig,
    seed: u64,
) -> Result<f64> {
    let (usable, _) = usable_labels(clusters, &config.rouge);
    let mut rng = Rng::new(seed);
    let mut correct = 0usize;
    let mut total = 0usize;
    for (i, labels) in &usable {
        let scores = model.rank_sentences(&clusters[*i], table, mode, None)?;
        for _ in 0..config.pairs_per_cluster {
            let p = sample_pair(labels, *i, config.hi_pct, config.lo_pct, &mut rng)?;
            total += 1;
            if scores[p.plus] > scores[p.minus] {
                correct += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::Degenerate("no labeled pairs to evaluate".into()));
    }
    Ok(correct as f64 / total as f64)
}
