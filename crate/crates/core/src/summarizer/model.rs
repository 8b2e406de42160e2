use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{score_document, Mode, SummarizerParams};
use crate::classifier::{classify, embed_sentences, CategoryDistribution, ClassifierParams};
use crate::encoder::{encode_embedded_document, EncoderParams, INIT_SCALE};
use crate::error::{Error, Result};
use crate::numerics::{init_uniform, Rng, Tensor2};
use crate::textdata::{ClusterRecord, EmbeddingTable};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub k: usize,
    pub m: usize,
    pub h: usize,
}

/// Everything needed to rank sentences: encoder, optional classifier head
/// and optional summarizer head.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub encoder: EncoderParams,
    pub classifier: Option<ClassifierParams>,
    pub summarizer: Option<SummarizerParams>,
}

/// On-disk layout of a model file.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    dims: Dims,
    categories: Vec<String>,
    w_alpha: Tensor2,
    w_beta: Option<Tensor2>,
    mode: Option<Mode>,
    sub_matrices: Vec<Tensor2>,
}

impl Model {
    pub fn new(
        encoder: EncoderParams,
        classifier: Option<ClassifierParams>,
        summarizer: Option<SummarizerParams>,
    ) -> Result<Self> {
        let m = encoder.features();
        if let Some(c) = &classifier {
            if c.w_beta.cols() != m {
                return Err(Error::Model(format!(
                    "classifier expects {}-dim documents, encoder produces {m}",
                    c.w_beta.cols()
                )));
            }
        }
        if let Some(s) = &summarizer {
            if s.sub_matrices.iter().any(|w| w.rows() != m) {
                return Err(Error::Model(format!("sub-matrices are not {m}x{m}")));
            }
            match s.mode {
                Mode::TcSum => {
                    let c = classifier
                        .as_ref()
                        .ok_or_else(|| Error::Model("tcsum needs a classifier head".into()))?;
                    if c.num_categories() != s.sub_matrices.len() {
                        return Err(Error::Model(format!(
                            "{} sub-matrices for {} categories",
                            s.sub_matrices.len(),
                            c.num_categories()
                        )));
                    }
                }
                Mode::SingleT | Mode::EmSim if classifier.is_none() => {
                    return Err(Error::Model(format!(
                        "{} needs a classification-trained encoder",
                        s.mode
                    )));
                }
                _ => {}
            }
        }
        Ok(Self {
            encoder,
            classifier,
            summarizer,
        })
    }

    /// Every tensor drawn uniformly from `[-0.1, 0.1]`.
    pub fn random(mode: Mode, categories: Vec<String>, dims: Dims, seed: u64) -> Result<Self> {
        let mut rng = Rng::new(seed);
        let encoder = EncoderParams::init(dims.m, dims.k, dims.h, &mut rng)?;
        let classifier = match mode {
            Mode::NoTc => None,
            _ => Some(ClassifierParams::init(
                categories.clone(),
                dims.m,
                &mut rng,
            )?),
        };
        let count = match mode {
            Mode::TcSum => categories.len(),
            Mode::SingleT | Mode::NoTc => 1,
            Mode::EmSim => 0,
        };
        let subs = (0..count)
            .map(|_| init_uniform(dims.m, dims.m, INIT_SCALE, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            encoder,
            classifier,
            Some(SummarizerParams::new(mode, subs)?),
        )
    }

    pub fn dims(&self) -> Dims {
        Dims {
            k: self.encoder.word_dim(),
            m: self.encoder.features(),
            h: self.encoder.window,
        }
    }

    pub fn categories(&self) -> &[String] {
        self.classifier
            .as_ref()
            .map(|c| c.categories.as_slice())
            .unwrap_or(&[])
    }

    /// Mode of the summarizer head, if any.
    pub fn mode(&self) -> Option<Mode> {
        self.summarizer.as_ref().map(|s| s.mode)
    }

    /// Saliency of every sentence of the flattened cluster.
    ///
    /// `mode` must match the summarizer head, except EmSim which only needs
    /// the encoder. `force_category` replaces the predicted distribution with
    /// a one-hot vector (TCSum only).
    pub fn rank_sentences(
        &self,
        cluster: &ClusterRecord,
        table: &EmbeddingTable,
        mode: Mode,
        force_category: Option<usize>,
    ) -> Result<Vec<f64>> {
        if cluster.num_sentences() == 0 {
            return Err(Error::InvalidArgument(format!(
                "cluster {} is empty",
                cluster.id
            )));
        }
        if table.dim() != self.encoder.word_dim() {
            return Err(Error::Model(format!(
                "embeddings have dim {}, model expects {}",
                table.dim(),
                self.encoder.word_dim()
            )));
        }
        let params = match mode {
            Mode::EmSim => SummarizerParams::new(Mode::EmSim, vec![])?,
            _ => match &self.summarizer {
                Some(s) if s.mode == mode => s.clone(),
                other => {
                    return Err(Error::Model(format!(
                        "requested {mode} ranking from a {} model",
                        other
                            .as_ref()
                            .map_or("classifier-only".to_string(), |s| s.mode.to_string())
                    )))
                }
            },
        };
        if force_category.is_some() && mode != Mode::TcSum {
            return Err(Error::InvalidArgument(
                "forcing a category only applies to tcsum".into(),
            ));
        }
        let sentences: Vec<_> = cluster.sentences().cloned().collect();
        let inputs = embed_sentences(&sentences, table, self.encoder.window)?;
        let doc = encode_embedded_document(&inputs, &self.encoder)?;
        let weights = match mode {
            Mode::TcSum => {
                let classifier = self.classifier.as_ref().expect("validated in Model::new");
                match force_category {
                    Some(c) => CategoryDistribution::one_hot(classifier.num_categories(), c)?.probs,
                    None => classify(&doc.values, classifier)?.probs,
                }
            }
            _ => vec![1.0],
        };
        score_document(&doc, &params, &weights)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            dims: self.dims(),
            categories: self.categories().to_vec(),
            w_alpha: self.encoder.w_alpha.clone(),
            w_beta: self.classifier.as_ref().map(|c| c.w_beta.clone()),
            mode: self.mode(),
            sub_matrices: self
                .summarizer
                .as_ref()
                .map(|s| s.sub_matrices.clone())
                .unwrap_or_default(),
        };
        Ok(serde_json::to_string(&file)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported model format version {}",
                file.version
            )));
        }
        let Dims { k, m, h } = file.dims;
        if file.w_alpha.shape() != (m, h * k) {
            return Err(Error::Model(format!(
                "w_alpha is {:?}, dims say {m}x{}",
                file.w_alpha.shape(),
                h * k
            )));
        }
        let encoder = EncoderParams::new(file.w_alpha, h)?;
        let classifier = file
            .w_beta
            .map(|w| ClassifierParams::new(w, file.categories.clone()))
            .transpose()?;
        let summarizer = file
            .mode
            .map(|mode| SummarizerParams::new(mode, file.sub_matrices))
            .transpose()?;
        Model::new(encoder, classifier, summarizer)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Io { .. } => e,
            other => Error::Model(format!("{}: {other}", path.display())),
        })
    }
}
