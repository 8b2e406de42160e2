//! Category-adaptive summary embedding, cosine saliency and pairwise ranking.
//!
//! The transformation matrix is a mixture of per-category sub-matrices,
//! `W_gamma = Σ_i p_i · W_gamma^i`, weighted by the predicted category
//! distribution. The summary embedding is `tanh(W_gamma · v_D)` and each
//! sentence is scored by its cosine with it.

mod model;
mod style;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use model::{Dims, Model, MODEL_FORMAT_VERSION};
pub use style::style_similarity;
pub use train::{
    pairwise_accuracy, pairwise_objective, prepare_cluster, train_summarizer, PairObjective,
    PreparedCluster, SummarizerConfig, TrainedSummarizer,
};

use crate::classifier::CategoryDistribution;
use crate::encoder::DocEncoding;
use crate::error::{Error, Result};
use crate::numerics::{cosine, init_uniform, Rng, Tensor2};
use crate::rouge::SaliencyLabels;

/// Half-width of the noise added to the identity when initializing sub-matrices.
pub const SUB_MATRIX_NOISE: f64 = 0.01;

/// Ranking variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Category-weighted mixture of sub-matrices on a classification-trained encoder.
    TcSum,
    /// One transformation matrix on a classification-trained encoder.
    SingleT,
    /// One transformation matrix, encoder trained on summarization data only.
    NoTc,
    /// Cosine between sentence and document embeddings, no transformation.
    EmSim,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::TcSum, Mode::SingleT, Mode::NoTc, Mode::EmSim];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::TcSum => "tcsum",
            Mode::SingleT => "singlet",
            Mode::NoTc => "notc",
            Mode::EmSim => "emsim",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown mode {s:?}; expected one of tcsum, singlet, notc, emsim"
                ))
            })
    }
}

/// Transformation sub-matrices and the variant they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct SummarizerParams {
    pub mode: Mode,
    pub sub_matrices: Vec<Tensor2>,
}

impl SummarizerParams {
    pub fn new(mode: Mode, sub_matrices: Vec<Tensor2>) -> Result<Self> {
        let expected_ok = match mode {
            Mode::TcSum => !sub_matrices.is_empty(),
            Mode::SingleT | Mode::NoTc => sub_matrices.len() == 1,
            Mode::EmSim => sub_matrices.is_empty(),
        };
        if !expected_ok {
            return Err(Error::Model(format!(
                "{mode} cannot carry {} transformation matrices",
                sub_matrices.len()
            )));
        }
        if let Some(first) = sub_matrices.first() {
            let (r, c) = first.shape();
            if r != c || sub_matrices.iter().any(|s| s.shape() != (r, c)) {
                return Err(Error::Shape(
                    "sub-matrices must all be square and equal-sized".into(),
                ));
            }
        }
        Ok(Self { mode, sub_matrices })
    }

    /// Each sub-matrix is the identity plus uniform noise in
    /// `[-SUB_MATRIX_NOISE, SUB_MATRIX_NOISE]`, so an untrained summary
    /// embedding starts near `tanh(v_D)`.
    pub fn init(mode: Mode, count: usize, m: usize, rng: &mut Rng) -> Result<Self> {
        let count = match mode {
            Mode::TcSum => count,
            Mode::SingleT | Mode::NoTc => 1,
            Mode::EmSim => 0,
        };
        let subs = (0..count)
            .map(|_| {
                let mut w = init_uniform(m, m, SUB_MATRIX_NOISE, rng)?;
                w.axpy(1.0, &Tensor2::identity(m))?;
                Ok(w)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(mode, subs)
    }
}

/// `Σ_i v_c[i] · sub_matrices[i]`.
pub fn compose_transform(v_c: &CategoryDistribution, sub_matrices: &[Tensor2]) -> Result<Tensor2> {
    compose_weighted(&v_c.probs, sub_matrices)
}

pub(crate) fn compose_weighted(weights: &[f64], sub_matrices: &[Tensor2]) -> Result<Tensor2> {
    if weights.len() != sub_matrices.len() || sub_matrices.is_empty() {
        return Err(Error::Shape(format!(
            "{} mixture weights for {} sub-matrices",
            weights.len(),
            sub_matrices.len()
        )));
    }
    let (r, c) = sub_matrices[0].shape();
    let mut out = Tensor2::zeros(r, c);
    for (w, s) in weights.iter().zip(sub_matrices) {
        out.axpy(*w, s)?;
    }
    Ok(out)
}

/// `tanh(W_gamma · v_D)`.
pub fn summary_embedding(v_d: &[f64], w_gamma: &Tensor2) -> Result<Vec<f64>> {
    if w_gamma.rows() != v_d.len() {
        return Err(Error::Shape(format!(
            "summary embedding must have the document's dimension {}, W_gamma is {:?}",
            v_d.len(),
            w_gamma.shape()
        )));
    }
    Ok(w_gamma.matvec(v_d)?.into_iter().map(f64::tanh).collect())
}

/// Cosine between a sentence embedding and the summary embedding; 0 when
/// either is the zero vector.
pub fn saliency(v_s: &[f64], v_summary: &[f64]) -> f64 {
    match cosine(v_s, v_summary) {
        Some(c) => c,
        None => {
            log::warn!("zero vector in saliency; scoring 0");
            0.0
        }
    }
}

/// `max(0, omega − r_plus + r_minus)`.
pub fn pairwise_loss(r_plus: f64, r_minus: f64, omega: f64) -> f64 {
    (omega - r_plus + r_minus).max(0.0)
}

/// A high/low saliency sentence pair from one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainPair {
    pub cluster: usize,
    pub plus: usize,
    pub minus: usize,
    pub label_plus: f64,
    pub label_minus: f64,
}

fn band_size(pct: f64, n: usize) -> usize {
    ((pct * n as f64).round() as usize).clamp(1, n)
}

/// Draw `s+` uniformly from the top `hi_pct` of sentences by label and `s−`
/// from the bottom `lo_pct`, redrawing until `label_plus > label_minus`.
///
/// Label ties are ordered by sentence position. Errors if all labels are equal.
pub fn sample_pair(
    labels: &SaliencyLabels,
    cluster: usize,
    hi_pct: f64,
    lo_pct: f64,
    rng: &mut Rng,
) -> Result<TrainPair> {
    let n = labels.scores.len();
    if n < 2 || !labels.has_distinct() {
        return Err(Error::Degenerate(format!(
            "cluster {} has no two sentences with distinct labels",
            labels.cluster_id
        )));
    }
    if !(hi_pct > 0.0 && hi_pct <= 1.0 && lo_pct > 0.0 && lo_pct <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sampling fractions must be in (0, 1], got {hi_pct} and {lo_pct}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        labels.scores[b]
            .total_cmp(&labels.scores[a])
            .then(a.cmp(&b))
    });
    let top = &order[..band_size(hi_pct, n)];
    let bottom = &order[n - band_size(lo_pct, n)..];
    let s = &labels.scores;
    for _ in 0..1000 {
        let p = top[rng.below(top.len())];
        let q = bottom[rng.below(bottom.len())];
        if s[p] > s[q] {
            return Ok(TrainPair {
                cluster,
                plus: p,
                minus: q,
                label_plus: s[p],
                label_minus: s[q],
            });
        }
    }
    // Bands dominated by ties: pick uniformly among the valid pairs instead.
    let valid: Vec<(usize, usize)> = top
        .iter()
        .flat_map(|&p| bottom.iter().map(move |&q| (p, q)))
        .filter(|&(p, q)| s[p] > s[q])
        .collect();
    let (p, q) = valid[rng.below(valid.len())];
    Ok(TrainPair {
        cluster,
        plus: p,
        minus: q,
        label_plus: s[p],
        label_minus: s[q],
    })
}

/// Saliency of every sentence of an encoded document under a given mode.
///
/// `weights` are the sub-matrix mixture weights (the category distribution for
/// TCSum, `[1.0]` for single-matrix modes) and are ignored for EmSim.
pub fn score_document(
    doc: &DocEncoding,
    params: &SummarizerParams,
    weights: &[f64],
) -> Result<Vec<f64>> {
    let target = match params.mode {
        Mode::EmSim => doc.values.clone(),
        _ => {
            let w = compose_weighted(weights, &params.sub_matrices)?;
            summary_embedding(&doc.values, &w)?
        }
    };
    Ok(doc
        .sentences
        .iter()
        .map(|s| saliency(&s.values, &target))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(p: &[f64]) -> CategoryDistribution {
        CategoryDistribution { probs: p.to_vec() }
    }

    #[test]
    fn one_hot_selects_sub_matrix() {
        let mut rng = Rng::new(1);
        let subs: Vec<Tensor2> = (0..3)
            .map(|_| crate::numerics::init_uniform(4, 4, 1.0, &mut rng).unwrap())
            .collect();
        let w = compose_transform(&dist(&[0.0, 1.0, 0.0]), &subs).unwrap();
        assert_eq!(w, subs[1]);
    }

    #[test]
    fn identical_sub_matrices_collapse() {
        let m = Tensor2::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        let w =
            compose_transform(&dist(&[0.2, 0.3, 0.5]), &[m.clone(), m.clone(), m.clone()]).unwrap();
        assert!(w.max_abs_diff(&m).unwrap() < 1e-15);
    }

    #[test]
    fn half_identity() {
        let w = compose_transform(
            &dist(&[0.5, 0.5]),
            &[Tensor2::identity(3), Tensor2::zeros(3, 3)],
        )
        .unwrap();
        assert_eq!(w, Tensor2::identity(3).scaled(0.5));
        assert!(
            compose_transform(&dist(&[1.0]), &[Tensor2::identity(3), Tensor2::zeros(3, 3)])
                .is_err()
        );
    }

    #[test]
    fn summary_embedding_values() {
        let zero = summary_embedding(&[0.5, 0.1, -0.3], &Tensor2::zeros(3, 3)).unwrap();
        assert_eq!(zero, vec![0.0; 3]);
        let v = summary_embedding(&[0.5, 0.0, 0.0], &Tensor2::identity(3)).unwrap();
        assert!((v[0] - 0.462117).abs() < 1e-6);
        assert_eq!(&v[1..], &[0.0, 0.0]);
        assert!(summary_embedding(&[0.5, 0.0], &Tensor2::identity(3)).is_err());
    }

    #[test]
    fn saliency_cases() {
        assert!((saliency(&[0.3, -0.4], &[0.3, -0.4]) - 1.0).abs() < 1e-15);
        assert_eq!(saliency(&[1.0, 0.0], &[0.0, 2.0]), 0.0);
        assert!((saliency(&[0.3, -0.4], &[-0.3, 0.4]) + 1.0).abs() < 1e-15);
        assert_eq!(saliency(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
    }

    #[test]
    fn hinge_cases() {
        assert_eq!(pairwise_loss(0.5, 0.2, 0.1), 0.0);
        assert_eq!(pairwise_loss(0.3, 0.3, 0.1), 0.1);
        assert_eq!(pairwise_loss(0.2, 0.5, 0.1), 0.4);
    }

    fn labels(s: &[f64]) -> SaliencyLabels {
        SaliencyLabels {
            cluster_id: "c".into(),
            scores: s.to_vec(),
        }
    }

    #[test]
    fn two_sentence_pair_is_unique() {
        let mut rng = Rng::new(0);
        for (hi, lo) in [(0.1, 0.1), (0.5, 0.5), (1.0, 1.0)] {
            for _ in 0..20 {
                let p = sample_pair(&labels(&[0.9, 0.1]), 0, hi, lo, &mut rng).unwrap();
                assert_eq!((p.plus, p.minus), (0, 1));
            }
        }
    }

    #[test]
    fn equal_labels_rejected() {
        let mut rng = Rng::new(0);
        assert!(sample_pair(&labels(&[0.2, 0.2, 0.2]), 0, 0.3, 0.3, &mut rng).is_err());
        assert!(sample_pair(&labels(&[0.2]), 0, 0.3, 0.3, &mut rng).is_err());
    }

    #[test]
    fn sampler_respects_bands() {
        let scores = [0.05, 0.9, 0.3, 0.0, 0.7, 0.15, 0.5, 0.8, 0.2, 0.4];
        let mut rng = Rng::new(11);
        let top = [1, 7, 4];
        let bottom = [3, 0, 5];
        for _ in 0..1000 {
            let p = sample_pair(&labels(&scores), 0, 0.3, 0.3, &mut rng).unwrap();
            assert!(top.contains(&p.plus) && bottom.contains(&p.minus), "{p:?}");
            assert!(p.label_plus > p.label_minus);
        }
    }

    #[test]
    fn tied_bands_fall_back_to_valid_pairs() {
        let scores = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.4];
        let mut rng = Rng::new(2);
        for _ in 0..50 {
            let p = sample_pair(&labels(&scores), 0, 0.5, 0.5, &mut rng).unwrap();
            assert_eq!(p.plus, 9);
        }
    }

    #[test]
    fn mode_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.as_str().parse::<Mode>().unwrap(), m);
        }
        assert!("bogus".parse::<Mode>().is_err());
    }

    #[test]
    fn params_shape_rules() {
        assert!(SummarizerParams::new(Mode::SingleT, vec![]).is_err());
        assert!(SummarizerParams::new(Mode::EmSim, vec![Tensor2::identity(2)]).is_err());
        assert!(SummarizerParams::new(Mode::TcSum, vec![Tensor2::zeros(2, 3)]).is_err());
        assert!(SummarizerParams::new(Mode::NoTc, vec![Tensor2::identity(2)]).is_ok());
    }
}
