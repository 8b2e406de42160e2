//! Fold assignment, classifier pre-training and cross-validated evaluation.

use rayon::prelude::*;

use super::report::{
    mean, ClassifierSummary, ClusterScore, EvalReport, FoldReport, ForcedCluster, ForcedReport,
    ModeResult, ModeSummary, REPORT_SCHEMA_VERSION,
};
use super::ExperimentConfig;
use crate::classifier::{train_classifier, TrainedClassifier};
use crate::error::{Error, Result};
use crate::numerics::Rng;
use crate::rouge::{reference_tokens, ReferenceSet};
use crate::selection::{greedy_select, SummaryResult};
use crate::summarizer::{pairwise_accuracy, train_summarizer, Mode, Model};
use crate::textdata::{ClassificationCorpus, ClusterRecord, EmbeddingTable, LabeledDoc};

/// Fold index of every cluster: a seeded permutation dealt round-robin.
pub fn assign_folds(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if n < folds {
        return Err(Error::InvalidArgument(format!(
            "{n} clusters cannot fill {folds} folds"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    Rng::new(seed).shuffle(&mut perm);
    let mut out = vec![0; n];
    for (slot, &idx) in perm.iter().enumerate() {
        out[idx] = slot % folds;
    }
    Ok(out)
}

/// Split clusters into folds with [`assign_folds`], keeping input order
/// within each fold.
pub fn split_folds(
    clusters: &[ClusterRecord],
    folds: usize,
    seed: u64,
) -> Result<Vec<Vec<ClusterRecord>>> {
    let assignment = assign_folds(clusters.len(), folds, seed)?;
    let mut out = vec![Vec::new(); folds];
    for (c, f) in clusters.iter().zip(assignment) {
        out[f].push(c.clone());
    }
    Ok(out)
}

/// A trained classifier and its held-out accuracy, if documents were held out.
#[derive(Debug, Clone)]
pub struct BaseModel {
    pub trained: TrainedClassifier,
    pub heldout_accuracy: Option<f64>,
}

impl BaseModel {
    pub fn model(&self) -> Result<Model> {
        Model::new(
            self.trained.encoder.clone(),
            Some(self.trained.classifier.clone()),
            None,
        )
    }
}

/// Train encoder and classifier, holding out `classifier_holdout` of the
/// documents (chosen by the run seed) for early stopping.
pub fn train_base(
    corpus: &ClassificationCorpus,
    table: &EmbeddingTable,
    config: &ExperimentConfig,
) -> Result<BaseModel> {
    check_dim(table, config)?;
    if !(0.0..1.0).contains(&config.classifier_holdout) {
        return Err(Error::InvalidArgument(
            "classifier_holdout must be in [0, 1)".into(),
        ));
    }
    let mut order: Vec<usize> = (0..corpus.docs.len()).collect();
    Rng::new(config.seed).fork(0x686f6c64).shuffle(&mut order);
    let n_hold = (config.classifier_holdout * corpus.docs.len() as f64).round() as usize;
    let (hold, train) = order.split_at(n_hold.min(order.len()));
    let pick = |idx: &[usize]| -> Vec<LabeledDoc> {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        idx.iter().map(|&i| corpus.docs[i].clone()).collect()
    };
    let train_docs = pick(train);
    let hold_docs = pick(hold);
    let validation = (!hold_docs.is_empty()).then_some(hold_docs.as_slice());
    let mut cc = config.classifier_config();
    if validation.is_none() {
        cc.patience = None;
    }
    let trained = train_classifier(&corpus.categories, &train_docs, validation, table, &cc)?;
    let heldout_accuracy = match validation {
        Some(v) => {
            let embedded = v
                .iter()
                .map(|d| {
                    Ok((
                        crate::classifier::embed_sentences(
                            &d.sentences,
                            table,
                            trained.encoder.window,
                        )?,
                        d.category,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Some(crate::classifier::accuracy(
                &trained.encoder,
                &trained.classifier,
                &embedded,
            )?)
        }
        None => None,
    };
    Ok(BaseModel {
        trained,
        heldout_accuracy,
    })
}

fn check_dim(table: &EmbeddingTable, config: &ExperimentConfig) -> Result<()> {
    if table.dim() != config.k {
        return Err(Error::InvalidArgument(format!(
            "embeddings have dimension {}, config expects k = {}",
            table.dim(),
            config.k
        )));
    }
    Ok(())
}

/// ROUGE-1 and ROUGE-2 references of one cluster.
pub struct ClusterReferences {
    pub rouge_1: ReferenceSet,
    pub rouge_2: ReferenceSet,
}

impl ClusterReferences {
    pub fn new(cluster: &ClusterRecord, config: &ExperimentConfig) -> Result<Self> {
        if cluster.references.is_empty() {
            return Err(Error::Degenerate(format!(
                "cluster {} has no references",
                cluster.id
            )));
        }
        let refs = reference_tokens(&cluster.references);
        Ok(Self {
            rouge_1: ReferenceSet::new(&refs, config.rouge_config(1))?,
            rouge_2: ReferenceSet::new(&refs, config.rouge_config(2))?,
        })
    }

    pub fn score(&self, cluster: &ClusterRecord, summary: &SummaryResult) -> (f64, f64) {
        let sentences: Vec<_> = cluster.sentences().collect();
        let tokens: Vec<&str> = summary
            .selected
            .iter()
            .flat_map(|&i| sentences[i].tokens.iter().map(String::as_str))
            .collect();
        (self.rouge_1.recall(&tokens), self.rouge_2.recall(&tokens))
    }
}

/// Rank, then greedily select under the cluster's budget.
pub fn summarize_cluster(
    model: &Model,
    cluster: &ClusterRecord,
    table: &EmbeddingTable,
    mode: Mode,
    force_category: Option<usize>,
    threshold: f64,
) -> Result<(Vec<f64>, SummaryResult)> {
    let scores = model.rank_sentences(cluster, table, mode, force_category)?;
    let sentences: Vec<_> = cluster.sentences().cloned().collect();
    let summary = greedy_select(&sentences, &scores, cluster.budget, threshold);
    Ok((scores, summary))
}

/// Trained artifacts of one cross-validation run.
#[derive(Debug, Clone)]
pub struct CrossvalOutput {
    pub report: EvalReport,
    pub base: Model,
    /// `(fold, mode, model)` in fold then mode order.
    pub models: Vec<(usize, Mode, Model)>,
}

/// Train the classifier once, then for every fold train each summarizer mode
/// on the other folds and evaluate it on the held-out one.
pub fn run_crossval(
    folds: &[Vec<ClusterRecord>],
    classification: &ClassificationCorpus,
    table: &EmbeddingTable,
    config: &ExperimentConfig,
) -> Result<CrossvalOutput> {
    check_folds(folds)?;
    let base = train_base(classification, table, config)?;
    run_crossval_with_base(folds, &base, table, config)
}

fn check_folds(folds: &[Vec<ClusterRecord>]) -> Result<()> {
    if folds.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {}",
            folds.len()
        )));
    }
    if let Some(i) = folds.iter().position(Vec::is_empty) {
        return Err(Error::InvalidArgument(format!("fold {i} is empty")));
    }
    Ok(())
}

/// [`run_crossval`] with an already trained classifier.
pub fn run_crossval_with_base(
    folds: &[Vec<ClusterRecord>],
    base: &BaseModel,
    table: &EmbeddingTable,
    config: &ExperimentConfig,
) -> Result<CrossvalOutput> {
    check_folds(folds)?;
    check_dim(table, config)?;
    if config.modes.is_empty() {
        return Err(Error::InvalidArgument("no modes to evaluate".into()));
    }
    let categories = base.trained.classifier.categories.clone();
    let mut fold_reports = Vec::with_capacity(folds.len());
    let mut models = Vec::new();
    let mut forced = Vec::new();

    for (f, test) in folds.iter().enumerate() {
        let train: Vec<ClusterRecord> = folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, c)| c.iter().cloned())
            .collect();
        let refs: Vec<(usize, ClusterReferences)> = test
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match ClusterReferences::new(c, config) {
                Ok(r) => Some((i, r)),
                Err(e) => {
                    log::warn!("fold {f}: {e}; not evaluated");
                    None
                }
            })
            .collect();
        if refs.is_empty() {
            return Err(Error::Degenerate(format!(
                "fold {f} has no clusters with usable references"
            )));
        }
        let skipped_eval: Vec<String> = {
            let kept: Vec<usize> = refs.iter().map(|(i, _)| *i).collect();
            (0..test.len())
                .filter(|i| !kept.contains(i))
                .map(|i| test[i].id.clone())
                .collect()
        };

        let mut mode_results = Vec::with_capacity(config.modes.len());
        let mut skipped_train = Vec::new();
        for &mode in &config.modes {
            let sc = config.summarizer_config(mode);
            let trained = train_summarizer(
                &train,
                table,
                Some((&base.trained.encoder, &base.trained.classifier)),
                &sc,
            )
            .map_err(|e| match e {
                Error::Degenerate(msg) => Error::Degenerate(format!("fold {f}: {msg}")),
                other => other,
            })?;
            if skipped_train.is_empty() {
                skipped_train = trained.skipped.clone();
            }
            let model = trained.model;

            let clusters = refs
                .par_iter()
                .map(|(i, r)| {
                    let c = &test[*i];
                    let (_, summary) = summarize_cluster(
                        &model,
                        c,
                        table,
                        mode,
                        None,
                        config.redundancy_threshold,
                    )?;
                    let (rouge_1, rouge_2) = r.score(c, &summary);
                    Ok(ClusterScore {
                        id: c.id.clone(),
                        rouge_1,
                        rouge_2,
                        selected: summary.selected,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let pairwise = match pairwise_accuracy(&model, mode, test, table, &sc, config.seed) {
                Ok(a) => Some(a),
                Err(Error::Degenerate(_)) => None,
                Err(e) => return Err(e),
            };

            if mode == Mode::TcSum && config.forced_category_eval {
                let rows = refs
                    .par_iter()
                    .filter_map(|(i, r)| {
                        let c = &test[*i];
                        let cat = c
                            .category
                            .as_deref()
                            .and_then(|n| categories.iter().position(|x| x == n))?;
                        Some((c, cat, r))
                    })
                    .map(|(c, cat, r)| {
                        let rouge_2 = (0..categories.len())
                            .map(|k| {
                                let (_, s) = summarize_cluster(
                                    &model,
                                    c,
                                    table,
                                    mode,
                                    Some(k),
                                    config.redundancy_threshold,
                                )?;
                                Ok(r.score(c, &s).1)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok(ForcedCluster {
                            fold: f,
                            id: c.id.clone(),
                            category: cat,
                            rouge_2,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                forced.extend(rows);
            }

            mode_results.push(ModeResult {
                mode,
                mean_rouge_1: mean(clusters.iter().map(|c| c.rouge_1)),
                mean_rouge_2: mean(clusters.iter().map(|c| c.rouge_2)),
                pairwise_accuracy: pairwise,
                clusters,
            });
            models.push((f, mode, model));
        }
        fold_reports.push(FoldReport {
            fold: f,
            train_clusters: train.len(),
            test_clusters: test.len(),
            skipped_train,
            skipped_eval,
            modes: mode_results,
        });
    }

    let overall = config
        .modes
        .iter()
        .map(|&mode| {
            let all: Vec<&ClusterScore> = fold_reports
                .iter()
                .flat_map(|f| {
                    f.modes
                        .iter()
                        .filter(|m| m.mode == mode)
                        .flat_map(|m| &m.clusters)
                })
                .collect();
            ModeSummary {
                mode,
                clusters: all.len(),
                mean_rouge_1: mean(all.iter().map(|c| c.rouge_1)),
                mean_rouge_2: mean(all.iter().map(|c| c.rouge_2)),
            }
        })
        .collect();

    let forced = (config.forced_category_eval && config.modes.contains(&Mode::TcSum)).then(|| {
        let wins = forced.iter().filter(|c| c.correct_wins()).count();
        ForcedReport {
            categories: categories.clone(),
            correct_wins_fraction: if forced.is_empty() {
                0.0
            } else {
                wins as f64 / forced.len() as f64
            },
            clusters: forced,
        }
    });

    let report = EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        crate_version: crate::VERSION.to_string(),
        seed: config.seed,
        config_hash: config.hash(),
        classifier: ClassifierSummary {
            categories,
            epochs_run: base.trained.log.len(),
            heldout_accuracy: base.heldout_accuracy,
        },
        folds: fold_reports,
        overall,
        forced,
    };
    Ok(CrossvalOutput {
        report,
        base: base.model()?,
        models,
    })
}

/// ROUGE-1 and ROUGE-2 recall of a tokenized candidate against raw references.
pub fn rouge_pair(
    candidate: &[String],
    references: &[String],
    config: &ExperimentConfig,
) -> Result<(f64, f64)> {
    let refs = reference_tokens(references);
    let r1 = ReferenceSet::new(&refs, config.rouge_config(1))?.recall(candidate);
    let r2 = ReferenceSet::new(&refs, config.rouge_config(2))?.recall(candidate);
    Ok((r1, r2))
}
