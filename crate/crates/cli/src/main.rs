//! Command-line front end: corpus generation, training, summarization,
//! ROUGE scoring, cross-validation and style analysis.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use tcsum::classifier::{accuracy, embed_sentences};
use tcsum::harness::{
    rouge_pair, run_crossval, split_folds, summarize_cluster, write_crossval, ExperimentConfig,
    Manifest, StyleReport,
};
use tcsum::summarizer::{style_similarity, train_summarizer, Mode, Model};
use tcsum::textdata::{
    load_embeddings, read_classification_corpus, read_cluster_corpus, synth_corpus, tokenize,
    write_classification_corpus, write_cluster_corpus, ClusterRecord,
};

const CONFIG_HELP: &str = "\
CONFIG FILE
  Flat `key = value` lines; `#` starts a comment. Keys:
    classification, clusters, embeddings, out, fold_files (comma list)
    k, m, h, omega, learning_rate, batch
    classifier_epochs, classifier_patience, classifier_holdout
    summarizer_epochs, pairs_per_cluster, hi_pct, lo_pct
    redundancy_threshold, rouge_stem, mode, modes (comma list), seed, folds
    forced_category_eval
    synth_categories, synth_docs_per_cat, synth_sents_per_doc, synth_vocab_per_cat,
    synth_style_signal, synth_clusters_per_cat, synth_docs_per_cluster
  Command-line flags override the file.

EXIT STATUS
  0 success, 1 usage error, 2 data or model error";

#[derive(Parser)]
#[command(name = "tcsum", version, about = "Category-adaptive extractive multi-document summarization", after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Configuration file (key = value lines).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Only log warnings and errors.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic classification corpus, cluster corpus and embeddings.
    Synth {
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Style signal in [0, 1].
        #[arg(long)]
        style_signal: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Train the sentence encoder and category classifier.
    TrainClassifier {
        #[arg(long)]
        classification: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Where to write the classifier model.
        #[arg(long)]
        model_out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train a summarizer on a cluster corpus.
    TrainSummarizer {
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Classifier model from train-classifier (all modes except notc).
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        mode: Option<Mode>,
        /// Where to write the summarizer model.
        #[arg(long)]
        model_out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rank and select sentences for each cluster; prints one JSON object per cluster.
    Summarize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// tcsum, singlet, notc or emsim. Defaults to the model's own mode.
        #[arg(long)]
        mode: Option<Mode>,
        /// Replace the predicted category distribution with this category (tcsum).
        #[arg(long, value_name = "NAME")]
        force_category: Option<String>,
        /// Only summarize the cluster with this id.
        #[arg(long, value_name = "ID")]
        cluster: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// ROUGE-1 and ROUGE-2 recall of a candidate text against reference texts.
    Rouge {
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long = "reference", required = true)]
        references: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validate every configured mode and write reports and models.
    Crossval {
        /// Generate a synthetic corpus instead of reading one.
        #[arg(long)]
        synth: bool,
        #[arg(long)]
        classification: Option<PathBuf>,
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Pairwise similarity of a TCSum model's category sub-matrices.
    StyleAnalysis {
        #[arg(long)]
        model: PathBuf,
        /// Also write style.json and style.txt here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print JSON instead of the text table.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Data(tcsum::Error),
}

impl From<tcsum::Error> for Failure {
    fn from(e: tcsum::Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

fn load_config(common: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    for s in &common.set {
        cfg.apply_override(s)
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(seed) = common.seed {
        cfg.apply_override(&format!("seed={seed}"))?;
    }
    Ok(cfg)
}

fn override_path(cfg: &mut ExperimentConfig, key: &str, value: &Option<PathBuf>) -> CliResult<()> {
    if let Some(p) = value {
        cfg.apply_override(&format!("{key}={}", p.display()))?;
    }
    Ok(())
}

fn required<'a>(value: &'a Option<PathBuf>, what: &str) -> CliResult<&'a Path> {
    match value {
        Some(p) => Ok(p),
        None => usage(format!(
            "no {what} given: pass --{what} or set `{what}` in the config file"
        )),
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| tcsum::Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| {
        Failure::Data(tcsum::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Failure::Data(tcsum::Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })
}

fn to_json(value: &serde_json::Value) -> CliResult<String> {
    serde_json::to_string(value).map_err(|e| Failure::Data(e.into()))
}

/// Write a synthetic corpus under `dir` and record it in `manifest`.
fn write_synth(
    dir: &Path,
    cfg: &ExperimentConfig,
    manifest: &mut Manifest,
) -> CliResult<(PathBuf, PathBuf, PathBuf)> {
    let corpus = synth_corpus(cfg.seed, &cfg.synth_config())?;
    create_dir(dir)?;
    let cls = dir.join("classification.jsonl");
    let clu = dir.join("clusters.jsonl");
    let emb = dir.join("embeddings.txt");
    write_classification_corpus(&cls, &corpus.classification)?;
    write_cluster_corpus(&clu, &corpus.clusters.clusters)?;
    corpus.embeddings.save(&emb)?;
    manifest.add_output_file("classification", &cls)?;
    manifest.add_output_file("clusters", &clu)?;
    manifest.add_output_file("embeddings", &emb)?;
    Ok((cls, clu, emb))
}

fn cmd_synth(out: &Option<PathBuf>, style_signal: Option<f64>, common: &Common) -> CliResult<()> {
    let mut cfg = load_config(common)?;
    override_path(&mut cfg, "out", out)?;
    if let Some(s) = style_signal {
        cfg.apply_override(&format!("synth_style_signal={s}"))?;
    }
    let dir = required(&cfg.out, "out")?.to_path_buf();
    let start = Instant::now();
    let mut manifest = Manifest::new("synth", &cfg);
    write_synth(&dir, &cfg, &mut manifest)?;
    manifest.elapsed_seconds = start.elapsed().as_secs_f64();
    manifest.save(&dir.join("manifest.json"))?;
    println!("wrote synthetic corpus to {}", dir.display());
    Ok(())
}

fn cmd_train_classifier(
    classification: &Option<PathBuf>,
    embeddings: &Option<PathBuf>,
    model_out: &Path,
    common: &Common,
) -> CliResult<()> {
    let mut cfg = load_config(common)?;
    override_path(&mut cfg, "classification", classification)?;
    override_path(&mut cfg, "embeddings", embeddings)?;
    let cls_path = required(&cfg.classification, "classification")?;
    let emb_path = required(&cfg.embeddings, "embeddings")?;
    let corpus = read_classification_corpus(cls_path)?;
    let table = load_embeddings(emb_path)?;
    let base = tcsum::harness::train_base(&corpus, &table, &cfg)?;
    let model = base.model()?;
    model.save(model_out)?;
    let train_acc = {
        let docs = corpus
            .docs
            .iter()
            .map(|d| {
                Ok((
                    embed_sentences(&d.sentences, &table, model.encoder.window)?,
                    d.category,
                ))
            })
            .collect::<tcsum::Result<Vec<_>>>()?;
        accuracy(&model.encoder, &base.trained.classifier, &docs)?
    };
    println!(
        "{}",
        to_json(&serde_json::json!({
            "model": model_out,
            "epochs": base.trained.log.len(),
            "corpus_accuracy": train_acc,
            "heldout_accuracy": base.heldout_accuracy,
        }))?
    );
    Ok(())
}

fn cmd_train_summarizer(
    clusters: &Option<PathBuf>,
    embeddings: &Option<PathBuf>,
    base: &Option<PathBuf>,
    mode: Option<Mode>,
    model_out: &Path,
    common: &Common,
) -> CliResult<()> {
    let mut cfg = load_config(common)?;
    override_path(&mut cfg, "clusters", clusters)?;
    override_path(&mut cfg, "embeddings", embeddings)?;
    if let Some(m) = mode {
        cfg.apply_override(&format!("mode={m}"))?;
    }
    let corpus = read_cluster_corpus(required(&cfg.clusters, "clusters")?)?;
    let table = load_embeddings(required(&cfg.embeddings, "embeddings")?)?;
    let base_model = match (cfg.mode, base) {
        (Mode::NoTc, _) => None,
        (_, Some(p)) => Some(Model::load(p)?),
        (m, None) => return usage(format!("--base is required for {m}")),
    };
    let base_parts = match &base_model {
        Some(m) => {
            let c = m
                .classifier
                .as_ref()
                .ok_or_else(|| tcsum::Error::Model("base model has no classifier head".into()))?;
            Some((&m.encoder, c))
        }
        None => None,
    };
    let trained = train_summarizer(
        &corpus.clusters,
        &table,
        base_parts,
        &cfg.summarizer_config(cfg.mode),
    )?;
    trained.model.save(model_out)?;
    println!(
        "{}",
        to_json(&serde_json::json!({
            "model": model_out,
            "mode": cfg.mode,
            "epochs": trained.log,
            "skipped": trained.skipped,
        }))?
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_summarize(
    model_path: &Path,
    clusters: &Option<PathBuf>,
    embeddings: &Option<PathBuf>,
    mode: Option<Mode>,
    force_category: &Option<String>,
    only: &Option<String>,
    common: &Common,
) -> CliResult<()> {
    let mut cfg = load_config(common)?;
    override_path(&mut cfg, "clusters", clusters)?;
    override_path(&mut cfg, "embeddings", embeddings)?;
    let clusters_path = required(&cfg.clusters, "clusters")?.to_path_buf();
    let emb_path = required(&cfg.embeddings, "embeddings")?.to_path_buf();
    let model = Model::load(model_path)?;
    let mode = match mode.or(model.mode()) {
        Some(m) => m,
        None => return usage("the model has no summarizer head; pass --mode emsim"),
    };
    let forced = match force_category {
        Some(name) => Some(
            model
                .classifier
                .as_ref()
                .and_then(|c| c.category_index(name))
                .ok_or_else(|| {
                    tcsum::Error::Model(format!(
                        "category {name:?} is not one of the model's categories {:?}",
                        model.categories()
                    ))
                })?,
        ),
        None => None,
    };
    let corpus = read_cluster_corpus(&clusters_path)?;
    let table = load_embeddings(&emb_path)?;
    let selected: Vec<&ClusterRecord> = corpus
        .clusters
        .iter()
        .filter(|c| only.as_ref().is_none_or(|id| &c.id == id))
        .collect();
    if let (Some(id), true) = (only, selected.is_empty()) {
        return Err(tcsum::Error::InvalidArgument(format!("no cluster with id {id:?}")).into());
    }
    for c in selected {
        let (scores, summary) =
            summarize_cluster(&model, c, &table, mode, forced, cfg.redundancy_threshold)?;
        let mut ranking: Vec<usize> = (0..scores.len()).collect();
        ranking.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        println!(
            "{}",
            to_json(&serde_json::json!({
                "id": c.id,
                "mode": mode,
                "force_category": force_category,
                "scores": scores,
                "ranking": ranking,
                "selected": summary.selected,
                "summary": summary.text,
            }))?
        );
    }
    Ok(())
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| {
        Failure::Data(tcsum::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn cmd_rouge(candidate: &Path, references: &[PathBuf], common: &Common) -> CliResult<()> {
    let cfg = load_config(common)?;
    let cand: Vec<String> = tokenize(&read_text(candidate)?)
        .into_iter()
        .flat_map(|s| s.tokens)
        .collect();
    let refs = references
        .iter()
        .map(|p| read_text(p))
        .collect::<CliResult<Vec<_>>>()?;
    let (r1, r2) = rouge_pair(&cand, &refs, &cfg)?;
    println!(
        "{}",
        to_json(&serde_json::json!({ "rouge_1": r1, "rouge_2": r2 }))?
    );
    Ok(())
}

fn cmd_crossval(synth: bool, paths: [&Option<PathBuf>; 4], common: &Common) -> CliResult<()> {
    let mut cfg = load_config(common)?;
    for (key, value) in ["classification", "clusters", "embeddings", "out"]
        .iter()
        .zip(paths)
    {
        override_path(&mut cfg, key, value)?;
    }
    let out = required(&cfg.out, "out")?.to_path_buf();
    let start = Instant::now();
    let mut manifest = Manifest::new("crossval", &cfg);
    create_dir(&out)?;

    if synth {
        let (cls, clu, emb) = write_synth(&out.join("data"), &cfg, &mut manifest)?;
        manifest.outputs.clear();
        cfg.classification = Some(cls);
        cfg.clusters = Some(clu);
        cfg.embeddings = Some(emb);
    }
    let cls_path = required(&cfg.classification, "classification")?.to_path_buf();
    let emb_path = required(&cfg.embeddings, "embeddings")?.to_path_buf();
    let classification = read_classification_corpus(&cls_path)?;
    let table = load_embeddings(&emb_path)?;
    manifest.add_input_file("classification", &cls_path)?;
    manifest.add_input_file("embeddings", &emb_path)?;

    let folds = if cfg.fold_files.is_empty() {
        let clu_path = required(&cfg.clusters, "clusters")?.to_path_buf();
        manifest.add_input_file("clusters", &clu_path)?;
        split_folds(
            &read_cluster_corpus(&clu_path)?.clusters,
            cfg.folds,
            cfg.seed,
        )?
    } else {
        let mut folds = Vec::new();
        for p in &cfg.fold_files {
            manifest.add_input_file("fold", p)?;
            folds.push(read_cluster_corpus(p)?.clusters);
        }
        folds
    };

    let output = run_crossval(&folds, &classification, &table, &cfg)?;
    write_crossval(&out, &output, &mut manifest)?;
    manifest.elapsed_seconds = start.elapsed().as_secs_f64();
    manifest.save(&out.join("manifest.json"))?;
    print!("{}", output.report.render_table());
    Ok(())
}

fn cmd_style(
    model_path: &Path,
    out: &Option<PathBuf>,
    json: bool,
    common: &Common,
) -> CliResult<()> {
    load_config(common)?;
    let model = Model::load(model_path)?;
    let subs = match (&model.summarizer, model.mode()) {
        (Some(s), Some(Mode::TcSum)) => &s.sub_matrices,
        _ => {
            return Err(tcsum::Error::Model(format!(
                "{} is not a tcsum model",
                model_path.display()
            ))
            .into())
        }
    };
    let report = StyleReport::new(model.categories().to_vec(), &style_similarity(subs)?)?;
    let json_text = report.to_json()?;
    let table = report.render_table();
    if let Some(dir) = out {
        write_text(&dir.join("style.json"), &json_text)?;
        write_text(&dir.join("style.txt"), &table)?;
    }
    print!("{}", if json { json_text } else { table });
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Synth {
            out,
            style_signal,
            common,
        } => cmd_synth(out, *style_signal, common),
        Command::TrainClassifier {
            classification,
            embeddings,
            model_out,
            common,
        } => cmd_train_classifier(classification, embeddings, model_out, common),
        Command::TrainSummarizer {
            clusters,
            embeddings,
            base,
            mode,
            model_out,
            common,
        } => cmd_train_summarizer(clusters, embeddings, base, *mode, model_out, common),
        Command::Summarize {
            model,
            clusters,
            embeddings,
            mode,
            force_category,
            cluster,
            common,
        } => cmd_summarize(
            model,
            clusters,
            embeddings,
            *mode,
            force_category,
            cluster,
            common,
        ),
        Command::Rouge {
            candidate,
            references,
            common,
        } => cmd_rouge(candidate, references, common),
        Command::Crossval {
            synth,
            classification,
            clusters,
            embeddings,
            out,
            common,
        } => cmd_crossval(*synth, [classification, clusters, embeddings, out], common),
        Command::StyleAnalysis {
            model,
            out,
            json,
            common,
        } => cmd_style(model, out, *json, common),
    }
}

fn quiet(cli: &Cli) -> bool {
    match &cli.command {
        Command::Synth { common, .. }
        | Command::TrainClassifier { common, .. }
        | Command::TrainSummarizer { common, .. }
        | Command::Summarize { common, .. }
        | Command::Rouge { common, .. }
        | Command::Crossval { common, .. }
        | Command::StyleAnalysis { common, .. } => common.quiet,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = if quiet(&cli) { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
