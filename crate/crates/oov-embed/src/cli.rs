//! Command-line interface.

use std::ffi::OsString;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use oov_embed_core::similarity::{named, nearest_neighbors, Metric, Query};
use oov_embed_core::stopwords::Stopwords;
use oov_embed_core::tasks::{context_vector, evaluate_task1, evaluate_task2, CategorySet, LabelSimilarity};
use oov_embed_core::tokenize::tokenize;
use oov_embed_core::{GmTrainConfig, TrainConfig};

use crate::config::FileConfig;
use crate::error::{Error, Result};
use crate::report::{EvalSettings, ReportFile, RunManifest};
use crate::{corpus, dataset, model_io, train};

#[derive(Parser, Debug)]
#[command(name = "oov-embed", version, about = "Word embeddings for out-of-vocabulary word tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count corpus tokens and write the vocabulary dump.
    BuildVocab(BuildVocabArgs),
    /// Train a point (SGNS) or Gaussian-mixture model.
    Train(TrainArgs),
    /// Evaluate a model on the category (1) or attribute (2) task.
    Eval(EvalArgs),
    /// Print the nearest neighbors of a word or a context.
    Nn(NnArgs),
    /// Convert a two-column dataset file to JSON Lines.
    ConvertDataset(ConvertArgs),
}

#[derive(Args, Debug)]
pub struct BuildVocabArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Sgns,
    W2gm,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// `key = value` file with defaults for the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub dims: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Learning rate of the selected model.
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub subsample: Option<f64>,
    /// Mixture components.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to `OOV_EMBED_THREADS`, then 1.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also write the vocabulary dump here.
    #[arg(long)]
    pub vocab_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LabelMode {
    Centroid,
    MaxCosine,
}

impl From<LabelMode> for LabelSimilarity {
    fn from(m: LabelMode) -> Self {
        match m {
            LabelMode::Centroid => LabelSimilarity::Centroid,
            LabelMode::MaxCosine => LabelSimilarity::MaxCosine,
        }
    }
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub task: u8,
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    /// Prediction budget for task 2.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Comma-separated category labels.
    #[arg(long, value_delimiter = ',')]
    pub categories: Option<Vec<String>>,
    /// `english`, `none`, or a file with one word per line.
    #[arg(long, default_value = "english")]
    pub stopwords: String,
    #[arg(long, value_enum, default_value_t = LabelMode::Centroid)]
    pub label_similarity: LabelMode,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NnArgs {
    #[arg(long)]
    pub model_file: PathBuf,
    #[arg(long)]
    pub word: Option<String>,
    #[arg(long)]
    pub context: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// cosine, max-cosine, el, kl or kl-reverse. Defaults to the model's
    /// evaluation metric.
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long, default_value = "english")]
    pub stopwords: String,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    execute(cli.command, out)
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::BuildVocab(a) => build_vocab(a, out),
        Command::Train(a) => train_cmd(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Nn(a) => nn(a, out),
        Command::ConvertDataset(a) => convert(a, out),
    }
}

fn build_vocab(a: BuildVocabArgs, out: &mut dyn Write) -> Result<()> {
    let vocab = corpus::build_vocab(&a.corpus, a.min_count)?;
    corpus::write_vocab(&vocab, &a.out)?;
    writeln!(out, "V={} tokens={}", vocab.len(), vocab.total_tokens())?;
    Ok(())
}

/// Flag, then config file, then environment, then one.
pub fn resolve_workers(flag: Option<usize>, file: Option<usize>) -> Result<usize> {
    let n = flag.or(file).or_else(train::env_workers).unwrap_or(1);
    if n == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    Ok(n)
}

pub struct ResolvedTrain {
    pub model: ModelKind,
    pub cfg: TrainConfig,
    pub gm: GmTrainConfig,
    pub workers: usize,
}

pub fn resolve_train(a: &TrainArgs, file: &FileConfig) -> Result<ResolvedTrain> {
    let model = match (a.model, file.model.as_deref()) {
        (Some(m), _) => m,
        (None, Some(name)) => ModelKind::from_str(name, true)
            .map_err(|_| Error::Config(format!("unknown model '{name}' (expected sgns or w2gm)")))?,
        (None, None) => ModelKind::Sgns,
    };
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        window: a.window.or(file.window).unwrap_or(d.window),
        dims: a.dims.or(file.dims).unwrap_or(d.dims),
        min_count: a.min_count.or(file.min_count).unwrap_or(d.min_count),
        negatives: a.negatives.or(file.negatives).unwrap_or(d.negatives),
        epochs: a.epochs.or(file.epochs).unwrap_or(d.epochs),
        seed: a.seed.or(file.seed).unwrap_or(d.seed),
        subsample: a.subsample.or(file.subsample).unwrap_or(d.subsample),
        lr: if model == ModelKind::Sgns { a.lr.or(file.lr) } else { file.lr }.unwrap_or(d.lr),
        dynamic_window: file.dynamic_window.unwrap_or(d.dynamic_window),
    };
    let g = GmTrainConfig::default();
    let gm = GmTrainConfig {
        margin: a.margin.or(file.margin).unwrap_or(g.margin),
        components: a.k.or(file.k).unwrap_or(g.components),
        lr: if model == ModelKind::W2gm { a.lr.or(file.gm_lr) } else { file.gm_lr }.unwrap_or(g.lr),
        var_min: file.var_min.unwrap_or(g.var_min),
        var_max: file.var_max.unwrap_or(g.var_max),
        var_init: file.var_init.unwrap_or(g.var_init),
        mu_max: file.mu_max.unwrap_or(g.mu_max),
        negatives: file.gm_negatives.unwrap_or(g.negatives),
        freeze_weights: file.freeze_weights.unwrap_or(g.freeze_weights),
    };
    cfg.validate()?;
    if model == ModelKind::W2gm {
        gm.validate()?;
    }
    let workers = resolve_workers(a.workers, file.workers)?;
    Ok(ResolvedTrain { model, cfg, gm, workers })
}

fn train_cmd(a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let file = match &a.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let r = resolve_train(&a, &file)?;
    let vocab = corpus::build_vocab(&a.corpus, r.cfg.min_count)?;
    if let Some(p) = &a.vocab_out {
        corpus::write_vocab(&vocab, p)?;
    }
    let sequences = corpus::encode(&a.corpus, &vocab)?;
    writeln!(out, "V={} tokens={} workers={}", vocab.len(), vocab.total_tokens(), r.workers)?;

    let mut printed = Ok(());
    let mut on_epoch = |e: &train::EpochReport| {
        let line = writeln!(
            out,
            "epoch {} loss {:.6} pairs {} pairs/s {:.0}",
            e.stats.epoch,
            e.stats.mean_loss,
            e.stats.pairs,
            e.pairs_per_sec()
        );
        if printed.is_ok() {
            printed = line;
        }
    };
    match r.model {
        ModelKind::Sgns => {
            let model = train::train_sgns(&sequences, &vocab, &r.cfg, r.workers, &mut on_epoch)?;
            printed?;
            model_io::export_text(&model, &vocab, &a.out)?;
        }
        ModelKind::W2gm => {
            let model = train::train_w2gm(&sequences, &vocab, &r.cfg, &r.gm, r.workers, &mut on_epoch)?;
            printed?;
            model_io::save_gm(&model, &vocab, &a.out)?;
        }
    }
    Ok(())
}

fn load_stopwords(spec: &str) -> Result<Stopwords> {
    match spec {
        "english" => Ok(Stopwords::default()),
        "none" => Ok(Stopwords::none()),
        path => {
            let path = Path::new(path);
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Ok(Stopwords::from_words(text.lines().map(str::trim).filter(|l| !l.is_empty())))
        }
    }
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let categories = match &a.categories {
        Some(labels) => CategorySet::new(labels.clone())?,
        None => CategorySet::default(),
    };
    let stopwords = load_stopwords(&a.stopwords)?;
    let loaded = model_io::load_model(&a.model_file)?;
    let samples = dataset::load_dataset(&a.dataset, &categories)?;
    dataset::warn_in_vocabulary(&samples, &loaded.vocab);
    let model = loaded.as_ref();
    let report = match a.task {
        1 => evaluate_task1(model, &loaded.vocab, &samples, &categories, &stopwords, a.label_similarity.into())?,
        _ => {
            if a.k == 0 {
                return Err(Error::Config("k must be at least 1".into()));
            }
            evaluate_task2(model, &loaded.vocab, &samples, &stopwords, a.k)?
        }
    };
    match report.task {
        1 => writeln!(
            out,
            "task 1: n={} S1={:.4} accuracy={:.4} no_context={}",
            report.n,
            report.s1.unwrap_or(f64::NAN),
            report.accuracy.unwrap_or(f64::NAN),
            report.no_context
        )?,
        _ => writeln!(
            out,
            "task 2: n={} K={} S2={:.4} no_context={}",
            report.n,
            a.k,
            report.s2.unwrap_or(f64::NAN),
            report.no_context
        )?,
    }
    if let Some(path) = &a.report {
        let mut manifest = RunManifest::new("eval");
        manifest.model_file = Some(a.model_file.clone());
        manifest.dataset = Some(a.dataset.clone());
        manifest.eval = Some(EvalSettings {
            task: a.task,
            k: a.k,
            categories: categories.labels().to_vec(),
            stopwords: a.stopwords.clone(),
            label_similarity: format!("{:?}", LabelSimilarity::from(a.label_similarity)).to_lowercase(),
            model_kind: loaded.kind().to_string(),
        });
        ReportFile::new(manifest, report).write(path)?;
    }
    Ok(())
}

fn nn(a: NnArgs, out: &mut dyn Write) -> Result<()> {
    let loaded = model_io::load_model(&a.model_file)?;
    let model = loaded.as_ref();
    let vocab = &loaded.vocab;
    let metric = match &a.metric {
        Some(m) => m.parse::<Metric>()?,
        None => Metric::default_for(&model),
    };
    let stopwords = load_stopwords(&a.stopwords)?;
    let known = a.word.as_deref().and_then(|w| vocab.id(w));
    let hits = match (known, &a.context) {
        (Some(id), _) => nearest_neighbors(model, Query::Word(id), a.k, metric, |j| j == id)?,
        (None, Some(text)) => {
            let tokens: Vec<String> = tokenize(text).collect();
            let ctx = context_vector(model, &tokens, vocab, &stopwords)?;
            nearest_neighbors(model, Query::Vector(&ctx), a.k, metric, |j| stopwords.contains(vocab.token(j)))?
        }
        (None, None) => {
            return Err(match &a.word {
                Some(w) => Error::Config(format!("'{w}' is not in the model vocabulary and no --context was given")),
                None => Error::Config("either --word or --context is required".into()),
            })
        }
    };
    for (token, score) in named(vocab, &hits) {
        writeln!(out, "{token}\t{score:.6}")?;
    }
    Ok(())
}

fn convert(a: ConvertArgs, out: &mut dyn Write) -> Result<()> {
    let input = std::fs::File::open(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let output = std::fs::File::create(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let mut w = BufWriter::new(output);
    let n = dataset::convert_two_column(BufReader::new(input), &mut w)?;
    w.flush().map_err(|e| Error::io(&a.out, e))?;
    writeln!(out, "{n} records")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> TrainArgs {
        let mut full = vec!["oov-embed", "train", "--corpus", "c.txt", "--out", "m.txt"];
        full.extend_from_slice(args);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Train(t) => t,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_config_file() {
        let file = FileConfig::parse("dims = 20\nwindow = 3\nworkers = 4\nmodel = \"w2gm\"").unwrap();
        let r = resolve_train(&parse(&["--dims", "7"]), &file).unwrap();
        assert_eq!(r.cfg.dims, 7);
        assert_eq!(r.cfg.window, 3);
        assert_eq!(r.workers, 4);
        assert_eq!(r.model, ModelKind::W2gm);
        let r = resolve_train(&parse(&["--workers", "2", "--model", "sgns"]), &file).unwrap();
        assert_eq!((r.workers, r.model), (2, ModelKind::Sgns));
    }

    #[test]
    fn lr_applies_to_selected_model() {
        let none = FileConfig::default();
        let r = resolve_train(&parse(&["--model", "w2gm", "--lr", "0.3"]), &none).unwrap();
        assert_eq!(r.gm.lr, 0.3);
        assert_eq!(r.cfg.lr, TrainConfig::default().lr);
    }

    #[test]
    fn zero_components_is_a_config_error() {
        let err = resolve_train(&parse(&["--model", "w2gm", "--k", "0"]), &FileConfig::default())
            .err()
            .unwrap();
        assert_eq!(err.exit_code(), 2);
    }
}
