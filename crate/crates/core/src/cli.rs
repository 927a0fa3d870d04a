//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on configuration errors (bad flags, missing
//! inputs, incompatible options), 2 on data errors.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::classifiers::{ClassifierConfig, ClassifierKind, ModelFile};
use crate::corpus_io::{load_corpus, LemmaDictionary, Preprocessor};
use crate::error::{Error, Result};
use crate::evaluation::{run_cv, EvalReport};
use crate::features::{Dataset, FeatureVariant, Level};
use crate::lexicon::{load_lexicon, PriorFormula};
use crate::pipeline::{self, PipelineConfig, SweepGrid};
use crate::quality::{quality_report_base, rank_frequencies, write_quality_csv, LogBase};
use crate::scoring::{ScoredDocument, SentenceFormula, SentenceScore};
use crate::synth::{generate, SynthConfig};
use crate::util::write_atomic;

#[derive(Debug, Parser)]
#[command(name = "sentilevel", version, about = "Term- and document-level sentiment analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus, lexicon, lemma dictionary and tool-word lists.
    Synth(SynthArgs),
    /// Zipf rank-frequency profile and KL distance of a corpus.
    Quality(QualityArgs),
    /// Collapse a multi-sense lexicon into one prior per lemma.
    LexiconAggregate(LexiconArgs),
    /// Per-token (and per-sentence) scores as JSON lines.
    Score(ScoreArgs),
    /// Feature CSV for a corpus.
    Featurize(ScoreArgs),
    /// Train one model on a feature CSV.
    Train(TrainArgs),
    /// Stratified k-fold cross-validation on a feature CSV.
    Evaluate(EvaluateArgs),
    /// Corpus to report in one run.
    Pipeline(PipelineArgs),
    /// Run the pipeline over a grid of formulas, variants, rules and classifiers.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Documents per class.
    #[arg(long, default_value_t = 250)]
    pub docs: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Dense, polarity-pure documents without rule words.
    #[arg(long)]
    pub separable: bool,
    #[arg(long)]
    pub density: Option<f64>,
    /// Probability that a sentiment word matches the document's class.
    #[arg(long)]
    pub bias: Option<f64>,
    #[arg(long)]
    pub rule_fraction: Option<f64>,
    /// Arabic negation/intensifier words instead of transliterations.
    #[arg(long)]
    pub arabic: bool,
}

#[derive(Debug, Args)]
pub struct QualityArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
    /// Zipf exponent `a`.
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    #[arg(long, default_value = "e")]
    pub log_base: String,
    /// Rank/frequency CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct LexiconArgs {
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long, default_value = "max_sub")]
    pub formula: String,
    /// `lemma<TAB>prior` output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Inputs and scoring options shared by the corpus-level commands. Flags
/// override values read from `--config`.
#[derive(Debug, Default, Args)]
pub struct CorpusArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub lemmas: Option<PathBuf>,
    #[arg(long)]
    pub negations: Option<PathBuf>,
    #[arg(long)]
    pub intensifiers: Option<PathBuf>,
    /// term or document.
    #[arg(long)]
    pub level: Option<String>,
    /// Prior formula at term level, sentence formula at document level.
    /// An `m_`/`d_` prefix selects explicitly.
    #[arg(long)]
    pub formula: Option<String>,
    #[arg(long)]
    pub prior_formula: Option<String>,
    #[arg(long)]
    pub sentence_formula: Option<String>,
    /// Feature count (8|6|7|5|4) or name (term8, doc7, ...).
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, overrides_with = "no_rules")]
    pub rules: bool,
    #[arg(long, overrides_with = "rules")]
    pub no_rules: bool,
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    /// ann, dtree or svm.
    #[arg(long)]
    pub classifier: Option<String>,
    /// ANN hidden units.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// ANN training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// ANN random restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// SVM box constraint.
    #[arg(long = "svm-c")]
    pub svm_c: Option<f64>,
    /// SVM RBF width; 1/num_features when absent.
    #[arg(long = "svm-gamma")]
    pub svm_gamma: Option<f64>,
    /// Tree minimum instances per leaf.
    #[arg(long)]
    pub min_leaf: Option<usize>,
    /// Tree pruning off.
    #[arg(long)]
    pub no_prune: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Feature CSV.
    #[arg(long = "in", alias = "features")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, alias = "in")]
    pub features: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Comma-separated prior formulas.
    #[arg(long, value_delimiter = ',')]
    pub prior_formulas: Vec<String>,
    /// Comma-separated sentence formulas (document level).
    #[arg(long, value_delimiter = ',')]
    pub sentence_formulas: Vec<String>,
    /// Comma-separated variants.
    #[arg(long, value_delimiter = ',')]
    pub variants: Vec<String>,
    /// Comma-separated rule settings (on/off).
    #[arg(long, value_delimiter = ',')]
    pub rule_settings: Vec<String>,
    /// Comma-separated classifiers, default hyperparameters.
    #[arg(long, value_delimiter = ',')]
    pub classifiers: Vec<String>,
}

fn parse_variant(s: &str, level: Level) -> Result<FeatureVariant> {
    match s.parse::<usize>() {
        Ok(n) => FeatureVariant::for_level(level, n),
        Err(_) => s.parse(),
    }
}

fn default_variant(level: Level) -> FeatureVariant {
    match level {
        Level::Term => FeatureVariant::Term8,
        Level::Document => FeatureVariant::Doc7,
    }
}

impl CorpusArgs {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        let set = |slot: &mut PathBuf, v: &Option<PathBuf>| {
            if let Some(v) = v {
                *slot = v.clone();
            }
        };
        set(&mut cfg.corpus, &self.corpus);
        set(&mut cfg.lexicon, &self.lexicon);
        for (slot, v) in [
            (&mut cfg.lemmas, &self.lemmas),
            (&mut cfg.negations, &self.negations),
            (&mut cfg.intensifiers, &self.intensifiers),
        ] {
            if v.is_some() {
                *slot = v.clone();
            }
        }
        if let Some(level) = &self.level {
            let level: Level = level.parse()?;
            if level != cfg.level {
                cfg.level = level;
                cfg.variant = default_variant(level);
                cfg.sentence_formula = match level {
                    Level::Term => None,
                    Level::Document => Some(SentenceFormula::MaxSub),
                };
            }
        }
        if let Some(v) = &self.variant {
            cfg.variant = parse_variant(v, cfg.level)?;
        }
        if let Some(f) = &self.formula {
            let lower = f.to_ascii_lowercase();
            if lower.starts_with("m_") || (cfg.level == Level::Term && !lower.starts_with("d_")) {
                cfg.prior_formula = f.parse()?;
            } else {
                cfg.sentence_formula = Some(f.parse()?);
            }
        }
        if let Some(f) = &self.prior_formula {
            cfg.prior_formula = f.parse()?;
        }
        if let Some(f) = &self.sentence_formula {
            cfg.sentence_formula = Some(f.parse()?);
        }
        if self.rules {
            cfg.rules = true;
        }
        if self.no_rules {
            cfg.rules = false;
        }
        if let Some(w) = self.window {
            cfg.rule_window = w;
        }
        Ok(())
    }
}

fn flag_mismatch(flag: &str, kind: ClassifierKind) -> Error {
    Error::config(format!("--{flag} does not apply to the {kind} classifier"))
}

impl ModelArgs {
    fn apply(&self, current: &ClassifierConfig) -> Result<ClassifierConfig> {
        let mut cfg = match &self.classifier {
            Some(k) => {
                let kind: ClassifierKind = k.parse()?;
                if kind == current.kind() {
                    current.clone()
                } else {
                    ClassifierConfig::default_for(kind)
                }
            }
            None => current.clone(),
        };
        let kind = cfg.kind();
        match &mut cfg {
            ClassifierConfig::Ann(a) => {
                if let Some(h) = self.hidden {
                    a.hidden = h;
                }
                if let Some(e) = self.epochs {
                    a.max_epochs = e;
                }
                if let Some(r) = self.restarts {
                    a.restarts = r;
                }
            }
            ClassifierConfig::Svm(s) => {
                if let Some(c) = self.svm_c {
                    s.c = c;
                }
                if self.svm_gamma.is_some() {
                    s.gamma = self.svm_gamma;
                }
            }
            ClassifierConfig::Dtree(t) => {
                if let Some(m) = self.min_leaf {
                    t.min_leaf = m;
                }
                if self.no_prune {
                    t.prune = false;
                }
            }
        }
        let ann_only = self.hidden.is_some() || self.epochs.is_some() || self.restarts.is_some();
        let svm_only = self.svm_c.is_some() || self.svm_gamma.is_some();
        let tree_only = self.min_leaf.is_some() || self.no_prune;
        match kind {
            ClassifierKind::Ann if svm_only || tree_only => Err(flag_mismatch("svm-*/min-leaf/no-prune", kind)),
            ClassifierKind::Svm if ann_only || tree_only => Err(flag_mismatch("hidden/epochs/restarts/min-leaf/no-prune", kind)),
            ClassifierKind::Dtree if ann_only || svm_only => Err(flag_mismatch("hidden/epochs/restarts/svm-*", kind)),
            _ => Ok(cfg),
        }
    }
}

impl PipelineArgs {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        self.input.apply(cfg)?;
        cfg.classifier = self.model.apply(&cfg.classifier)?;
        if let Some(k) = self.folds {
            cfg.k = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        Ok(())
    }

    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.input.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        self.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn resolve_scoring(args: &CorpusArgs) -> Result<PipelineConfig> {
    let mut cfg = match &args.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    args.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => to_stdout(bytes),
    }
}

/// A closed pipe (`| head`) is not an error.
fn to_stdout(bytes: &[u8]) -> Result<()> {
    match std::io::stdout().write_all(bytes) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn say(line: &str) -> Result<()> {
    to_stdout(format!("{line}\n").as_bytes())
}

fn summary(report: &EvalReport) -> String {
    let t = &report.average.test;
    format!(
        "{} {}-fold: test F pos {:.4} neg {:.4}",
        report.meta.classifier, report.meta.k, t.pos.f, t.neg.f
    )
}

#[derive(serde::Serialize)]
struct ScoreLine<'a> {
    #[serde(flatten)]
    doc: &'a ScoredDocument,
    #[serde(skip_serializing_if = "Option::is_none")]
    sentence_scores: Option<Vec<SentenceScore>>,
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let mut cfg = if a.separable {
        SynthConfig::separable(a.docs, a.seed)
    } else {
        SynthConfig {
            docs_per_class: a.docs,
            seed: a.seed,
            ..Default::default()
        }
    };
    if let Some(d) = a.density {
        cfg.density = d;
    }
    if let Some(b) = a.bias {
        cfg.polarity_bias = b;
    }
    if let Some(r) = a.rule_fraction {
        cfg.rule_fraction = r;
    }
    cfg.arabic_tool_words = a.arabic;
    let out = generate(&cfg, &a.out)?;
    say(&serde_json::to_string_pretty(&out)?)?;
    Ok(())
}

fn cmd_quality(a: &QualityArgs) -> Result<()> {
    let base: LogBase = a.log_base.parse()?;
    let dict = match &a.lemmas {
        Some(p) => LemmaDictionary::load(p)?,
        None => LemmaDictionary::new(),
    };
    let docs = Preprocessor::new(dict).process_all(&load_corpus(&a.corpus)?);
    let table = rank_frequencies(&docs)?;
    let mut report = quality_report_base(&table, a.exponent, base)?;
    write_quality_csv(&table, &mut report, &a.out)?;
    say(&serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn cmd_lexicon(a: &LexiconArgs) -> Result<()> {
    let formula: PriorFormula = a.formula.parse()?;
    let priors = load_lexicon(&a.lexicon)?.priors(formula)?;
    emit(a.out.as_deref(), priors.to_tsv().as_bytes())
}

fn cmd_score(a: &ScoreArgs) -> Result<()> {
    let cfg = resolve_scoring(&a.input)?;
    let inputs = pipeline::load_inputs(&cfg)?;
    let scored = pipeline::score_documents(&inputs, cfg.prior_formula, cfg.rules)?;
    let mut out = String::new();
    for doc in &scored {
        let line = ScoreLine {
            doc,
            sentence_scores: cfg.sentence_formula.map(|f| doc.sentence_scores(f)),
        };
        out.push_str(&serde_json::to_string(&line)?);
        out.push('\n');
    }
    emit(a.out.as_deref(), out.as_bytes())
}

fn cmd_featurize(a: &ScoreArgs) -> Result<()> {
    let cfg = resolve_scoring(&a.input)?;
    let inputs = pipeline::load_inputs(&cfg)?;
    let data = pipeline::build_dataset(&cfg, &inputs)?;
    emit(a.out.as_deref(), &data.to_csv()?)
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let cfg = a.model.apply(&ClassifierConfig::default_for(ClassifierKind::Ann))?;
    let data = Dataset::read_csv(&a.input)?;
    let model = cfg.train(&data, a.seed)?;
    ModelFile::new(cfg, a.seed, model).save(&a.out)
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let cfg = a.model.apply(&ClassifierConfig::default_for(ClassifierKind::Ann))?;
    if a.folds < 2 {
        return Err(Error::config(format!("--folds must be at least 2, got {}", a.folds)));
    }
    let data = Dataset::read_csv(&a.features)?;
    let cv = run_cv(&data, &cfg, a.folds, a.seed)?;
    write_atomic(&a.out, cv.report.to_json()?.as_bytes())?;
    say(&summary(&cv.report))?;
    Ok(())
}

fn cmd_pipeline(a: &PipelineArgs) -> Result<()> {
    let cfg = a.resolve()?;
    let out = pipeline::run_pipeline(&cfg)?;
    say(&summary(&out.report))?;
    Ok(())
}

fn parse_switch(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(format!("expected on/off, got `{s}`"))),
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let mut grid = match &a.pipeline.input.config {
        Some(p) => SweepGrid::load(p)?,
        None => SweepGrid::default(),
    };
    a.pipeline.apply(&mut grid.base)?;
    let level = grid.base.level;
    if !a.prior_formulas.is_empty() {
        grid.prior_formulas = a.prior_formulas.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if !a.sentence_formulas.is_empty() {
        grid.sentence_formulas = a
            .sentence_formulas
            .iter()
            .map(|s| s.parse::<SentenceFormula>())
            .collect::<Result<_>>()?;
    }
    if !a.variants.is_empty() {
        grid.variants = a.variants.iter().map(|s| parse_variant(s, level)).collect::<Result<_>>()?;
    }
    if !a.rule_settings.is_empty() {
        grid.rule_settings = a.rule_settings.iter().map(|s| parse_switch(s)).collect::<Result<_>>()?;
    }
    if !a.classifiers.is_empty() {
        grid.classifiers = a
            .classifiers
            .iter()
            .map(|s| s.parse().map(ClassifierConfig::default_for))
            .collect::<Result<_>>()?;
    }
    if level == Level::Document && grid.base.sentence_formula.is_none() {
        grid.base.sentence_formula = grid.sentence_formulas.first().copied();
    }
    grid.base.validate()?;
    let result = pipeline::sweep(&grid)?;
    let best = &result.rows[result.best];
    let cell: Vec<&str> = [
        best.prior_formula.as_str(),
        best.sentence_formula.as_str(),
        best.variant.as_str(),
        if best.rules { "rules" } else { "no-rules" },
        best.classifier.as_str(),
    ]
    .into_iter()
    .filter(|s| !s.is_empty())
    .collect();
    say(&format!(
        "{} cells; best: {} (test F pos {:.4} neg {:.4})",
        result.rows.len(),
        cell.join(" "),
        best.test_f_pos,
        best.test_f_neg
    ))?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Quality(a) => cmd_quality(a),
        Command::LexiconAggregate(a) => cmd_lexicon(a),
        Command::Score(a) => cmd_score(a),
        Command::Featurize(a) => cmd_featurize(a),
        Command::Train(a) => cmd_train(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
