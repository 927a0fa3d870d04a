//! End-to-end runs: load, preprocess, aggregate priors, score (with or
//! without rules), featurize and cross-validate, writing every artifact to
//! an output directory.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierConfig, ClassifierKind, ModelFile};
use crate::corpus_io::{load_corpus, LemmaDictionary, Preprocessor, TokenizedDocument};
use crate::error::{Error, Result, StageExt};
use crate::evaluation::{run_cv, EvalReport};
use crate::features::{doc_features, term_features, Dataset, FeatureVariant, Level};
use crate::lexicon::{load_lexicon, Lexicon, PriorFormula};
use crate::scoring::{RuleConfig, ScoredDocument, Scorer, SentenceFormula};
use crate::util::{read_utf8, write_atomic};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub lexicon: PathBuf,
    /// `surface<TAB>lemma` dictionary; affix stripping only when absent.
    pub lemmas: Option<PathBuf>,
    /// Negation and intensifier lists; the built-in Arabic lists when absent.
    pub negations: Option<PathBuf>,
    pub intensifiers: Option<PathBuf>,
    pub level: Level,
    pub prior_formula: PriorFormula,
    /// Required at document level, rejected at term level.
    pub sentence_formula: Option<SentenceFormula>,
    pub variant: FeatureVariant,
    pub rules: bool,
    pub rule_window: usize,
    /// A bare name (`classifier = "svm"`) gives default hyperparameters.
    #[serde(deserialize_with = "classifier_or_name")]
    pub classifier: ClassifierConfig,
    pub k: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ClassifierRepr {
    Name(String),
    Full(ClassifierConfig),
}

impl ClassifierRepr {
    fn resolve<E: serde::de::Error>(self) -> std::result::Result<ClassifierConfig, E> {
        match self {
            ClassifierRepr::Name(s) => s
                .parse::<ClassifierKind>()
                .map(ClassifierConfig::default_for)
                .map_err(E::custom),
            ClassifierRepr::Full(c) => Ok(c),
        }
    }
}

fn classifier_or_name<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<ClassifierConfig, D::Error> {
    ClassifierRepr::deserialize(d)?.resolve()
}

fn classifiers_or_names<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<ClassifierConfig>, D::Error> {
    Vec::<ClassifierRepr>::deserialize(d)?.into_iter().map(ClassifierRepr::resolve).collect()
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: PathBuf::new(),
            lexicon: PathBuf::new(),
            lemmas: None,
            negations: None,
            intensifiers: None,
            level: Level::Term,
            prior_formula: PriorFormula::MaxSub,
            sentence_formula: None,
            variant: FeatureVariant::Term8,
            rules: false,
            rule_window: 1,
            classifier: ClassifierConfig::Ann(Default::default()),
            k: 5,
            seed: 7,
            out: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml(&read_utf8(path)?).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Checks every option combination before any file is touched.
    pub fn validate(&self) -> Result<()> {
        if self.corpus.as_os_str().is_empty() {
            return Err(Error::config("corpus path is not set"));
        }
        if self.lexicon.as_os_str().is_empty() {
            return Err(Error::config("lexicon path is not set"));
        }
        if self.variant.level() != self.level {
            return Err(Error::config(format!(
                "feature variant {} does not belong to the {} level",
                self.variant.key(),
                self.level
            )));
        }
        match (self.level, self.sentence_formula) {
            (Level::Document, None) => {
                return Err(Error::config("document level needs a sentence formula"));
            }
            (Level::Term, Some(f)) => {
                return Err(Error::config(format!(
                    "sentence formula {} only applies at document level",
                    f.display_name()
                )));
            }
            _ => {}
        }
        if self.negations.is_some() != self.intensifiers.is_some() {
            return Err(Error::config("negation and intensifier lists must be given together"));
        }
        if self.rule_window == 0 {
            return Err(Error::config("rule window must be at least 1"));
        }
        if self.k < 2 {
            return Err(Error::config(format!("k must be at least 2, got {}", self.k)));
        }
        Ok(())
    }

    /// Formula recorded in the report: the prior formula at term level,
    /// the sentence formula at document level.
    pub fn formula_name(&self) -> &'static str {
        match self.sentence_formula {
            Some(f) if self.level == Level::Document => f.display_name(),
            _ => self.prior_formula.display_name(),
        }
    }
}

/// Everything read from disk, shared by all runs over the same inputs.
#[derive(Clone, Debug)]
pub struct Inputs {
    pub docs: Vec<TokenizedDocument>,
    pub lexicon: Lexicon,
    pub rules: RuleConfig,
}

pub fn load_rules(cfg: &PipelineConfig) -> Result<RuleConfig> {
    match (&cfg.negations, &cfg.intensifiers) {
        (Some(n), Some(i)) => RuleConfig::load(n, i, cfg.rule_window),
        _ => RuleConfig::default().with_window(cfg.rule_window),
    }
}

pub fn load_inputs(cfg: &PipelineConfig) -> Result<Inputs> {
    let raw = load_corpus(&cfg.corpus).stage("load corpus")?;
    let dictionary = match &cfg.lemmas {
        Some(p) => LemmaDictionary::load(p).stage("load lemmas")?,
        None => LemmaDictionary::new(),
    };
    let lexicon = load_lexicon(&cfg.lexicon).stage("load lexicon")?;
    let rules = load_rules(cfg).stage("load rules")?;
    let docs = Preprocessor::new(dictionary).process_all(&raw);
    Ok(Inputs { docs, lexicon, rules })
}

pub fn score_documents(inputs: &Inputs, formula: PriorFormula, rules: bool) -> Result<Vec<ScoredDocument>> {
    let priors = inputs.lexicon.priors(formula).stage("aggregate priors")?;
    let scorer = Scorer {
        priors: &priors,
        rules: &inputs.rules,
        apply_rules: rules,
    };
    Ok(inputs.docs.par_iter().map(|d| scorer.score(d)).collect())
}

/// One feature row per document. Document-level variants need the
/// sentence formula.
pub fn featurize(
    docs: &[ScoredDocument],
    variant: FeatureVariant,
    sentence_formula: Option<SentenceFormula>,
) -> Result<Dataset> {
    let rows = docs
        .iter()
        .map(|d| match variant.level() {
            Level::Term => term_features(&d.adjusted_scores(), variant),
            Level::Document => {
                let formula = sentence_formula
                    .ok_or_else(|| Error::config("document level needs a sentence formula"))?;
                let scores: Vec<f64> = d.sentence_scores(formula).iter().map(|s| s.value).collect();
                doc_features(&scores, variant)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(variant, rows, docs.iter().map(|d| d.label).collect())
}

pub fn build_dataset(cfg: &PipelineConfig, inputs: &Inputs) -> Result<Dataset> {
    let scored = score_documents(inputs, cfg.prior_formula, cfg.rules)?;
    featurize(&scored, cfg.variant, cfg.sentence_formula).stage("featurize")
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub report: EvalReport,
    pub dataset: Dataset,
}

pub fn features_path(out: &Path) -> PathBuf {
    out.join("features.csv")
}

pub fn report_path(out: &Path) -> PathBuf {
    out.join("report.json")
}

pub fn model_path(out: &Path, fold: usize) -> PathBuf {
    out.join("models").join(format!("fold-{fold}.json"))
}

/// Runs every stage and writes `features.csv`, `models/fold-<i>.json` and
/// `report.json` under `cfg.out`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    run_with_inputs(cfg, &inputs)
}

/// Same as [`run_pipeline`] over inputs already in memory.
pub fn run_with_inputs(cfg: &PipelineConfig, inputs: &Inputs) -> Result<PipelineOutput> {
    cfg.validate()?;
    let dataset = build_dataset(cfg, inputs)?;
    dataset.write_csv(features_path(&cfg.out)).stage("write features")?;

    let cv = run_cv(&dataset, &cfg.classifier, cfg.k, cfg.seed).stage("cross-validate")?;
    for (fold, (model, seed)) in cv.models.iter().zip(&cv.fold_seeds).enumerate() {
        ModelFile::new(cfg.classifier.clone(), *seed, model.clone())
            .save(model_path(&cfg.out, fold))
            .stage("write models")?;
    }

    let mut report = cv.report;
    report.meta.formula = Some(cfg.formula_name().to_string());
    report.meta.rules = Some(cfg.rules);
    write_atomic(&report_path(&cfg.out), report.to_json()?.as_bytes()).stage("write report")?;
    Ok(PipelineOutput { report, dataset })
}

/// Grid of pipeline variations. Empty lists fall back to the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    #[serde(flatten)]
    pub base: PipelineConfig,
    pub prior_formulas: Vec<PriorFormula>,
    pub sentence_formulas: Vec<SentenceFormula>,
    pub variants: Vec<FeatureVariant>,
    pub rule_settings: Vec<bool>,
    #[serde(deserialize_with = "classifiers_or_names")]
    pub classifiers: Vec<ClassifierConfig>,
}

impl SweepGrid {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_toml(&read_utf8(path)?).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    /// Every combination, in a fixed order, each with its own output dir.
    pub fn cells(&self) -> Vec<PipelineConfig> {
        fn or_base<T: Clone>(list: &[T], base: T) -> Vec<T> {
            if list.is_empty() {
                vec![base]
            } else {
                list.to_vec()
            }
        }
        let base = &self.base;
        let sentence: Vec<Option<SentenceFormula>> = if base.level == Level::Document {
            or_base(&self.sentence_formulas, base.sentence_formula.unwrap_or(SentenceFormula::MaxSub))
                .into_iter()
                .map(Some)
                .collect()
        } else {
            vec![None]
        };
        let mut cells = Vec::new();
        for prior in or_base(&self.prior_formulas, base.prior_formula) {
            for &sf in &sentence {
                for variant in or_base(&self.variants, base.variant) {
                    for rules in or_base(&self.rule_settings, base.rules) {
                        for clf in or_base(&self.classifiers, base.classifier.clone()) {
                            let mut cell = PipelineConfig {
                                prior_formula: prior,
                                sentence_formula: sf,
                                variant,
                                rules,
                                classifier: clf,
                                ..base.clone()
                            };
                            cell.out = base.out.join("cells").join(cell_name(&cell));
                            cells.push(cell);
                        }
                    }
                }
            }
        }
        cells
    }
}

fn cell_name(cfg: &PipelineConfig) -> String {
    let mut name = cfg.prior_formula.key().to_string();
    if let Some(sf) = cfg.sentence_formula {
        name.push('-');
        name.push_str(sf.key());
    }
    format!(
        "{name}-{}-{}-{}",
        cfg.variant.key(),
        if cfg.rules { "rules" } else { "norules" },
        cfg.classifier.kind()
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub prior_formula: String,
    pub sentence_formula: String,
    pub variant: String,
    pub rules: bool,
    pub classifier: String,
    pub train_f_pos: f64,
    pub train_f_neg: f64,
    pub test_f_pos: f64,
    pub test_f_neg: f64,
    /// Mean of the two test F-scores; the ranking key.
    pub test_f_mean: f64,
    pub best: bool,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub reports: Vec<EvalReport>,
    pub best: usize,
}

pub fn sweep_path(out: &Path) -> PathBuf {
    out.join("sweep.csv")
}

/// Runs the pipeline on every grid cell (in parallel) and writes one CSV
/// row per cell to `sweep.csv`; the cell with the highest mean test
/// F-score is marked `best` (first one on ties).
pub fn sweep(grid: &SweepGrid) -> Result<SweepResult> {
    let cells = grid.cells();
    for cell in &cells {
        cell.validate()?;
    }
    let inputs = load_inputs(&grid.base)?;
    let reports: Vec<EvalReport> = cells
        .par_iter()
        .map(|cell| run_with_inputs(cell, &inputs).map(|o| o.report))
        .collect::<Result<_>>()?;

    let mut rows: Vec<SweepRow> = cells
        .iter()
        .zip(&reports)
        .map(|(cell, r)| {
            let avg = &r.average;
            SweepRow {
                prior_formula: cell.prior_formula.display_name().to_string(),
                sentence_formula: cell.sentence_formula.map_or("", |f| f.display_name()).to_string(),
                variant: cell.variant.key().to_string(),
                rules: cell.rules,
                classifier: cell.classifier.kind().to_string(),
                train_f_pos: avg.train.pos.f,
                train_f_neg: avg.train.neg.f,
                test_f_pos: avg.test.pos.f,
                test_f_neg: avg.test.neg.f,
                test_f_mean: (avg.test.pos.f + avg.test.neg.f) / 2.0,
                best: false,
            }
        })
        .collect();
    let mut best = 0;
    for (i, row) in rows.iter().enumerate() {
        if row.test_f_mean > rows[best].test_f_mean {
            best = i;
        }
    }
    rows[best].best = true;

    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    write_atomic(&sweep_path(&grid.base.out), &bytes).stage("write sweep")?;
    Ok(SweepResult { rows, reports, best })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_variant_compatibility() {
        let base = PipelineConfig {
            corpus: "c".into(),
            lexicon: "l".into(),
            ..Default::default()
        };
        base.validate().unwrap();
        let bad = PipelineConfig {
            variant: FeatureVariant::Doc7,
            ..base.clone()
        };
        assert!(bad.validate().unwrap_err().is_config());
        let doc = PipelineConfig {
            level: Level::Document,
            variant: FeatureVariant::Doc7,
            ..base.clone()
        };
        assert!(doc.validate().is_err());
        PipelineConfig {
            sentence_formula: Some(SentenceFormula::MaxMax),
            ..doc
        }
        .validate()
        .unwrap();
        let term_with_sentence = PipelineConfig {
            sentence_formula: Some(SentenceFormula::MaxSub),
            ..base
        };
        assert!(term_with_sentence.validate().is_err());
    }

    #[test]
    fn toml_config() {
        let cfg = PipelineConfig::from_toml(
            r#"
            corpus = "corpus"
            lexicon = "lexicon.tsv"
            level = "document"
            prior_formula = "max_sub"
            sentence_formula = "max_max"
            variant = "doc7"
            rules = true

            [classifier]
            kind = "svm"
            c = 2.0
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.sentence_formula, Some(SentenceFormula::MaxMax));
        match cfg.classifier {
            ClassifierConfig::Svm(s) => assert_eq!(s.c, 2.0),
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.k, 5);
        assert!(PipelineConfig::from_toml("bogus = 1").unwrap_err().is_config());
    }

    #[test]
    fn grid_cells() {
        let grid = SweepGrid::from_toml(
            r#"
            corpus = "c"
            lexicon = "l"
            out = "o"
            prior_formulas = ["max_max", "avg_max", "avg_sub", "max_sub", "avg_avg"]
            variants = ["term8", "term6"]
            "#,
        )
        .unwrap();
        let cells = grid.cells();
        assert_eq!(cells.len(), 10);
        assert!(cells.iter().all(|c| c.validate().is_ok()));
        let names: std::collections::BTreeSet<_> = cells.iter().map(|c| c.out.clone()).collect();
        assert_eq!(names.len(), 10);
    }
}
