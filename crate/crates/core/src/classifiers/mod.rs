//! Binary classifiers behind one train/predict contract.
//!
//! Three learners are available: a one-hidden-layer network trained by
//! batch backprop with momentum and an adaptive learning rate ([`ann`]), a
//! C4.5-style tree over numeric thresholds ([`dtree`]), and a soft-margin
//! RBF SVM solved by SMO ([`svm`]). Each is a pure function of the data,
//! its configuration and a seed.

pub mod ann;
pub mod dtree;
pub mod norm;
pub mod svm;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus_io::Label;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::util::{read_utf8, write_atomic};

pub use ann::{AnnConfig, AnnModel};
pub use dtree::{TreeConfig, TreeModel};
pub use norm::Normalizer;
pub use svm::{SvmConfig, SvmModel};

/// Version written into every serialized model.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Ann,
    Dtree,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Ann, ClassifierKind::Dtree, ClassifierKind::Svm];

    pub fn key(self) -> &'static str {
        match self {
            ClassifierKind::Ann => "ann",
            ClassifierKind::Dtree => "dtree",
            ClassifierKind::Svm => "svm",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ann" => Ok(ClassifierKind::Ann),
            "dtree" | "tree" | "d-tree" => Ok(ClassifierKind::Dtree),
            "svm" => Ok(ClassifierKind::Svm),
            _ => Err(Error::config(format!("unknown classifier `{s}` (expected ann, dtree or svm)"))),
        }
    }
}

/// Learner choice together with its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Ann(AnnConfig),
    Dtree(TreeConfig),
    Svm(SvmConfig),
}

impl ClassifierConfig {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Ann => ClassifierConfig::Ann(AnnConfig::default()),
            ClassifierKind::Dtree => ClassifierConfig::Dtree(TreeConfig::default()),
            ClassifierKind::Svm => ClassifierConfig::Svm(SvmConfig::default()),
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierConfig::Ann(_) => ClassifierKind::Ann,
            ClassifierConfig::Dtree(_) => ClassifierKind::Dtree,
            ClassifierConfig::Svm(_) => ClassifierKind::Svm,
        }
    }

    pub fn train(&self, data: &Dataset, seed: u64) -> Result<Model> {
        Ok(match self {
            ClassifierConfig::Ann(cfg) => Model::Ann(ann::train_ann(data, cfg, seed)?),
            ClassifierConfig::Dtree(cfg) => Model::Dtree(dtree::train_dtree(data, cfg)?),
            ClassifierConfig::Svm(cfg) => Model::Svm(svm::train_svm(data, cfg)?),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Signed confidence; the label is positive iff `score >= 0`.
    pub score: f64,
}

impl Prediction {
    pub fn from_score(score: f64) -> Self {
        Prediction {
            label: Label::from_score(score),
            score,
        }
    }
}

pub trait Classifier {
    fn input_width(&self) -> usize;

    /// Decision value on an unnormalized row.
    fn decision(&self, row: &[f64]) -> f64;

    fn predict(&self, row: &[f64]) -> Result<Prediction> {
        check_width(self.input_width(), row)?;
        Ok(Prediction::from_score(self.decision(row)))
    }

    fn predict_all(&self, rows: &[Vec<f64>]) -> Result<Vec<Label>> {
        rows.iter().map(|r| self.predict(r).map(|p| p.label)).collect()
    }
}

pub(crate) fn check_width(expected: usize, row: &[f64]) -> Result<()> {
    if row.len() != expected {
        return Err(Error::invalid(format!(
            "row has {} features, model expects {expected}",
            row.len()
        )));
    }
    Ok(())
}

/// Training needs rows, and margin learners need both classes.
pub(crate) fn require_both_classes(data: &Dataset, learner: &str) -> Result<()> {
    data.validate()?;
    if data.is_empty() {
        return Err(Error::invalid(format!("{learner}: empty training set")));
    }
    if Label::BOTH.iter().any(|l| data.class_count(*l) == 0) {
        return Err(Error::invalid(format!(
            "{learner}: training set holds a single class"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Ann(AnnModel),
    Dtree(TreeModel),
    Svm(SvmModel),
}

impl Model {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Model::Ann(_) => ClassifierKind::Ann,
            Model::Dtree(_) => ClassifierKind::Dtree,
            Model::Svm(_) => ClassifierKind::Svm,
        }
    }

    fn inner(&self) -> &dyn Classifier {
        match self {
            Model::Ann(m) => m,
            Model::Dtree(m) => m,
            Model::Svm(m) => m,
        }
    }
}

impl Classifier for Model {
    fn input_width(&self) -> usize {
        self.inner().input_width()
    }

    fn decision(&self, row: &[f64]) -> f64 {
        self.inner().decision(row)
    }
}

pub fn predict(model: &Model, row: &[f64]) -> Result<Prediction> {
    model.predict(row)
}

/// Serialized model: format version, seed and the tagged model body.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub seed: u64,
    pub config: ClassifierConfig,
    pub model: Model,
}

impl ModelFile {
    pub fn new(config: ClassifierConfig, seed: u64, model: Model) -> Self {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            seed,
            config,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model format version {}",
                file.format_version
            )));
        }
        Ok(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&read_utf8(path.as_ref())?)
    }
}
