//! Feature vectors for the two analysis levels.
//!
//! Term level summarizes the token scores of a document (8 features, or 6
//! without the first/last subjective scores). Document level summarizes its
//! sentence scores (7 features, 5 without the two maxima, 4 without the
//! first/middle/last scores).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus_io::Label;
use crate::error::{Error, Result};
use crate::util::{read_utf8, write_atomic};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Term,
    Document,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Term => "term",
            Level::Document => "document",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "term" => Ok(Level::Term),
            "document" | "doc" => Ok(Level::Document),
            _ => Err(Error::config(format!("unknown level `{s}` (expected term or document)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureVariant {
    #[serde(rename = "term8")]
    Term8,
    #[serde(rename = "term6")]
    Term6,
    #[serde(rename = "doc7")]
    Doc7,
    #[serde(rename = "doc5")]
    Doc5,
    #[serde(rename = "doc4")]
    Doc4,
}

pub const TERM_FEATURES: [&str; 8] = [
    "count_pos",
    "count_neg",
    "sum_pos",
    "sum_neg",
    "avg_pos",
    "avg_neg",
    "first_subj",
    "last_subj",
];

pub const DOC_FEATURES: [&str; 7] = [
    "count_pos_sent",
    "count_neg_sent",
    "max_pos",
    "max_neg",
    "first_score",
    "middle_score",
    "last_score",
];

impl FeatureVariant {
    pub const ALL: [FeatureVariant; 5] = [
        FeatureVariant::Term8,
        FeatureVariant::Term6,
        FeatureVariant::Doc7,
        FeatureVariant::Doc5,
        FeatureVariant::Doc4,
    ];

    pub fn width(self) -> usize {
        self.columns().len()
    }

    pub fn level(self) -> Level {
        match self {
            FeatureVariant::Term8 | FeatureVariant::Term6 => Level::Term,
            _ => Level::Document,
        }
    }

    /// Indices into the full 8- or 7-wide vector of this level.
    pub fn columns(self) -> &'static [usize] {
        match self {
            FeatureVariant::Term8 => &[0, 1, 2, 3, 4, 5, 6, 7],
            FeatureVariant::Term6 => &[0, 1, 2, 3, 4, 5],
            FeatureVariant::Doc7 => &[0, 1, 2, 3, 4, 5, 6],
            FeatureVariant::Doc5 => &[0, 1, 4, 5, 6],
            FeatureVariant::Doc4 => &[0, 1, 2, 3],
        }
    }

    pub fn names(self) -> Vec<&'static str> {
        let all: &[&str] = match self.level() {
            Level::Term => &TERM_FEATURES,
            Level::Document => &DOC_FEATURES,
        };
        self.columns().iter().map(|&i| all[i]).collect()
    }

    /// Variant for a level and a feature count (8/6 for term, 7/5/4 for document).
    pub fn for_level(level: Level, count: usize) -> Result<Self> {
        match (level, count) {
            (Level::Term, 8) => Ok(FeatureVariant::Term8),
            (Level::Term, 6) => Ok(FeatureVariant::Term6),
            (Level::Document, 7) => Ok(FeatureVariant::Doc7),
            (Level::Document, 5) => Ok(FeatureVariant::Doc5),
            (Level::Document, 4) => Ok(FeatureVariant::Doc4),
            _ => Err(Error::config(format!(
                "{count} features is not a {level}-level variant (term: 8|6, document: 7|5|4)"
            ))),
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            FeatureVariant::Term8 => "term8",
            FeatureVariant::Term6 => "term6",
            FeatureVariant::Doc7 => "doc7",
            FeatureVariant::Doc5 => "doc5",
            FeatureVariant::Doc4 => "doc4",
        }
    }

    fn from_header(names: &[&str]) -> Option<Self> {
        FeatureVariant::ALL.into_iter().find(|v| v.names() == names)
    }
}

impl fmt::Display for FeatureVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for FeatureVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureVariant::ALL
            .into_iter()
            .find(|v| v.key() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::config(format!("unknown feature variant `{s}`")))
    }
}

/// Full term-level vector. Negative sums and averages carry their sign.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TermFeatures {
    pub count_pos: usize,
    pub count_neg: usize,
    pub sum_pos: f64,
    pub sum_neg: f64,
    pub avg_pos: f64,
    pub avg_neg: f64,
    pub first_subj: f64,
    pub last_subj: f64,
}

impl TermFeatures {
    /// Summarizes token scores; zero scores are neutral and ignored.
    pub fn from_scores(scores: &[f64]) -> Self {
        let mut f = TermFeatures::default();
        for &s in scores {
            if s > 0.0 {
                f.count_pos += 1;
                f.sum_pos += s;
            } else if s < 0.0 {
                f.count_neg += 1;
                f.sum_neg += s;
            }
        }
        if f.count_pos > 0 {
            f.avg_pos = f.sum_pos / f.count_pos as f64;
        }
        if f.count_neg > 0 {
            f.avg_neg = f.sum_neg / f.count_neg as f64;
        }
        let mut subjective = scores.iter().copied().filter(|s| *s != 0.0);
        f.first_subj = subjective.next().unwrap_or(0.0);
        f.last_subj = subjective.next_back().unwrap_or(f.first_subj);
        f
    }

    pub fn to_vec(&self) -> [f64; 8] {
        [
            self.count_pos as f64,
            self.count_neg as f64,
            self.sum_pos,
            self.sum_neg,
            self.avg_pos,
            self.avg_neg,
            self.first_subj,
            self.last_subj,
        ]
    }

    pub fn project(&self, variant: FeatureVariant) -> Result<Vec<f64>> {
        project(&self.to_vec(), Level::Term, variant)
    }
}

/// Full document-level vector. `max_neg` carries a negative sign.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DocFeatures {
    pub count_pos_sent: usize,
    pub count_neg_sent: usize,
    pub max_pos: f64,
    pub max_neg: f64,
    pub first_score: f64,
    pub middle_score: f64,
    pub last_score: f64,
}

impl DocFeatures {
    /// The middle sentence is index `(n - 1) / 2` (lower median).
    pub fn from_scores(scores: &[f64]) -> Self {
        let mut f = DocFeatures::default();
        for &s in scores {
            if s > 0.0 {
                f.count_pos_sent += 1;
                f.max_pos = f.max_pos.max(s);
            } else if s < 0.0 {
                f.count_neg_sent += 1;
                f.max_neg = f.max_neg.min(s);
            }
        }
        if let (Some(first), Some(last)) = (scores.first(), scores.last()) {
            f.first_score = *first;
            f.middle_score = scores[(scores.len() - 1) / 2];
            f.last_score = *last;
        }
        f
    }

    pub fn to_vec(&self) -> [f64; 7] {
        [
            self.count_pos_sent as f64,
            self.count_neg_sent as f64,
            self.max_pos,
            self.max_neg,
            self.first_score,
            self.middle_score,
            self.last_score,
        ]
    }

    pub fn project(&self, variant: FeatureVariant) -> Result<Vec<f64>> {
        project(&self.to_vec(), Level::Document, variant)
    }
}

fn project(full: &[f64], level: Level, variant: FeatureVariant) -> Result<Vec<f64>> {
    if variant.level() != level {
        return Err(Error::config(format!(
            "variant {variant} does not belong to the {level} level"
        )));
    }
    Ok(variant.columns().iter().map(|&i| full[i]).collect())
}

pub fn term_features(scores: &[f64], variant: FeatureVariant) -> Result<Vec<f64>> {
    TermFeatures::from_scores(scores).project(variant)
}

pub fn doc_features(sentence_scores: &[f64], variant: FeatureVariant) -> Result<Vec<f64>> {
    DocFeatures::from_scores(sentence_scores).project(variant)
}

/// Fixed-width numeric rows with binary labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub variant: FeatureVariant,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl Dataset {
    pub fn new(variant: FeatureVariant, rows: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        let ds = Dataset {
            variant,
            rows,
            labels,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                self.rows.len(),
                self.labels.len()
            )));
        }
        let width = self.variant.width();
        if let Some((i, row)) = self.rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::invalid(format!(
                "row {i} has {} values, {} expects {width}",
                row.len(),
                self.variant
            )));
        }
        if self.rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset contains non-finite values"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.variant.width()
    }

    pub fn class_count(&self, label: Label) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            variant: self.variant,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// `label,<feature names>` header, full-precision values.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["label"];
        header.extend(self.variant.names());
        w.write_record(&header)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut record = vec![label.to_string()];
            record.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.into_inner()
            .map_err(|e| Error::invalid(format!("csv buffer: {e}")))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), &self.to_csv()?)
    }

    /// Reads a feature CSV; the variant is recovered from the header.
    pub fn from_csv(text: &str, source: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        let names: Vec<&str> = header.iter().collect();
        if names.first() != Some(&"label") {
            return Err(Error::parse(source, 1, "first column must be `label`"));
        }
        let variant = FeatureVariant::from_header(&names[1..]).ok_or_else(|| {
            Error::parse(source, 1, format!("unrecognized feature columns: {}", names[1..].join(",")))
        })?;
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record?;
            if record.len() != names.len() {
                return Err(Error::parse(source, line, format!(
                    "expected {} fields, found {}", names.len(), record.len()
                )));
            }
            let label = record[0]
                .trim()
                .parse::<u8>()
                .ok()
                .and_then(Label::from_u8)
                .ok_or_else(|| Error::parse(source, line, format!("bad label `{}`", &record[0])))?;
            let row = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::parse(source, line, format!("bad value `{v}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
            labels.push(label);
        }
        Dataset::new(variant, rows, labels)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_csv(&read_utf8(path)?, path)
    }
}
