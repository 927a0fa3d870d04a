//! Token scoring, negation/intensification rules and sentence scores.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{normalize_surface, Label, TokenizedDocument};
use crate::error::{Error, Result};
use crate::lexicon::{PolarityPair, Priors};
use crate::util::read_utf8;

pub const ARABIC_NEGATIONS: [&str; 4] = ["لا", "لن", "لم", "ليس"];
pub const ARABIC_INTENSIFIERS: [&str; 4] = ["إفراط", "جدا", "كبيراً", "مطلق"];

/// Negation and intensifier word lists plus the adjacency window.
///
/// Words are stored in lookup form (see [`normalize_surface`]) and matched
/// against token surfaces, not lemmas.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleConfig {
    negations: BTreeSet<String>,
    intensifiers: BTreeSet<String>,
    window: usize,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig::new(ARABIC_NEGATIONS, ARABIC_INTENSIFIERS, 1)
            .expect("built-in word lists are valid")
    }
}

impl RuleConfig {
    pub fn new(
        negations: impl IntoIterator<Item = impl AsRef<str>>,
        intensifiers: impl IntoIterator<Item = impl AsRef<str>>,
        window: usize,
    ) -> Result<Self> {
        let norm = |words: Vec<String>| -> BTreeSet<String> {
            words
                .iter()
                .map(|w| normalize_surface(w))
                .filter(|w| !w.is_empty())
                .collect()
        };
        let negations = norm(negations.into_iter().map(|w| w.as_ref().to_string()).collect());
        let intensifiers = norm(intensifiers.into_iter().map(|w| w.as_ref().to_string()).collect());
        if window == 0 {
            return Err(Error::config("rule window must be at least 1"));
        }
        if let Some(w) = negations.intersection(&intensifiers).next() {
            return Err(Error::config(format!(
                "`{w}` is listed as both a negation and an intensifier"
            )));
        }
        Ok(RuleConfig {
            negations,
            intensifiers,
            window,
        })
    }

    /// Reads two word lists, one word per line; blank and `#` lines skipped.
    pub fn load(negations: &Path, intensifiers: &Path, window: usize) -> Result<Self> {
        RuleConfig::new(load_word_list(negations)?, load_word_list(intensifiers)?, window)
    }

    pub fn with_window(mut self, window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::config("rule window must be at least 1"));
        }
        self.window = window;
        Ok(self)
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn negations(&self) -> impl Iterator<Item = &str> {
        self.negations.iter().map(String::as_str)
    }

    pub fn intensifiers(&self) -> impl Iterator<Item = &str> {
        self.intensifiers.iter().map(String::as_str)
    }

    pub fn is_negation(&self, surface: &str) -> bool {
        self.negations.contains(&normalize_surface(surface))
    }

    pub fn is_intensifier(&self, surface: &str) -> bool {
        self.intensifiers.contains(&normalize_surface(surface))
    }

    pub fn is_rule_word(&self, surface: &str) -> bool {
        let form = normalize_surface(surface);
        self.negations.contains(&form) || self.intensifiers.contains(&form)
    }
}

pub fn load_word_list(path: &Path) -> Result<Vec<String>> {
    Ok(read_utf8(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredToken {
    pub index: usize,
    pub prior: f64,
    pub adjusted: f64,
}

/// Looks up each token's lemma prior. Unknown lemmas and rule words score 0.
pub fn score_tokens(doc: &TokenizedDocument, priors: &Priors, rules: &RuleConfig) -> Vec<ScoredToken> {
    doc.tokens
        .iter()
        .zip(&doc.lemmas)
        .enumerate()
        .map(|(index, (token, lemma))| {
            let prior = if rules.is_rule_word(&token.surface) {
                0.0
            } else {
                priors.get(lemma).unwrap_or(0.0)
            };
            ScoredToken {
                index,
                prior,
                adjusted: prior,
            }
        })
        .collect()
}

pub fn negate(score: f64) -> f64 {
    -score
}

/// Pushes a nonzero score to ±1, keeping its sign.
pub fn intensify(score: f64) -> f64 {
    if score > 0.0 {
        1.0
    } else if score < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Applies negation, then intensification, to every token with a nonzero
/// prior. A negation word within `window` tokens before the term flips its
/// sign; an intensifier within `window` tokens on either side pushes it to
/// ±1. Neither rule reaches across a sentence boundary.
pub fn apply_rules(scored: &[ScoredToken], doc: &TokenizedDocument, cfg: &RuleConfig) -> Vec<ScoredToken> {
    let mut out = scored.to_vec();
    let surface = |i: usize| doc.tokens[i].surface.as_str();
    for sentence in &doc.sentences {
        for i in sentence.clone() {
            let Some(tok) = out.get_mut(i) else { continue };
            if tok.prior == 0.0 {
                continue;
            }
            let before = i.saturating_sub(cfg.window).max(sentence.start)..i;
            let after = (i + 1)..(i + 1 + cfg.window).min(sentence.end);

            let mut value = tok.prior;
            if before.clone().any(|j| cfg.is_negation(surface(j))) {
                value = negate(value);
            }
            if before.chain(after).any(|j| cfg.is_intensifier(surface(j))) {
                value = intensify(value);
            }
            tok.adjusted = value;
        }
    }
    out
}

/// Largest positive score and largest negative magnitude in a sentence.
pub fn s_max(term_scores: &[f64]) -> PolarityPair {
    let pos = term_scores.iter().filter(|s| **s > 0.0).fold(0.0, |m, s| f64::max(m, *s));
    let neg = term_scores
        .iter()
        .filter(|s| **s < 0.0)
        .fold(0.0, |m, s| f64::max(m, s.abs()));
    PolarityPair { pos, neg }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SentenceFormula {
    #[serde(rename = "max_sub")]
    MaxSub,
    #[serde(rename = "max_max")]
    MaxMax,
}

impl SentenceFormula {
    pub const ALL: [SentenceFormula; 2] = [SentenceFormula::MaxMax, SentenceFormula::MaxSub];

    pub fn key(self) -> &'static str {
        match self {
            SentenceFormula::MaxSub => "max_sub",
            SentenceFormula::MaxMax => "max_max",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            SentenceFormula::MaxSub => "D_Max_Sub",
            SentenceFormula::MaxMax => "D_Max_Max",
        }
    }
}

impl fmt::Display for SentenceFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SentenceFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        let key = key.strip_prefix("d_").unwrap_or(&key);
        SentenceFormula::ALL
            .into_iter()
            .find(|f| f.key() == key)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown sentence formula `{s}` (expected max_sub or max_max)"
                ))
            })
    }
}

/// `max_sub`: pos − neg. `max_max`: the larger side, negative when the
/// negative side is strictly larger.
pub fn sentence_score(pair: PolarityPair, formula: SentenceFormula) -> f64 {
    match formula {
        SentenceFormula::MaxSub => pair.difference(),
        SentenceFormula::MaxMax => pair.signed_max(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub index: usize,
    pub value: f64,
    pub formula: SentenceFormula,
}

/// A document with per-token scores, rules already applied (or not).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    pub id: String,
    pub label: Label,
    pub tokens: Vec<ScoredToken>,
    pub sentences: Vec<Range<usize>>,
    pub rules_applied: bool,
}

impl ScoredDocument {
    pub fn adjusted_scores(&self) -> Vec<f64> {
        self.tokens.iter().map(|t| t.adjusted).collect()
    }

    pub fn sentence_scores(&self, formula: SentenceFormula) -> Vec<SentenceScore> {
        self.sentences
            .iter()
            .enumerate()
            .map(|(index, range)| {
                let terms: Vec<f64> = self.tokens[range.clone()].iter().map(|t| t.adjusted).collect();
                SentenceScore {
                    index,
                    value: sentence_score(s_max(&terms), formula),
                    formula,
                }
            })
            .collect()
    }
}

/// Prior lookup plus optional rule stage, shared by both analysis levels.
#[derive(Clone, Debug)]
pub struct Scorer<'a> {
    pub priors: &'a Priors,
    pub rules: &'a RuleConfig,
    pub apply_rules: bool,
}

impl Scorer<'_> {
    pub fn score(&self, doc: &TokenizedDocument) -> ScoredDocument {
        let base = score_tokens(doc, self.priors, self.rules);
        let tokens = if self.apply_rules {
            apply_rules(&base, doc, self.rules)
        } else {
            base
        };
        ScoredDocument {
            id: doc.id.clone(),
            label: doc.label,
            tokens,
            sentences: doc.sentences.clone(),
            rules_applied: self.apply_rules,
        }
    }
}
