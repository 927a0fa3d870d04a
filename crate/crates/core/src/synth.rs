//! Synthetic corpora and lexicons.
//!
//! [`generate`] writes a labeled corpus, a multi-sense lexicon, a lemma
//! dictionary and negation/intensifier lists in the same formats the loaders
//! read. Lemmas are ASCII identifiers (`pos007`, `neg012`, `neu120`); each
//! lemma has a few surface forms that the dictionary maps back to it.
//! Positive lemmas get positive-dominant senses and negative lemmas the
//! reverse, so class separability is controlled by how often a document
//! draws from its own polarity vocabulary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::corpus_io::Label;
use crate::error::{Error, Result};
use crate::scoring::{ARABIC_INTENSIFIERS, ARABIC_NEGATIONS};
use crate::seed::{stage_rng, StageRng};
use crate::util::write_atomic;

/// Transliterated tool words used unless Arabic ones are requested.
pub const ASCII_NEGATIONS: [&str; 4] = ["la", "lan", "lam", "laysa"];
pub const ASCII_INTENSIFIERS: [&str; 4] = ["ifrat", "jiddan", "kabiran", "mutlaq"];

const SURFACE_SUFFIXES: [&str; 3] = ["", "a", "un"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub positive_lemmas: usize,
    pub negative_lemmas: usize,
    pub neutral_lemmas: usize,
    pub docs_per_class: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub min_sentence: usize,
    pub max_sentence: usize,
    /// Probability that a token is a sentiment word.
    pub density: f64,
    /// Probability that a sentiment word comes from the document's own
    /// polarity vocabulary.
    pub polarity_bias: f64,
    /// Fraction of sentiment words given a negation or intensifier neighbor.
    /// Negated words are drawn from the opposite vocabulary so that the
    /// phrase still expresses the intended polarity.
    pub rule_fraction: f64,
    pub min_senses: usize,
    pub max_senses: usize,
    /// Emit Arabic negation and intensifier words instead of ASCII ones.
    pub arabic_tool_words: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            positive_lemmas: 60,
            negative_lemmas: 60,
            neutral_lemmas: 300,
            docs_per_class: 250,
            min_tokens: 40,
            max_tokens: 120,
            min_sentence: 5,
            max_sentence: 14,
            density: 0.15,
            polarity_bias: 0.75,
            rule_fraction: 0.1,
            min_senses: 1,
            max_senses: 4,
            arabic_tool_words: false,
            seed: 7,
        }
    }
}

impl SynthConfig {
    /// Dense, polarity-pure documents without rule words: every document
    /// carries only its own class's sentiment lemmas.
    pub fn separable(docs_per_class: usize, seed: u64) -> Self {
        SynthConfig {
            docs_per_class,
            density: 0.4,
            polarity_bias: 1.0,
            rule_fraction: 0.0,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("synth: {what}")))
            }
        };
        check(self.positive_lemmas > 0 && self.negative_lemmas > 0, "need positive and negative lemmas")?;
        check(self.neutral_lemmas > 0, "need neutral lemmas")?;
        check(self.docs_per_class > 0, "docs_per_class must be positive")?;
        check(
            self.min_tokens > 0 && self.min_tokens <= self.max_tokens,
            "token range must satisfy 0 < min <= max",
        )?;
        check(
            self.min_sentence > 0 && self.min_sentence <= self.max_sentence,
            "sentence range must satisfy 0 < min <= max",
        )?;
        check((0.0..1.0).contains(&self.density), "density must lie in [0, 1)")?;
        check(
            self.polarity_bias > 0.5 && self.polarity_bias <= 1.0,
            "polarity_bias must lie in (0.5, 1]",
        )?;
        check((0.0..=1.0).contains(&self.rule_fraction), "rule_fraction must lie in [0, 1]")?;
        check(
            self.min_senses > 0 && self.min_senses <= self.max_senses,
            "sense range must satisfy 0 < min <= max",
        )?;
        Ok(())
    }

    fn negations(&self) -> [&'static str; 4] {
        if self.arabic_tool_words {
            ARABIC_NEGATIONS
        } else {
            ASCII_NEGATIONS
        }
    }

    fn intensifiers(&self) -> [&'static str; 4] {
        if self.arabic_tool_words {
            ARABIC_INTENSIFIERS
        } else {
            ASCII_INTENSIFIERS
        }
    }
}

/// Paths of everything [`generate`] wrote.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthOutput {
    pub corpus: PathBuf,
    pub lexicon: PathBuf,
    pub lemmas: PathBuf,
    pub negations: PathBuf,
    pub intensifiers: PathBuf,
}

impl SynthOutput {
    pub fn under(out: &Path) -> Self {
        SynthOutput {
            corpus: out.join("corpus"),
            lexicon: out.join("lexicon.tsv"),
            lemmas: out.join("lemmas.tsv"),
            negations: out.join("negations.txt"),
            intensifiers: out.join("intensifiers.txt"),
        }
    }
}

fn lemma_name(prefix: &str, i: usize) -> String {
    format!("{prefix}{i:03}")
}

fn surface(lemma: &str, form: usize) -> String {
    format!("{lemma}{}", SURFACE_SUFFIXES[form])
}

/// Dominant score in [0.4, 0.9], the other at most half of it and never
/// pushing the pair over 1. Scores sit on a 1/1000 grid so the TSV holds
/// them exactly as drawn.
fn sense(rng: &mut StageRng) -> (f64, f64) {
    let major = rng.random_range(400..=900u32);
    let minor = rng.random_range(0..=(major / 2).min(1000 - major));
    (major as f64 / 1000.0, minor as f64 / 1000.0)
}

fn lexicon_tsv(cfg: &SynthConfig, rng: &mut StageRng) -> String {
    let mut out = String::from("# lemma\tpositive\tnegative\n");
    for (prefix, count, positive) in [
        ("pos", cfg.positive_lemmas, true),
        ("neg", cfg.negative_lemmas, false),
    ] {
        for i in 0..count {
            let lemma = lemma_name(prefix, i);
            for _ in 0..rng.random_range(cfg.min_senses..=cfg.max_senses) {
                let (major, minor) = sense(rng);
                let (p, n) = if positive { (major, minor) } else { (minor, major) };
                writeln!(out, "{lemma}\t{p:.3}\t{n:.3}").unwrap();
            }
        }
    }
    out
}

fn lemmas_tsv(cfg: &SynthConfig) -> String {
    let mut out = String::from("# surface\tlemma\n");
    for (prefix, count) in [
        ("pos", cfg.positive_lemmas),
        ("neg", cfg.negative_lemmas),
        ("neu", cfg.neutral_lemmas),
    ] {
        for i in 0..count {
            let lemma = lemma_name(prefix, i);
            for form in 1..SURFACE_SUFFIXES.len() {
                writeln!(out, "{}\t{lemma}", surface(&lemma, form)).unwrap();
            }
        }
    }
    out
}

fn document(cfg: &SynthConfig, label: Label, rng: &mut StageRng, neutral: &Zipf<f64>) -> String {
    let n_tokens = rng.random_range(cfg.min_tokens..=cfg.max_tokens);
    let mut words: Vec<String> = Vec::with_capacity(n_tokens + 8);
    let mut sentence_ends: Vec<usize> = Vec::new();
    let mut remaining = rng.random_range(cfg.min_sentence..=cfg.max_sentence);
    let negations = cfg.negations();
    let intensifiers = cfg.intensifiers();

    for _ in 0..n_tokens {
        if rng.random_bool(cfg.density) {
            // 0: none, 1: negation before, 2: intensifier before, 3: after.
            let rule = if rng.random_bool(cfg.rule_fraction) {
                rng.random_range(1..=3)
            } else {
                0
            };
            let own = rng.random_bool(cfg.polarity_bias);
            // A negated word carries the opposite polarity of what it expresses.
            let positive = ((label == Label::Positive) == own) != (rule == 1);
            let (prefix, count) = if positive {
                ("pos", cfg.positive_lemmas)
            } else {
                ("neg", cfg.negative_lemmas)
            };
            let lemma = lemma_name(prefix, rng.random_range(0..count));
            let word = surface(&lemma, rng.random_range(0..SURFACE_SUFFIXES.len()));
            match rule {
                1 => words.push(negations[rng.random_range(0..negations.len())].to_string()),
                2 => words.push(intensifiers[rng.random_range(0..intensifiers.len())].to_string()),
                _ => {}
            }
            words.push(word);
            if rule == 3 {
                words.push(intensifiers[rng.random_range(0..intensifiers.len())].to_string());
            }
        } else {
            let rank = neutral.sample(rng) as usize;
            let lemma = lemma_name("neu", rank.clamp(1, cfg.neutral_lemmas) - 1);
            words.push(surface(&lemma, rng.random_range(0..SURFACE_SUFFIXES.len())));
        }
        remaining -= 1;
        if remaining == 0 {
            sentence_ends.push(words.len() - 1);
            remaining = rng.random_range(cfg.min_sentence..=cfg.max_sentence);
        }
    }
    if sentence_ends.last() != Some(&(words.len() - 1)) {
        sentence_ends.push(words.len() - 1);
    }
    for &end in &sentence_ends {
        words[end].push('.');
    }
    let mut text = words.join(" ");
    text.push('\n');
    text
}

/// Writes `corpus/{pos,neg}/NNNN.txt`, `lexicon.tsv`, `lemmas.tsv`,
/// `negations.txt` and `intensifiers.txt` under `out`. Output depends only
/// on `cfg`.
pub fn generate(cfg: &SynthConfig, out: impl AsRef<Path>) -> Result<SynthOutput> {
    cfg.validate()?;
    let paths = SynthOutput::under(out.as_ref());
    let mut rng = stage_rng(cfg.seed, "synth");
    let neutral = Zipf::new(cfg.neutral_lemmas as f64, 1.0)
        .map_err(|e| Error::config(format!("synth: {e}")))?;

    write_atomic(&paths.lexicon, lexicon_tsv(cfg, &mut rng).as_bytes())?;
    write_atomic(&paths.lemmas, lemmas_tsv(cfg).as_bytes())?;
    write_atomic(&paths.negations, (cfg.negations().join("\n") + "\n").as_bytes())?;
    write_atomic(&paths.intensifiers, (cfg.intensifiers().join("\n") + "\n").as_bytes())?;

    for (dir, label) in [("pos", Label::Positive), ("neg", Label::Negative)] {
        for i in 0..cfg.docs_per_class {
            let text = document(cfg, label, &mut rng, &neutral);
            write_atomic(&paths.corpus.join(dir).join(format!("{i:04}.txt")), text.as_bytes())?;
        }
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::{load_corpus, LemmaDictionary, Preprocessor};
    use crate::lexicon::{load_lexicon, PriorFormula};
    use std::fs;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            docs_per_class: 6,
            seed,
            ..Default::default()
        }
    }

    fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
        let mut out = Vec::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
                }
            }
        }
        out.sort();
        out
    }

    #[test]
    fn outputs_parse_and_are_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let paths = generate(&small(3), a.path()).unwrap();
        generate(&small(3), b.path()).unwrap();
        assert_eq!(read_tree(a.path()), read_tree(b.path()));

        let docs = load_corpus(&paths.corpus).unwrap();
        assert_eq!(docs.len(), 12);
        let lex = load_lexicon(&paths.lexicon).unwrap();
        assert_eq!(lex.len(), 120);
        let priors = lex.priors(PriorFormula::MaxSub).unwrap();
        assert!(priors.get("pos000").unwrap() > 0.0);
        assert!(priors.get("neg000").unwrap() < 0.0);
        let dict = LemmaDictionary::load(&paths.lemmas).unwrap();
        assert_eq!(dict.lemmatize("pos004un"), "pos004");

        let c = tempfile::tempdir().unwrap();
        generate(&small(4), c.path()).unwrap();
        assert_ne!(read_tree(a.path()), read_tree(c.path()));
    }

    #[test]
    fn zero_density_has_no_sentiment_words() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            density: 0.0,
            rule_fraction: 1.0,
            ..small(1)
        };
        let paths = generate(&cfg, dir.path()).unwrap();
        let docs = Preprocessor::new(LemmaDictionary::load(&paths.lemmas).unwrap())
            .process_all(&load_corpus(&paths.corpus).unwrap());
        for d in &docs {
            assert!(d.lemmas.iter().all(|l| l.starts_with("neu")), "{}", d.id);
        }
    }

    #[test]
    fn separable_preset_is_pure() {
        let dir = tempfile::tempdir().unwrap();
        let paths = generate(&SynthConfig::separable(5, 2), dir.path()).unwrap();
        let docs = Preprocessor::new(LemmaDictionary::load(&paths.lemmas).unwrap())
            .process_all(&load_corpus(&paths.corpus).unwrap());
        for d in &docs {
            let other = if d.label == Label::Positive { "neg" } else { "pos" };
            assert!(!d.lemmas.iter().any(|l| l.starts_with(other)));
        }
    }

    #[test]
    fn invalid_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            polarity_bias: 0.4,
            ..small(1)
        };
        assert!(generate(&cfg, dir.path()).unwrap_err().is_config());
    }
}
