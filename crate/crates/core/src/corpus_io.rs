//! Corpus loading and preprocessing.
//!
//! A corpus lives on disk as `<root>/pos/*.txt` and `<root>/neg/*.txt`, one
//! UTF-8 document per file. Preprocessing turns each document into tokens
//! (maximal non-whitespace runs), sentence ranges, and one lemma per token.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::read_utf8;

/// Binary polarity class. Encoded externally as 1 (positive) / 0 (negative).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub const BOTH: [Label; 2] = [Label::Positive, Label::Negative];

    pub fn as_u8(self) -> u8 {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }

    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }

    /// ±1 target used by margin-based learners.
    pub fn sign(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl From<Label> for u8 {
    fn from(l: Label) -> u8 {
        l.as_u8()
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        Label::from_u8(v).ok_or_else(|| format!("label must be 0 or 1, got {v}"))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDocument {
    /// Path relative to the corpus root, e.g. `pos/a.txt`.
    pub id: String,
    pub label: Label,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Index in the unstripped token sequence of the document.
    pub position: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, position: usize) -> Self {
        Token {
            surface: surface.into(),
            position,
        }
    }
}

/// A preprocessed document.
///
/// `sentences` are half-open ranges over `tokens` that partition the token
/// indices; sentences left empty by noise stripping are dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub id: String,
    pub label: Label,
    pub tokens: Vec<Token>,
    pub sentences: Vec<Range<usize>>,
    pub lemmas: Vec<String>,
}

impl TokenizedDocument {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Index of the sentence holding token `i`.
    pub fn sentence_of(&self, i: usize) -> Option<usize> {
        self.sentences.iter().position(|r| r.contains(&i))
    }
}

/// Loads every `*.txt` under `<root>/pos` (label 1) and `<root>/neg`
/// (label 0), ordered by relative path.
pub fn load_corpus(root: impl AsRef<Path>) -> Result<Vec<RawDocument>> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(Error::config(format!(
            "corpus root {} is not a directory",
            root.display()
        )));
    }

    for dir in ["pos", "neg"] {
        if !root.join(dir).is_dir() {
            return Err(Error::config(format!(
                "missing subdirectory {dir}/ under {}",
                root.display()
            )));
        }
    }

    let mut files: Vec<(String, PathBuf, Label)> = Vec::new();
    for (dir, label, name) in [
        ("pos", Label::Positive, "positive"),
        ("neg", Label::Negative, "negative"),
    ] {
        let sub = root.join(dir);
        let before = files.len();
        for entry in fs::read_dir(&sub).map_err(|e| Error::io(&sub, e))? {
            let entry = entry.map_err(|e| Error::io(&sub, e))?;
            let path = entry.path();
            if path.is_file() && path.extension().is_some_and(|x| x == "txt") {
                let file_name = entry.file_name().to_string_lossy().into_owned();
                files.push((format!("{dir}/{file_name}"), path, label));
            }
        }
        if files.len() == before {
            return Err(Error::config(format!(
                "no {name} documents in {}",
                sub.display()
            )));
        }
    }
    files.sort_by(|a, b| a.0.cmp(&b.0));

    files
        .into_par_iter()
        .map(|(id, path, label)| {
            let text = read_utf8(&path)?;
            if text.trim().is_empty() {
                return Err(Error::invalid(format!("{}: empty document", path.display())));
            }
            Ok(RawDocument { id, label, text })
        })
        .collect()
}

/// Drops tokens that carry no letter (numbers, punctuation, symbols).
/// Positions of kept tokens are untouched.
pub fn strip_noise(tokens: &[Token]) -> Vec<Token> {
    tokens.iter().filter(|t| is_word(&t.surface)).cloned().collect()
}

fn is_word(surface: &str) -> bool {
    surface.chars().any(char::is_alphabetic)
}

/// Arabic short vowels, tanween, shadda, sukun, Quranic marks and tatweel.
pub fn is_diacritic(c: char) -> bool {
    matches!(c,
        '\u{0610}'..='\u{061A}'
        | '\u{064B}'..='\u{065F}'
        | '\u{0670}'
        | '\u{06D6}'..='\u{06ED}'
        | '\u{0640}')
}

pub fn remove_diacritics(s: &str) -> String {
    s.chars().filter(|&c| !is_diacritic(c)).collect()
}

/// Lookup form of a surface token: diacritics removed and surrounding
/// punctuation trimmed, so `"جيداً."` and `جيدا` compare equal.
pub fn normalize_surface(surface: &str) -> String {
    let bare = remove_diacritics(surface);
    bare.trim_matches(|c: char| !c.is_alphanumeric()).to_string()
}

/// Whitespace tokenizer with sentence segmentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segmenter {
    /// Characters that end a sentence. Newlines always do.
    pub boundaries: Vec<char>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Segmenter {
            boundaries: vec!['.', '!', '?', '؟', '؛'],
        }
    }
}

impl Segmenter {
    pub fn with_boundaries(boundaries: impl IntoIterator<Item = char>) -> Self {
        Segmenter {
            boundaries: boundaries.into_iter().collect(),
        }
    }

    /// Splits `text` into tokens and sentence ranges over those tokens.
    ///
    /// A token closes its sentence when it holds a boundary character that is
    /// not wedged between two alphanumerics (`3.5` stays inside a sentence).
    pub fn segment(&self, text: &str) -> (Vec<Token>, Vec<Range<usize>>) {
        let mut tokens = Vec::new();
        let mut sentences = Vec::new();
        let mut start = 0;
        for line in text.split('\n') {
            for word in line.split_whitespace() {
                tokens.push(Token::new(word, tokens.len()));
                if self.ends_sentence(word) {
                    sentences.push(start..tokens.len());
                    start = tokens.len();
                }
            }
            if start < tokens.len() {
                sentences.push(start..tokens.len());
                start = tokens.len();
            }
        }
        (tokens, sentences)
    }

    fn ends_sentence(&self, word: &str) -> bool {
        let chars: Vec<char> = word.chars().collect();
        chars.iter().enumerate().any(|(i, c)| {
            if !self.boundaries.contains(c) {
                return false;
            }
            let inner = i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_alphanumeric()
                && chars[i + 1].is_alphanumeric();
            !inner
        })
    }
}

/// Tokenizes with the default boundary set `. ! ? ؟ ؛` plus newline.
pub fn tokenize_and_segment(text: &str) -> (Vec<Token>, Vec<Range<usize>>) {
    Segmenter::default().segment(text)
}

/// Surface → lemma map with a light-stemming fallback.
#[derive(Clone, Debug)]
pub struct LemmaDictionary {
    entries: HashMap<String, String>,
    prefixes: Vec<String>,
    suffixes: Vec<String>,
    min_stem_chars: usize,
}

pub const DEFAULT_PREFIXES: [&str; 8] = ["و", "ف", "ال", "وال", "بال", "كال", "فال", "لل"];
pub const DEFAULT_SUFFIXES: [&str; 8] = ["ها", "ان", "ات", "ون", "ين", "ه", "ة", "ي"];

impl Default for LemmaDictionary {
    fn default() -> Self {
        LemmaDictionary {
            entries: HashMap::new(),
            prefixes: DEFAULT_PREFIXES.iter().map(|s| s.to_string()).collect(),
            suffixes: DEFAULT_SUFFIXES.iter().map(|s| s.to_string()).collect(),
            min_stem_chars: 2,
        }
    }
}

impl LemmaDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_affixes(
        mut self,
        prefixes: impl IntoIterator<Item = impl Into<String>>,
        suffixes: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        self.prefixes = prefixes.into_iter().map(Into::into).collect();
        self.suffixes = suffixes.into_iter().map(Into::into).collect();
        self
    }

    /// Shortest stem, in characters, affix stripping may leave behind.
    pub fn with_min_stem_chars(mut self, n: usize) -> Self {
        self.min_stem_chars = n;
        self
    }

    pub fn insert(&mut self, surface: &str, lemma: impl Into<String>) {
        self.entries.insert(remove_diacritics(surface), lemma.into());
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `surface<TAB>lemma` lines; blank and `#` lines are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_utf8(path)?;
        let mut dict = LemmaDictionary::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            match (fields.next(), fields.next(), fields.next()) {
                (Some(surface), Some(lemma), None) if !surface.is_empty() && !lemma.is_empty() => {
                    dict.insert(surface, lemma)
                }
                _ => {
                    return Err(Error::parse(
                        path,
                        i + 1,
                        "expected `surface<TAB>lemma`",
                    ))
                }
            }
        }
        Ok(dict)
    }

    /// Dictionary hit, else strip one longest prefix and one longest suffix.
    /// Never fails; an unmatched word is its own lemma.
    pub fn lemmatize(&self, surface: &str) -> String {
        let form = normalize_surface(surface);
        if let Some(lemma) = self.entries.get(&form) {
            return lemma.clone();
        }
        let stem = self.strip_affixes(&form);
        match self.entries.get(stem) {
            Some(lemma) => lemma.clone(),
            None => stem.to_string(),
        }
    }

    /// Light stemming only, no dictionary involved.
    pub fn strip_affixes<'a>(&self, word: &'a str) -> &'a str {
        let min = self.min_stem_chars;
        let fits = |rest: &str| rest.chars().count() >= min;

        let after_prefix = self
            .prefixes
            .iter()
            .filter_map(|p| word.strip_prefix(p.as_str()))
            .filter(|rest| fits(rest))
            .min_by_key(|rest| rest.len())
            .unwrap_or(word);
        self.suffixes
            .iter()
            .filter_map(|s| after_prefix.strip_suffix(s.as_str()))
            .filter(|rest| fits(rest))
            .min_by_key(|rest| rest.len())
            .unwrap_or(after_prefix)
    }
}

pub fn lemmatize(token: &Token, dict: &LemmaDictionary) -> String {
    dict.lemmatize(&token.surface)
}

/// Tokenize, segment, strip noise and lemmatize in one pass.
#[derive(Clone, Debug, Default)]
pub struct Preprocessor {
    pub segmenter: Segmenter,
    pub dictionary: LemmaDictionary,
}

impl Preprocessor {
    pub fn new(dictionary: LemmaDictionary) -> Self {
        Preprocessor {
            segmenter: Segmenter::default(),
            dictionary,
        }
    }

    pub fn process(&self, raw: &RawDocument) -> TokenizedDocument {
        let (all, raw_sentences) = self.segmenter.segment(&raw.text);
        let mut tokens = Vec::with_capacity(all.len());
        let mut sentences = Vec::with_capacity(raw_sentences.len());
        for range in raw_sentences {
            let start = tokens.len();
            tokens.extend(strip_noise(&all[range]));
            if tokens.len() > start {
                sentences.push(start..tokens.len());
            }
        }
        let lemmas = tokens
            .iter()
            .map(|t| self.dictionary.lemmatize(&t.surface))
            .collect();
        TokenizedDocument {
            id: raw.id.clone(),
            label: raw.label,
            tokens,
            sentences,
            lemmas,
        }
    }

    pub fn process_all(&self, docs: &[RawDocument]) -> Vec<TokenizedDocument> {
        docs.par_iter().map(|d| self.process(d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surfaces(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    fn toks(words: &[&str]) -> Vec<Token> {
        words
            .iter()
            .enumerate()
            .map(|(i, w)| Token::new(*w, i))
            .collect()
    }

    #[test]
    fn strip_noise_drops_numbers_and_punctuation() {
        let kept = strip_noise(&toks(&["فيلم", "123", "!"]));
        assert_eq!(surfaces(&kept), vec!["فيلم"]);
        assert!(strip_noise(&[]).is_empty());
    }

    #[test]
    fn strip_noise_rating_token() {
        // Brute-force char-class check: "10/1" has digits and a slash only.
        let rating = "10/1";
        assert!(rating
            .chars()
            .all(|c| c.is_ascii_digit() || c.is_ascii_punctuation()));
        let kept = strip_noise(&toks(&["رائع", rating]));
        assert_eq!(surfaces(&kept), vec!["رائع"]);
    }

    #[test]
    fn strip_noise_keeps_positions() {
        let kept = strip_noise(&toks(&["1", "a", "2", "b"]));
        let pos: Vec<usize> = kept.iter().map(|t| t.position).collect();
        assert_eq!(pos, vec![1, 3]);
    }

    #[test]
    fn segmentation_rules() {
        let (tokens, sentences) = tokenize_and_segment("جيد. سيء");
        assert_eq!(tokens.len(), 2);
        assert_eq!(sentences, vec![0..1, 1..2]);

        let (tokens, sentences) = tokenize_and_segment("فيلم رائع");
        assert_eq!(tokens.len(), 2);
        assert_eq!(sentences, vec![0..2]);

        let (_, sentences) = tokenize_and_segment("a b\nc d");
        assert_eq!(sentences, vec![0..2, 2..4]);

        let (_, sentences) = tokenize_and_segment("score 3.5 today");
        assert_eq!(sentences.len(), 1);

        let (tokens, sentences) = tokenize_and_segment("  \n ");
        assert!(tokens.is_empty() && sentences.is_empty());
    }

    #[test]
    fn sample_review_has_several_sentences() {
        let text = "نعم إنه فيلم \"الحسنات\" ولكن موضوعه ذكي ، كما أنه مؤثر وسينير لديك رغبة شديدة في البكاء ، إلى جانب أنه مرح وعلى درجة عالية من الإخراج والتمثيل. إنه يستحق ثمن التذكرة والساعتين اللتين ستضيعهما من وقتك الثمين على مشاهدته. التقييم العام : 3";
        let markers = text
            .chars()
            .filter(|c| Segmenter::default().boundaries.contains(c))
            .count();
        assert_eq!(markers, 2);
        let (_, sentences) = tokenize_and_segment(text);
        assert_eq!(sentences.len(), markers + 1);
    }

    #[test]
    fn lemmatize_dictionary_and_fallbacks() {
        let mut dict = LemmaDictionary::new();
        dict.insert("ساخن", "sAxin");
        assert_eq!(lemmatize(&Token::new("ساخن", 0), &dict), "sAxin");
        assert_eq!(lemmatize(&Token::new("ساخن.", 0), &dict), "sAxin");
        assert_eq!(lemmatize(&Token::new("قلم", 0), &dict), "قلم");
        assert_eq!(lemmatize(&Token::new("unknown", 0), &dict), "unknown");
    }

    #[test]
    fn lemmatize_longest_prefix() {
        let dict = LemmaDictionary::new();
        let word = "والفيلم";
        // Oracle: every listed prefix the word starts with; keep the longest.
        let longest = DEFAULT_PREFIXES
            .iter()
            .filter(|p| word.starts_with(*p))
            .max_by_key(|p| p.chars().count())
            .unwrap();
        assert_eq!(*longest, "وال");
        assert_eq!(dict.lemmatize(word), word.strip_prefix(longest).unwrap());
        assert_eq!(dict.lemmatize(word), "فيلم");
    }

    #[test]
    fn lemmatize_prefix_then_suffix() {
        let dict = LemmaDictionary::new();
        assert_eq!(dict.lemmatize("والممثلون"), "ممثل");
        // Stem would become too short.
        assert_eq!(dict.lemmatize("وه"), "وه");
    }

    #[test]
    fn diacritics_removed_before_lookup() {
        let mut dict = LemmaDictionary::new();
        dict.insert("جيد", "jay~id");
        assert_eq!(dict.lemmatize("جَيِّد"), "jay~id");
        assert_eq!(normalize_surface("كبيراً،"), "كبيرا");
    }

    #[test]
    fn preprocess_drops_emptied_sentences() {
        let raw = RawDocument {
            id: "pos/x.txt".into(),
            label: Label::Positive,
            text: "جيد جدا. 10/10 ! سيء".into(),
        };
        let doc = Preprocessor::default().process(&raw);
        assert_eq!(surfaces(&doc.tokens), vec!["جيد", "جدا.", "سيء"]);
        assert_eq!(doc.sentences, vec![0..2, 2..3]);
        assert_eq!(doc.lemmas.len(), 3);
        assert_eq!(doc.sentence_of(2), Some(1));

        let blank = RawDocument {
            text: "123 !".into(),
            ..raw
        };
        let doc = Preprocessor::default().process(&blank);
        assert!(doc.is_empty() && doc.sentences.is_empty());
    }

    #[test]
    fn load_corpus_layout_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        fs::create_dir_all(root.join("pos")).unwrap();
        fs::create_dir_all(root.join("neg")).unwrap();

        let err = load_corpus(root).unwrap_err();
        assert!(err.to_string().contains("no positive documents"), "{err}");
        assert!(err.is_config());

        fs::write(root.join("pos/a.txt"), "جيد").unwrap();
        fs::write(root.join("neg/b.txt"), "سيء").unwrap();
        fs::write(root.join("neg/notes.md"), "ignored").unwrap();
        let docs = load_corpus(root).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "neg/b.txt");
        assert_eq!(docs[0].label, Label::Negative);
        assert_eq!(docs[1].id, "pos/a.txt");
        assert_eq!(docs[1].label, Label::Positive);

        fs::write(root.join("pos/bad.txt"), [0xff, 0xfe, 0x00]).unwrap();
        let err = load_corpus(root).unwrap_err();
        assert!(matches!(err, Error::Decode { ref path } if path.ends_with("bad.txt")));
    }

    #[test]
    fn load_corpus_missing_subdir() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("pos")).unwrap();
        let err = load_corpus(dir.path()).unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("neg/"));
    }

    #[test]
    fn lemma_dictionary_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lemmas.tsv");
        fs::write(&path, "# comment\nساخن\tsAxin\n\nجيد\tjay~id\n").unwrap();
        let dict = LemmaDictionary::load(&path).unwrap();
        assert_eq!(dict.len(), 2);
        assert_eq!(dict.lemmatize("ساخن"), "sAxin");

        fs::write(&path, "ok\tfine\nbroken line\n").unwrap();
        let err = LemmaDictionary::load(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn strip_noise_idempotent(words in proptest::collection::vec("[a-c0-9!.,]{0,4}", 0..12)) {
                let tokens: Vec<Token> = words.iter().filter(|w| !w.is_empty()).enumerate()
                    .map(|(i, w)| Token::new(w.as_str(), i)).collect();
                let once = strip_noise(&tokens);
                prop_assert_eq!(strip_noise(&once), once);
            }

            #[test]
            fn sentences_partition_tokens(text in "[a-c .!?\n0-9]{0,60}") {
                let raw = RawDocument { id: "d".into(), label: Label::Positive, text };
                let doc = Preprocessor::default().process(&raw);
                let mut next = 0;
                for r in &doc.sentences {
                    prop_assert_eq!(r.start, next);
                    prop_assert!(r.end > r.start);
                    next = r.end;
                }
                prop_assert_eq!(next, doc.tokens.len());
                prop_assert_eq!(doc.lemmas.len(), doc.tokens.len());
                prop_assert!(doc.tokens.windows(2).all(|w| w[0].position < w[1].position));
            }

            #[test]
            fn lemmatize_total_and_deterministic(word in "\\PC{0,8}") {
                let dict = LemmaDictionary::new();
                prop_assert_eq!(dict.lemmatize(&word), dict.lemmatize(&word));
            }
        }
    }
}
