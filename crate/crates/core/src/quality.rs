//! Corpus quality via Zipf's law.
//!
//! Observed word frequencies are ranked and compared with the ideal curve
//! `F(r) = C / r^a`, where `C` is the highest observed frequency. The
//! Kullback-Leibler distance from the ideal distribution to the observed one
//! summarizes how closely the corpus follows the law.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus_io::TokenizedDocument;
use crate::error::{Error, Result};
use crate::util::write_atomic;

/// Additive guard applied to zero entries of `q` by [`smooth`].
pub const SMOOTHING_EPSILON: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyEntry {
    pub word: String,
    pub count: u64,
    /// 1-based.
    pub rank: usize,
}

/// Words sorted by descending count, ties broken lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub entries: Vec<FrequencyEntry>,
}

impl FrequencyTable {
    /// Builds a table from raw counts; zero counts are ignored.
    pub fn from_counts<S: Into<String>>(counts: impl IntoIterator<Item = (S, u64)>) -> Self {
        let mut pairs: Vec<(String, u64)> = counts
            .into_iter()
            .map(|(w, c)| (w.into(), c))
            .filter(|(_, c)| *c > 0)
            .collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        FrequencyTable {
            entries: pairs
                .into_iter()
                .enumerate()
                .map(|(i, (word, count))| FrequencyEntry {
                    word,
                    count,
                    rank: i + 1,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `C`, the count of the rank-1 word.
    pub fn highest_frequency(&self) -> Option<u64> {
        self.entries.first().map(|e| e.count)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }
}

/// Counts surface tokens across all documents.
pub fn rank_frequencies(docs: &[TokenizedDocument]) -> Result<FrequencyTable> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for doc in docs {
        for token in &doc.tokens {
            *counts.entry(token.surface.as_str()).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::invalid("empty corpus: no tokens to rank"));
    }
    Ok(FrequencyTable::from_counts(counts))
}

/// `c / r^a`.
pub fn ideal_zipf_frequency(c: f64, a: f64, r: usize) -> Result<f64> {
    if r == 0 {
        return Err(Error::invalid("Zipf rank must be at least 1"));
    }
    if !(c > 0.0) {
        return Err(Error::invalid(format!(
            "Zipf constant must be positive, got {c}"
        )));
    }
    Ok(c / (r as f64).powf(a))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    E,
    Two,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "ln" | "natural" => Ok(LogBase::E),
            "2" | "two" | "log2" => Ok(LogBase::Two),
            other => Err(Error::config(format!("unknown log base `{other}`"))),
        }
    }
}

/// Natural-log KL divergence `Σ p(i) ln(p(i)/q(i))` over `p(i) > 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    kl_divergence_base(p, q, LogBase::E)
}

pub fn kl_divergence_base(p: &[f64], q: &[f64], base: LogBase) -> Result<f64> {
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "p must sum to 1, got {total}"
        )));
    }
    if p.iter().chain(q).any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::invalid("probabilities must be finite and non-negative"));
    }
    relative_entropy(p, q, base)
}

/// The bare sum, with no normalization requirement on either side.
fn relative_entropy(p: &[f64], q: &[f64], base: LogBase) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::invalid(format!(
            "length mismatch: p has {}, q has {}",
            p.len(),
            q.len()
        )));
    }
    let mut sum = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::invalid(format!(
                "q({i}) is zero where p({i}) = {pi}; smooth q first"
            )));
        }
        sum += pi * base.log(pi / qi);
    }
    Ok(sum)
}

/// Scales `values` to sum to one.
pub fn normalize(values: &[f64]) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    values.iter().map(|v| v / total).collect()
}

/// Adds [`SMOOTHING_EPSILON`] to every entry when any is zero, then
/// renormalizes. Distributions without zeros are only renormalized.
pub fn smooth(q: &[f64]) -> Vec<f64> {
    if q.contains(&0.0) {
        let shifted: Vec<f64> = q.iter().map(|v| v + SMOOTHING_EPSILON).collect();
        normalize(&shifted)
    } else {
        normalize(q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Σ ideal·log(ideal/observed) on raw frequencies. Not a true divergence:
    /// it can go negative when the two totals differ, and it scales with
    /// corpus size.
    pub kl_raw: f64,
    /// KL between the normalized ideal and observed distributions. The only
    /// figure comparable across corpora.
    pub kl_prob: f64,
    pub zipf_exponent_a: f64,
    pub log_base: LogBase,
    pub distinct_words: usize,
    pub total_tokens: u64,
    pub table_path: Option<PathBuf>,
}

/// Ideal frequencies `C / r^a` for ranks `1..=N` of `table`.
pub fn ideal_frequencies(table: &FrequencyTable, a: f64) -> Result<Vec<f64>> {
    let c = table
        .highest_frequency()
        .ok_or_else(|| Error::invalid("empty frequency table"))? as f64;
    table
        .entries
        .iter()
        .map(|e| ideal_zipf_frequency(c, a, e.rank))
        .collect()
}

pub fn quality_report(table: &FrequencyTable, a: f64) -> Result<QualityReport> {
    quality_report_base(table, a, LogBase::E)
}

pub fn quality_report_base(table: &FrequencyTable, a: f64, base: LogBase) -> Result<QualityReport> {
    let ideal = ideal_frequencies(table, a)?;
    let observed: Vec<f64> = table.entries.iter().map(|e| e.count as f64).collect();

    let kl_raw = relative_entropy(&ideal, &observed, base)?;
    let p = normalize(&ideal);
    let q = smooth(&observed);
    let kl_prob = kl_divergence_base(&p, &q, base)?;

    Ok(QualityReport {
        kl_raw,
        kl_prob,
        zipf_exponent_a: a,
        log_base: base,
        distinct_words: table.len(),
        total_tokens: table.total(),
        table_path: None,
    })
}

pub const QUALITY_CSV_HEADER: [&str; 7] = [
    "rank",
    "word",
    "actual_count",
    "ideal_frequency",
    "log_rank",
    "log_actual",
    "log_ideal",
];

/// Rank/actual/ideal table for plotting, natural logs.
pub fn quality_csv(table: &FrequencyTable, a: f64) -> Result<Vec<u8>> {
    let ideal = ideal_frequencies(table, a)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(QUALITY_CSV_HEADER)?;
    for (e, f) in table.entries.iter().zip(&ideal) {
        w.write_record([
            e.rank.to_string(),
            e.word.clone(),
            e.count.to_string(),
            f.to_string(),
            (e.rank as f64).ln().to_string(),
            (e.count as f64).ln().to_string(),
            f.ln().to_string(),
        ])?;
    }
    w.into_inner()
        .map_err(|e| Error::invalid(format!("csv buffer: {e}")))
}

/// Writes the CSV and records its path in `report`.
pub fn write_quality_csv(
    table: &FrequencyTable,
    report: &mut QualityReport,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    write_atomic(path, &quality_csv(table, report.zipf_exponent_a)?)?;
    report.table_path = Some(path.to_path_buf());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::{Label, Token};
    use approx::assert_abs_diff_eq;

    fn doc(words: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            id: "d".into(),
            label: Label::Positive,
            tokens: words.iter().enumerate().map(|(i, w)| Token::new(*w, i)).collect(),
            sentences: std::iter::once(0..words.len()).collect(),
            lemmas: words.iter().map(|w| w.to_string()).collect(),
        }
    }

    fn triples(t: &FrequencyTable) -> Vec<(&str, u64, usize)> {
        t.entries.iter().map(|e| (e.word.as_str(), e.count, e.rank)).collect()
    }

    #[test]
    fn ranking_and_ties() {
        let t = rank_frequencies(&[doc(&["a", "a", "b"])]).unwrap();
        assert_eq!(triples(&t), vec![("a", 2, 1), ("b", 1, 2)]);
        let t = rank_frequencies(&[doc(&["b", "a"])]).unwrap();
        assert_eq!(triples(&t), vec![("a", 1, 1), ("b", 1, 2)]);
        assert!(rank_frequencies(&[doc(&[])]).is_err());
        assert!(rank_frequencies(&[]).is_err());
    }

    #[test]
    fn zipf_examples() {
        assert_eq!(ideal_zipf_frequency(100.0, 1.0, 1).unwrap(), 100.0);
        assert_eq!(ideal_zipf_frequency(100.0, 1.0, 2).unwrap(), 50.0);
        assert_abs_diff_eq!(ideal_zipf_frequency(100.0, 1.0, 3).unwrap(), 100.0 / 3.0);
        assert!(ideal_zipf_frequency(100.0, 1.0, 0).is_err());
        assert!(ideal_zipf_frequency(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl_divergence(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        // Termwise: 0.5 ln(0.5/0.25) + 0.5 ln(0.5/0.75)
        let by_hand = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        let kl = kl_divergence(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert_abs_diff_eq!(kl, by_hand, epsilon = 1e-15);
        assert_abs_diff_eq!(kl, 0.14384, epsilon = 1e-4);
        assert_abs_diff_eq!(
            kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(),
            std::f64::consts::LN_2,
            epsilon = 1e-15
        );
        let reverse = kl_divergence(&[0.25, 0.75], &[0.5, 0.5]).unwrap();
        assert!((kl - reverse).abs() > 1e-3);
    }

    #[test]
    fn kl_errors_and_base() {
        assert!(kl_divergence(&[0.5, 0.5], &[1.0]).is_err());
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).is_err());
        assert!(kl_divergence(&[0.5, 0.6], &[0.5, 0.5]).is_err());
        let q = smooth(&[1.0, 0.0]);
        assert!(kl_divergence(&[0.5, 0.5], &q).unwrap() > 0.0);
        let bits = kl_divergence_base(&[1.0, 0.0], &[0.5, 0.5], LogBase::Two).unwrap();
        assert_abs_diff_eq!(bits, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn report_on_two_word_table() {
        let t = FrequencyTable::from_counts([("a", 2), ("b", 1)]);
        let r = quality_report(&t, 1.0).unwrap();
        // Ideal (2, 1) normalized is (2/3, 1/3); observed is the same.
        assert_abs_diff_eq!(r.kl_prob, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.kl_raw, 0.0, epsilon = 1e-12);
        assert_eq!(r.total_tokens, 3);
    }

    #[test]
    fn report_on_flat_table_is_positive() {
        let t = FrequencyTable::from_counts([("a", 5), ("b", 5), ("c", 5), ("d", 5)]);
        let r = quality_report(&t, 1.0).unwrap();
        assert!(r.kl_prob > 0.0);
    }

    #[test]
    fn csv_layout() {
        let t = FrequencyTable::from_counts([("a", 4), ("b", 2)]);
        let bytes = quality_csv(&t, 1.0).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "rank,word,actual_count,ideal_frequency,log_rank,log_actual,log_ideal"
        );
        assert!(lines.next().unwrap().starts_with("1,a,4,4,0,"));
        assert!(lines.next().unwrap().starts_with("2,b,2,2,"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dist(n: usize) -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(0.01f64..1.0, n).prop_map(|v| normalize(&v))
        }

        proptest! {
            #[test]
            fn kl_nonnegative_and_zero_on_self((p, q) in (2usize..8).prop_flat_map(|n| (dist(n), dist(n)))) {
                prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-15);
                prop_assert!(kl_divergence(&p, &p).unwrap().abs() <= 1e-12);
            }

            #[test]
            fn zipf_decreasing(c in 1.0f64..1e4, a in 0.1f64..3.0, r in 1usize..1000) {
                prop_assert!(ideal_zipf_frequency(c, a, r + 1).unwrap() < ideal_zipf_frequency(c, a, r).unwrap());
            }

            #[test]
            fn counts_sum_to_tokens(words in proptest::collection::vec("[a-e]{1,2}", 1..50)) {
                let refs: Vec<&str> = words.iter().map(String::as_str).collect();
                let t = rank_frequencies(&[doc(&refs)]).unwrap();
                prop_assert_eq!(t.total(), words.len() as u64);
                prop_assert!(t.entries.windows(2).all(|w| w[0].count > w[1].count
                    || (w[0].count == w[1].count && w[0].word < w[1].word)));
            }
        }
    }
}
