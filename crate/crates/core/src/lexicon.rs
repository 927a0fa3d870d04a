//! Multi-sense polarity lexicon and prior-polarity aggregation.
//!
//! Each lemma carries several `(positive, negative)` sense scores. They are
//! first reduced column-wise to one [`PolarityPair`] ([`f_avg`] or
//! [`f_max`]), then the pair is reduced to a single signed prior by one of
//! the [`PriorFormula`]s.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::{read_utf8, write_atomic};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SenseScore {
    pub positive: f64,
    pub negative: f64,
}

impl SenseScore {
    pub fn new(positive: f64, negative: f64) -> Result<Self> {
        for (name, v) in [("positive", positive), ("negative", negative)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "{name} score {v} outside [0, 1]"
                )));
            }
        }
        Ok(SenseScore { positive, negative })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub lemma: String,
    pub senses: Vec<SenseScore>,
}

/// Positive and negative magnitudes, both in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarityPair {
    pub pos: f64,
    pub neg: f64,
}

impl PolarityPair {
    pub fn new(pos: f64, neg: f64) -> Self {
        PolarityPair { pos, neg }
    }

    /// Larger component, carrying a minus sign when the negative side is
    /// strictly larger. Ties resolve to the positive value.
    pub fn signed_max(self) -> f64 {
        if self.neg > self.pos {
            -self.neg
        } else {
            self.pos
        }
    }

    pub fn difference(self) -> f64 {
        self.pos - self.neg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PriorFormula {
    #[serde(rename = "avg_max")]
    AvgMax,
    #[serde(rename = "max_max")]
    MaxMax,
    #[serde(rename = "avg_sub")]
    AvgSub,
    #[serde(rename = "max_sub")]
    MaxSub,
    #[serde(rename = "avg_avg")]
    AvgAvg,
}

impl PriorFormula {
    pub const ALL: [PriorFormula; 5] = [
        PriorFormula::MaxMax,
        PriorFormula::AvgMax,
        PriorFormula::AvgSub,
        PriorFormula::MaxSub,
        PriorFormula::AvgAvg,
    ];

    pub fn key(self) -> &'static str {
        match self {
            PriorFormula::AvgMax => "avg_max",
            PriorFormula::MaxMax => "max_max",
            PriorFormula::AvgSub => "avg_sub",
            PriorFormula::MaxSub => "max_sub",
            PriorFormula::AvgAvg => "avg_avg",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            PriorFormula::AvgMax => "M_Avg_Max",
            PriorFormula::MaxMax => "M_Max_Max",
            PriorFormula::AvgSub => "M_Avg_Sub",
            PriorFormula::MaxSub => "M_Max_Sub",
            PriorFormula::AvgAvg => "M_Avg_Avg",
        }
    }
}

impl fmt::Display for PriorFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for PriorFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        let key = key.strip_prefix("m_").unwrap_or(&key);
        PriorFormula::ALL
            .into_iter()
            .find(|f| f.key() == key)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown prior formula `{s}` (expected one of avg_max, max_max, avg_sub, max_sub, avg_avg)"
                ))
            })
    }
}

fn require_senses(senses: &[SenseScore]) -> Result<()> {
    if senses.is_empty() {
        Err(Error::invalid("lexicon entry has no senses"))
    } else {
        Ok(())
    }
}

/// Column-wise mean of absolute sense scores.
pub fn f_avg(senses: &[SenseScore]) -> Result<PolarityPair> {
    require_senses(senses)?;
    let n = senses.len() as f64;
    let pos = senses.iter().map(|s| s.positive.abs()).sum::<f64>() / n;
    let neg = senses.iter().map(|s| s.negative.abs()).sum::<f64>() / n;
    Ok(PolarityPair { pos, neg })
}

/// Column-wise maximum of absolute sense scores.
pub fn f_max(senses: &[SenseScore]) -> Result<PolarityPair> {
    require_senses(senses)?;
    let pos = senses.iter().map(|s| s.positive.abs()).fold(0.0, f64::max);
    let neg = senses.iter().map(|s| s.negative.abs()).fold(0.0, f64::max);
    Ok(PolarityPair { pos, neg })
}

/// Collapses a lemma's senses into one prior in `[-1, 1]`.
pub fn aggregate_prior(senses: &[SenseScore], formula: PriorFormula) -> Result<f64> {
    Ok(match formula {
        PriorFormula::AvgMax => f_avg(senses)?.signed_max(),
        PriorFormula::MaxMax => f_max(senses)?.signed_max(),
        PriorFormula::AvgSub => f_avg(senses)?.difference(),
        PriorFormula::MaxSub => f_max(senses)?.difference(),
        PriorFormula::AvgAvg => {
            let pair = f_avg(senses)?;
            (pair.pos + (-pair.neg)) / 2.0
        }
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorScore {
    pub lemma: String,
    pub value: f64,
    pub formula: PriorFormula,
}

/// Lemma → entry, iterated in lemma order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sense, creating the entry on first sight.
    pub fn add_sense(&mut self, lemma: &str, sense: SenseScore) {
        self.entries
            .entry(lemma.to_string())
            .or_insert_with(|| LexiconEntry {
                lemma: lemma.to_string(),
                senses: Vec::new(),
            })
            .senses
            .push(sense);
    }

    pub fn get(&self, lemma: &str) -> Option<&LexiconEntry> {
        self.entries.get(lemma)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    /// Parses `lemma<TAB>positive<TAB>negative` lines. Repeated lemmas
    /// accumulate senses in file order. Blank and `#` lines are skipped.
    pub fn parse(text: &str, source: &Path) -> Result<Self> {
        let mut lexicon = Lexicon::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [lemma, pos, neg] = fields[..] else {
                return Err(Error::parse(
                    source,
                    line_no,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            };
            if lemma.is_empty() {
                return Err(Error::parse(source, line_no, "empty lemma"));
            }
            let number = |field: &str, name: &str| -> Result<f64> {
                field.trim().parse::<f64>().map_err(|_| {
                    Error::parse(source, line_no, format!("{name} score `{field}` is not a number"))
                })
            };
            let sense = SenseScore::new(number(pos, "positive")?, number(neg, "negative")?)
                .map_err(|e| Error::parse(source, line_no, e.to_string()))?;
            lexicon.add_sense(lemma, sense);
        }
        Ok(lexicon)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&read_utf8(path)?, path)
    }

    /// One prior per lemma.
    pub fn priors(&self, formula: PriorFormula) -> Result<Priors> {
        let mut map = BTreeMap::new();
        for entry in self.entries.values() {
            map.insert(entry.lemma.clone(), aggregate_prior(&entry.senses, formula)?);
        }
        Ok(Priors { formula, map })
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    Lexicon::load(path)
}

/// Lemma → prior lookup built with one formula.
#[derive(Clone, Debug, PartialEq)]
pub struct Priors {
    pub formula: PriorFormula,
    map: BTreeMap<String, f64>,
}

impl Priors {
    pub fn from_map(formula: PriorFormula, map: BTreeMap<String, f64>) -> Self {
        Priors { formula, map }
    }

    pub fn get(&self, lemma: &str) -> Option<f64> {
        self.map.get(lemma).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = PriorScore> + '_ {
        self.map.iter().map(|(lemma, value)| PriorScore {
            lemma: lemma.clone(),
            value: *value,
            formula: self.formula,
        })
    }

    /// `lemma<TAB>prior` lines in lemma order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (lemma, value) in &self.map {
            out.push_str(lemma);
            out.push('\t');
            out.push_str(&value.to_string());
            out.push('\n');
        }
        out
    }

    pub fn write_tsv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_tsv().as_bytes())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// The five senses of "sAxin" (hot).
    pub(crate) fn sakhin() -> Vec<SenseScore> {
        [
            (0.375, 0.25),
            (0.75, 0.125),
            (0.5, 0.375),
            (0.25, 0.25),
            (0.125, 0.0),
        ]
        .iter()
        .map(|&(p, n)| SenseScore::new(p, n).unwrap())
        .collect()
    }

    fn one(p: f64, n: f64) -> Vec<SenseScore> {
        vec![SenseScore::new(p, n).unwrap()]
    }

    #[test]
    fn column_reductions() {
        let avg = f_avg(&sakhin()).unwrap();
        assert_abs_diff_eq!(avg.pos, 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(avg.neg, 0.2, epsilon = 1e-12);
        assert_eq!(f_max(&sakhin()).unwrap(), PolarityPair::new(0.75, 0.375));

        assert_eq!(f_avg(&one(0.7, 0.1)).unwrap(), PolarityPair::new(0.7, 0.1));
        assert_eq!(f_max(&one(0.7, 0.1)).unwrap(), PolarityPair::new(0.7, 0.1));
        assert_eq!(f_avg(&one(0.0, 0.0)).unwrap(), PolarityPair::new(0.0, 0.0));

        let mixed = vec![
            SenseScore::new(0.2, 0.9).unwrap(),
            SenseScore::new(0.8, 0.1).unwrap(),
        ];
        assert_eq!(f_max(&mixed).unwrap(), PolarityPair::new(0.8, 0.9));

        assert!(f_avg(&[]).is_err());
        assert!(f_max(&[]).is_err());
        assert!(aggregate_prior(&[], PriorFormula::MaxSub).is_err());
    }

    #[test]
    fn five_formulas_on_sakhin() {
        let s = sakhin();
        let expect = [
            (PriorFormula::AvgMax, 0.4),
            (PriorFormula::MaxMax, 0.75),
            (PriorFormula::AvgSub, 0.2),
            (PriorFormula::MaxSub, 0.375),
            (PriorFormula::AvgAvg, 0.1),
        ];
        for (formula, value) in expect {
            assert_abs_diff_eq!(aggregate_prior(&s, formula).unwrap(), value, epsilon = 1e-12);
        }
    }

    #[test]
    fn sign_and_tie_rules() {
        assert_eq!(aggregate_prior(&one(0.0, 0.6), PriorFormula::AvgMax).unwrap(), -0.6);
        assert_eq!(aggregate_prior(&one(0.0, 0.6), PriorFormula::MaxMax).unwrap(), -0.6);
        assert_eq!(aggregate_prior(&one(0.5, 0.5), PriorFormula::MaxSub).unwrap(), 0.0);
        assert_eq!(aggregate_prior(&one(0.5, 0.5), PriorFormula::MaxMax).unwrap(), 0.5);
    }

    #[test]
    fn formula_names() {
        for f in PriorFormula::ALL {
            assert_eq!(f.key().parse::<PriorFormula>().unwrap(), f);
            assert_eq!(f.display_name().parse::<PriorFormula>().unwrap(), f);
        }
        assert!("max".parse::<PriorFormula>().unwrap_err().is_config());
    }

    #[test]
    fn parse_lexicon_file() {
        let text = "sAxin\t0.375\t0.25\nsAxin\t0.75\t0.125\nsAxin\t0.5\t0.375\nsAxin\t0.25\t0.25\nsAxin\t0.125\t0\n";
        let lex = Lexicon::parse(text, Path::new("x.tsv")).unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.get("sAxin").unwrap().senses, sakhin());

        let err = Lexicon::parse("ok\t0.5\t0.5\nx\t1.5\t0\n", Path::new("x.tsv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = Lexicon::parse("x\t0.5\n", Path::new("x.tsv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Lexicon::parse("x\tabc\t0\n", Path::new("x.tsv")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));

        assert!(Lexicon::parse("", Path::new("x.tsv")).unwrap().is_empty());
    }

    #[test]
    fn priors_tsv() {
        let mut lex = Lexicon::new();
        for s in sakhin() {
            lex.add_sense("sAxin", s);
        }
        lex.add_sense("bad", SenseScore::new(0.0, 0.5).unwrap());
        let priors = lex.priors(PriorFormula::MaxSub).unwrap();
        assert_eq!(priors.to_tsv(), "bad\t-0.5\nsAxin\t0.375\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn senses() -> impl Strategy<Value = Vec<SenseScore>> {
            proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..10).prop_map(|v| {
                v.into_iter()
                    .map(|(p, n)| SenseScore::new(p, n).unwrap())
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn bounded_and_consistent(s in senses()) {
                for f in PriorFormula::ALL {
                    let v = aggregate_prior(&s, f).unwrap();
                    prop_assert!((-1.0..=1.0).contains(&v));
                }
                let avg_sub = aggregate_prior(&s, PriorFormula::AvgSub).unwrap();
                prop_assert_eq!(aggregate_prior(&s, PriorFormula::AvgAvg).unwrap(), avg_sub / 2.0);

                let pair = f_max(&s).unwrap();
                let max_sub = aggregate_prior(&s, PriorFormula::MaxSub).unwrap();
                prop_assert_eq!(max_sub == 0.0, pair.pos == pair.neg);
                prop_assert_eq!(max_sub > 0.0, pair.pos > pair.neg);
            }

            #[test]
            fn single_sense_avg_equals_max(p in 0.0f64..=1.0, n in 0.0f64..=1.0) {
                let s = one(p, n);
                prop_assert_eq!(
                    aggregate_prior(&s, PriorFormula::AvgMax).unwrap(),
                    aggregate_prior(&s, PriorFormula::MaxMax).unwrap()
                );
                prop_assert_eq!(
                    aggregate_prior(&s, PriorFormula::AvgSub).unwrap(),
                    aggregate_prior(&s, PriorFormula::MaxSub).unwrap()
                );
            }
        }
    }
}
