//! Stratified k-fold cross-validation and per-class precision, recall and
//! F-score.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{Classifier, ClassifierConfig, Model};
use crate::corpus_io::Label;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::seed::{derive_seed, stage_rng};
use crate::util::mean;

/// Fold index of every document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl FoldSplit {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }
}

/// Shuffles each class with a seeded generator and deals it round-robin into
/// `k` folds, so every fold keeps the class ratio of the whole set.
pub fn stratified_kfold(labels: &[Label], k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 {
        return Err(Error::config(format!("k must be at least 2, got {k}")));
    }
    let mut rng = stage_rng(seed, "folds");
    let mut assignment = vec![0; labels.len()];
    for class in Label::BOTH {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::invalid(format!(
                "{k}-fold split needs at least {k} {class} documents, found {}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, idx) in members.into_iter().enumerate() {
            assignment[idx] = pos % k;
        }
    }
    Ok(FoldSplit { k, assignment })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Positive is the reference class for tp/fp/tn/fn.
pub fn confusion(predicted: &[Label], actual: &[Label]) -> Result<ConfusionCounts> {
    if predicted.len() != actual.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predicted.len(),
            actual.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (p, a) in predicted.iter().zip(actual) {
        match (p, a) {
            (Label::Positive, Label::Positive) => c.tp += 1,
            (Label::Positive, Label::Negative) => c.fp += 1,
            (Label::Negative, Label::Negative) => c.tn += 1,
            (Label::Negative, Label::Positive) => c.fn_ += 1,
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub p: f64,
    pub r: f64,
    pub f: f64,
}

/// Metrics for both classes. `flags` names every metric that hit a zero
/// denominator and was reported as 0.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub pos: ClassMetrics,
    pub neg: ClassMetrics,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

fn ratio(num: usize, den: usize, name: &str, flags: &mut Vec<String>) -> f64 {
    if den == 0 {
        flags.push(name.to_string());
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64, name: &str, flags: &mut Vec<String>) -> f64 {
    if p + r == 0.0 {
        flags.push(name.to_string());
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn class_metrics(c: ConfusionCounts) -> MetricSet {
    let mut flags = Vec::new();
    let pp = ratio(c.tp, c.tp + c.fp, "pos.p", &mut flags);
    let pr = ratio(c.tp, c.tp + c.fn_, "pos.r", &mut flags);
    let pf = harmonic(pp, pr, "pos.f", &mut flags);
    let np = ratio(c.tn, c.tn + c.fn_, "neg.p", &mut flags);
    let nr = ratio(c.tn, c.tn + c.fp, "neg.r", &mut flags);
    let nf = harmonic(np, nr, "neg.f", &mut flags);
    MetricSet {
        pos: ClassMetrics { p: pp, r: pr, f: pf },
        neg: ClassMetrics { p: np, r: nr, f: nf },
        flags,
    }
}

fn average(sets: &[&MetricSet]) -> MetricSet {
    let avg = |get: fn(&MetricSet) -> f64| mean(sets.iter().map(|s| get(s)));
    MetricSet {
        pos: ClassMetrics {
            p: avg(|s| s.pos.p),
            r: avg(|s| s.pos.r),
            f: avg(|s| s.pos.f),
        },
        neg: ClassMetrics {
            p: avg(|s| s.neg.p),
            r: avg(|s| s.neg.r),
            f: avg(|s| s.neg.f),
        },
        flags: Vec::new(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub classifier: String,
    /// Prior formula at term level, sentence formula at document level.
    pub formula: Option<String>,
    pub variant: String,
    pub rules: Option<bool>,
    pub k: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train: MetricSet,
    pub test: MetricSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageReport {
    pub train: MetricSet,
    pub test: MetricSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub meta: ReportMeta,
    pub folds: Vec<FoldReport>,
    pub average: AverageReport,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Outcome of [`run_cv`]: the report plus what is needed to persist models.
#[derive(Clone, Debug)]
pub struct CrossValidation {
    pub report: EvalReport,
    pub split: FoldSplit,
    pub models: Vec<Model>,
    /// Training seed used for each fold.
    pub fold_seeds: Vec<u64>,
}

/// Seed handed to the learner of `fold`.
pub fn fold_seed(seed: u64, fold: usize) -> u64 {
    derive_seed(seed, &format!("train/fold-{fold}"))
}

fn evaluate(model: &Model, data: &Dataset) -> Result<MetricSet> {
    let predicted = model.predict_all(&data.rows)?;
    Ok(class_metrics(confusion(&predicted, &data.labels)?))
}

/// Fits a fresh model on each training complement and scores it on both
/// partitions. Folds run in parallel; results are ordered by fold index.
pub fn run_cv(data: &Dataset, config: &ClassifierConfig, k: usize, seed: u64) -> Result<CrossValidation> {
    data.validate()?;
    let split = stratified_kfold(&data.labels, k, seed)?;
    let fold_seeds: Vec<u64> = (0..k).map(|f| fold_seed(seed, f)).collect();
    let results: Vec<(Model, FoldReport)> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train = data.subset(&split.train_indices(fold));
            let test = data.subset(&split.test_indices(fold));
            let model = config.train(&train, fold_seeds[fold])?;
            let report = FoldReport {
                fold,
                train: evaluate(&model, &train)?,
                test: evaluate(&model, &test)?,
            };
            Ok((model, report))
        })
        .collect::<Result<_>>()?;

    let (models, folds): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let average = AverageReport {
        train: average(&folds.iter().map(|f| &f.train).collect::<Vec<_>>()),
        test: average(&folds.iter().map(|f| &f.test).collect::<Vec<_>>()),
    };
    let report = EvalReport {
        meta: ReportMeta {
            classifier: config.kind().to_string(),
            formula: None,
            variant: data.variant.key().to_string(),
            rules: None,
            k,
            seed,
        },
        folds,
        average,
    };
    Ok(CrossValidation {
        report,
        split,
        models,
        fold_seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(pos: usize, neg: usize) -> Vec<Label> {
        let mut v = vec![Label::Positive; pos];
        v.extend(vec![Label::Negative; neg]);
        v
    }

    #[test]
    fn folds_are_balanced() {
        let l = labels(250, 250);
        let s = stratified_kfold(&l, 5, 7).unwrap();
        for f in 0..5 {
            let test = s.test_indices(f);
            let pos = test.iter().filter(|&&i| l[i] == Label::Positive).count();
            assert_eq!((pos, test.len() - pos), (50, 50));
            assert_eq!(s.train_indices(f).len(), 400);
        }
        assert_eq!(s, stratified_kfold(&l, 5, 7).unwrap());
        assert_ne!(s, stratified_kfold(&l, 5, 8).unwrap());
    }

    #[test]
    fn small_folds() {
        let l = labels(4, 4);
        let s = stratified_kfold(&l, 2, 0).unwrap();
        for f in 0..2 {
            assert_eq!(s.test_indices(f).len(), 4);
        }
        assert!(stratified_kfold(&labels(4, 1), 2, 0).is_err());
        assert!(stratified_kfold(&l, 1, 0).unwrap_err().is_config());
    }

    #[test]
    fn confusion_counts() {
        use Label::*;
        let c = confusion(&[Positive, Positive, Negative], &[Positive, Negative, Negative]).unwrap();
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 1, tn: 1, fn_: 0 });
        assert!(confusion(&[Positive], &[]).is_err());
    }

    #[test]
    fn metric_example() {
        let m = class_metrics(ConfusionCounts { tp: 45, fp: 5, tn: 0, fn_: 10 });
        assert!((m.pos.p - 0.9).abs() < 1e-12);
        assert!((m.pos.r - 45.0 / 55.0).abs() < 1e-12);
        assert!((m.pos.f - 2.0 * 0.9 * (45.0 / 55.0) / (0.9 + 45.0 / 55.0)).abs() < 1e-12);
        assert!(m.flags.is_empty() || !m.flags.iter().any(|f| f.starts_with("pos")));
    }

    #[test]
    fn zero_denominator_is_flagged() {
        let m = class_metrics(ConfusionCounts { tp: 0, fp: 0, tn: 5, fn_: 5 });
        assert_eq!(m.pos.p, 0.0);
        assert!(m.flags.contains(&"pos.p".to_string()));
        assert!(m.flags.contains(&"pos.f".to_string()));
    }

    proptest! {
        #[test]
        fn f_lies_between_p_and_r(tp in 0usize..50, fp in 0usize..50, tn in 0usize..50, fn_ in 0usize..50) {
            let m = class_metrics(ConfusionCounts { tp, fp, tn, fn_ });
            for c in [m.pos, m.neg] {
                let (lo, hi) = (c.p.min(c.r), c.p.max(c.r));
                prop_assert!(c.f <= hi + 1e-12);
                if lo > 0.0 {
                    prop_assert!(c.f >= lo - 1e-12);
                }
                if c.p == c.r {
                    prop_assert!((c.f - c.p).abs() < 1e-12);
                }
                prop_assert!((0.0..=1.0).contains(&c.f));
            }
        }

        #[test]
        fn swapping_classes_swaps_metrics(tp in 0usize..50, fp in 0usize..50, tn in 0usize..50, fn_ in 0usize..50) {
            let m = class_metrics(ConfusionCounts { tp, fp, tn, fn_ });
            let s = class_metrics(ConfusionCounts { tp: tn, fp: fn_, tn: tp, fn_: fp });
            prop_assert_eq!(m.pos, s.neg);
            prop_assert_eq!(m.neg, s.pos);
        }

        #[test]
        fn folds_partition(pos in 3usize..40, neg in 3usize..40, k in 2usize..4, seed in any::<u64>()) {
            let l = labels(pos, neg);
            let s = stratified_kfold(&l, k, seed).unwrap();
            let mut seen = vec![0; l.len()];
            for f in 0..k {
                for i in s.test_indices(f) {
                    seen[i] += 1;
                }
                let test = s.test_indices(f);
                let p = test.iter().filter(|&&i| l[i] == Label::Positive).count();
                prop_assert!(p == pos / k || p == pos / k + 1);
                let n = test.len() - p;
                prop_assert!(n == neg / k || n == neg / k + 1);
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
