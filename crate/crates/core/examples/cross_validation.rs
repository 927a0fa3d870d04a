//! Stratified 5-fold CV with per-class precision, recall and F.

use sentilevel::classifiers::{ClassifierConfig, ClassifierKind};
use sentilevel::corpus_io::{load_corpus, LemmaDictionary, Preprocessor};
use sentilevel::evaluation::run_cv;
use sentilevel::features::FeatureVariant;
use sentilevel::lexicon::{load_lexicon, PriorFormula};
use sentilevel::pipeline::featurize;
use sentilevel::scoring::{RuleConfig, Scorer};
use sentilevel::synth::{generate, SynthConfig};

pub fn run() -> sentilevel::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| sentilevel::Error::io("tempdir", e))?;
    let paths = generate(
        &SynthConfig {
            docs_per_class: 50,
            ..Default::default()
        },
        dir.path(),
    )?;

    let docs = Preprocessor::new(LemmaDictionary::load(&paths.lemmas)?).process_all(&load_corpus(&paths.corpus)?);
    let priors = load_lexicon(&paths.lexicon)?.priors(PriorFormula::MaxSub)?;
    let rules = RuleConfig::default();
    let scorer = Scorer {
        priors: &priors,
        rules: &rules,
        apply_rules: false,
    };
    let scored: Vec<_> = docs.iter().map(|d| scorer.score(d)).collect();
    let data = featurize(&scored, FeatureVariant::Term8, None)?;

    let cv = run_cv(&data, &ClassifierConfig::default_for(ClassifierKind::Dtree), 5, 7)?;
    for fold in &cv.report.folds {
        println!(
            "fold {}: test F pos {:.3} neg {:.3}",
            fold.fold, fold.test.pos.f, fold.test.neg.f
        );
    }
    let avg = &cv.report.average.test;
    println!("average: P {:.3}/{:.3} R {:.3}/{:.3} F {:.3}/{:.3}", avg.pos.p, avg.neg.p, avg.pos.r, avg.neg.r, avg.pos.f, avg.neg.f);
    Ok(())
}

#[allow(dead_code)]
fn main() -> sentilevel::Result<()> {
    run()
}
