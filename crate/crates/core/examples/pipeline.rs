//! Full document-level run with rules, from a generated corpus to a report.

use sentilevel::classifiers::{ClassifierConfig, ClassifierKind};
use sentilevel::features::{FeatureVariant, Level};
use sentilevel::pipeline::{run_pipeline, PipelineConfig};
use sentilevel::scoring::SentenceFormula;
use sentilevel::synth::{generate, SynthConfig};

pub fn run() -> sentilevel::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| sentilevel::Error::io("tempdir", e))?;
    let paths = generate(
        &SynthConfig {
            docs_per_class: 60,
            rule_fraction: 0.3,
            ..Default::default()
        },
        dir.path(),
    )?;

    for rules in [false, true] {
        let cfg = PipelineConfig {
            corpus: paths.corpus.clone(),
            lexicon: paths.lexicon.clone(),
            lemmas: Some(paths.lemmas.clone()),
            negations: Some(paths.negations.clone()),
            intensifiers: Some(paths.intensifiers.clone()),
            level: Level::Document,
            sentence_formula: Some(SentenceFormula::MaxMax),
            variant: FeatureVariant::Doc7,
            rules,
            classifier: ClassifierConfig::default_for(ClassifierKind::Svm),
            out: dir.path().join(if rules { "rules" } else { "plain" }),
            ..Default::default()
        };
        let out = run_pipeline(&cfg)?;
        let t = &out.report.average.test;
        println!("rules={rules}: test F pos {:.3} neg {:.3} -> {}", t.pos.f, t.neg.f, cfg.out.join("report.json").display());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sentilevel::Result<()> {
    run()
}
