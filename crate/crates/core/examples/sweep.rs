//! Compare prior formulas and term-level variants in one sweep.

use sentilevel::classifiers::{ClassifierConfig, ClassifierKind};
use sentilevel::features::FeatureVariant;
use sentilevel::lexicon::PriorFormula;
use sentilevel::pipeline::{sweep, PipelineConfig, SweepGrid};
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
    let grid = SweepGrid {
        base: PipelineConfig {
            corpus: paths.corpus,
            lexicon: paths.lexicon,
            lemmas: Some(paths.lemmas),
            classifier: ClassifierConfig::default_for(ClassifierKind::Dtree),
            out: dir.path().join("sweep"),
            ..Default::default()
        },
        prior_formulas: PriorFormula::ALL.to_vec(),
        variants: vec![FeatureVariant::Term8, FeatureVariant::Term6],
        ..Default::default()
    };

    let result = sweep(&grid)?;
    for row in &result.rows {
        println!(
            "{:<10} {} test F {:.3}/{:.3}{}",
            row.prior_formula,
            row.variant,
            row.test_f_pos,
            row.test_f_neg,
            if row.best { "  <- best" } else { "" }
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sentilevel::Result<()> {
    run()
}
