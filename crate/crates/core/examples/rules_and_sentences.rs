//! Negation and intensifier rules, then sentence scores.

use std::collections::BTreeMap;

use sentilevel::corpus_io::{LemmaDictionary, Preprocessor, RawDocument, Label};
use sentilevel::lexicon::{Priors, PriorFormula};
use sentilevel::scoring::{RuleConfig, Scorer, SentenceFormula};

pub fn run() -> sentilevel::Result<()> {
    // "The film is not good. The acting is very bad."
    let text = "الفيلم لا جيد. التمثيل سيئ جدا.";
    let doc = Preprocessor::new(LemmaDictionary::new()).process(&RawDocument {
        id: "demo".into(),
        label: Label::Negative,
        text: text.into(),
    });

    let priors = Priors::from_map(
        PriorFormula::MaxSub,
        BTreeMap::from([("جيد".to_string(), 0.625), ("سيئ".to_string(), -0.5)]),
    );
    let rules = RuleConfig::default();

    for apply_rules in [false, true] {
        let scored = Scorer {
            priors: &priors,
            rules: &rules,
            apply_rules,
        }
        .score(&doc);
        println!("rules {}: terms {:?}", if apply_rules { "on " } else { "off" }, scored.adjusted_scores());
        for formula in SentenceFormula::ALL {
            let values: Vec<f64> = scored.sentence_scores(formula).iter().map(|s| s.value).collect();
            println!("  {} {:?}", formula.display_name(), values);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sentilevel::Result<()> {
    run()
}
