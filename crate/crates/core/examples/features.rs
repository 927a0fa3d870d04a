//! Term-level and document-level feature vectors.

use sentilevel::features::{doc_features, term_features, FeatureVariant, DOC_FEATURES, TERM_FEATURES};

pub fn run() -> sentilevel::Result<()> {
    let terms = [0.0, 0.625, 0.0, -0.5, 1.0, 0.0, -0.25];
    for variant in [FeatureVariant::Term8, FeatureVariant::Term6] {
        println!("{variant}: {:?}", term_features(&terms, variant)?);
    }
    println!("  columns {:?}", TERM_FEATURES);

    let sentences = [0.5, -1.0, 0.0, 0.75];
    for variant in [FeatureVariant::Doc7, FeatureVariant::Doc5, FeatureVariant::Doc4] {
        println!("{variant}: {:?}", doc_features(&sentences, variant)?);
    }
    println!("  columns {:?}", DOC_FEATURES);
    Ok(())
}

#[allow(dead_code)]
fn main() -> sentilevel::Result<()> {
    run()
}
