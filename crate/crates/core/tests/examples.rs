//! Every runnable example must succeed.

macro_rules! example {
    ($name:ident, $path:literal) => {
        #[allow(dead_code)]
        #[path = $path]
        mod $name;

        #[test]
        fn $name() {
            $name::run().unwrap();
        }
    };
}

example!(prior_aggregation, "../examples/prior_aggregation.rs");
example!(rules_and_sentences, "../examples/rules_and_sentences.rs");
example!(features, "../examples/features.rs");
example!(corpus_quality, "../examples/corpus_quality.rs");
example!(classifiers, "../examples/classifiers.rs");
example!(cross_validation, "../examples/cross_validation.rs");
example!(pipeline, "../examples/pipeline.rs");
example!(sweep, "../examples/sweep.rs");
