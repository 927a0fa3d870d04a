//! Train each learner on a small dataset, save it and predict with the copy.

use rand::Rng;
use sentilevel::classifiers::{predict, ClassifierConfig, ClassifierKind, ModelFile};
use sentilevel::corpus_io::Label;
use sentilevel::features::{Dataset, FeatureVariant};
use sentilevel::seed::stage_rng;

fn dataset(n: usize, seed: u64) -> sentilevel::Result<Dataset> {
    let mut rng = stage_rng(seed, "example");
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let label = if i % 2 == 0 { Label::Positive } else { Label::Negative };
        let (pos, neg) = if label == Label::Positive { (6.0, 1.0) } else { (1.0, 6.0) };
        rows.push(vec![
            pos + rng.random_range(-1.0..1.0),
            neg + rng.random_range(-1.0..1.0),
            0.6 * pos + rng.random_range(-0.5..0.5),
            -0.6 * neg + rng.random_range(-0.5..0.5),
        ]);
        labels.push(label);
    }
    Dataset::new(FeatureVariant::Doc4, rows, labels)
}

pub fn run() -> sentilevel::Result<()> {
    let train = dataset(60, 1)?;
    let test = dataset(40, 2)?;
    let dir = tempfile::tempdir().map_err(|e| sentilevel::Error::io("tempdir", e))?;
    for kind in ClassifierKind::ALL {
        let cfg = ClassifierConfig::default_for(kind);
        let model = cfg.train(&train, 7)?;
        let path = dir.path().join(format!("{kind}.json"));
        ModelFile::new(cfg, 7, model).save(&path)?;

        let loaded = ModelFile::load(&path)?;
        let mut hits = 0;
        for (row, label) in test.rows.iter().zip(&test.labels) {
            if predict(&loaded.model, row)?.label == *label {
                hits += 1;
            }
        }
        println!("{kind:<5} accuracy {hits}/{}", test.len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sentilevel::Result<()> {
    run()
}
