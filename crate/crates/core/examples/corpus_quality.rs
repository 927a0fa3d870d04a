//! Zipf profile and KL distance of a generated corpus.

use sentilevel::corpus_io::{load_corpus, LemmaDictionary, Preprocessor};
use sentilevel::quality::{quality_report, rank_frequencies, write_quality_csv};
use sentilevel::synth::{generate, SynthConfig};

pub fn run() -> sentilevel::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| sentilevel::Error::io("tempdir", e))?;
    let cfg = SynthConfig {
        docs_per_class: 40,
        ..Default::default()
    };
    let paths = generate(&cfg, dir.path())?;

    let docs = Preprocessor::new(LemmaDictionary::load(&paths.lemmas)?).process_all(&load_corpus(&paths.corpus)?);
    let table = rank_frequencies(&docs)?;
    for e in table.entries.iter().take(5) {
        println!("{:>3} {:<8} {}", e.rank, e.word, e.count);
    }
    let mut report = quality_report(&table, 1.0)?;
    write_quality_csv(&table, &mut report, dir.path().join("quality.csv"))?;
    println!(
        "{} distinct / {} tokens, kl_prob {:.4}, kl_raw {:.1}",
        report.distinct_words, report.total_tokens, report.kl_prob, report.kl_raw
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> sentilevel::Result<()> {
    run()
}
