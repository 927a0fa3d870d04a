//! Collapse a lemma's sense scores into one prior with each formula.

use sentilevel::lexicon::{aggregate_prior, f_avg, f_max, Lexicon, PriorFormula, SenseScore};

pub fn run() -> sentilevel::Result<()> {
    let senses = [
        (0.375, 0.25),
        (0.75, 0.125),
        (0.5, 0.375),
        (0.25, 0.25),
        (0.125, 0.0),
    ]
    .into_iter()
    .map(|(p, n)| SenseScore::new(p, n))
    .collect::<sentilevel::Result<Vec<_>>>()?;

    let avg = f_avg(&senses)?;
    let max = f_max(&senses)?;
    println!("F_Avg = ({}, {})  F_Max = ({}, {})", avg.pos, avg.neg, max.pos, max.neg);
    for formula in PriorFormula::ALL {
        println!("{:<10} {:>6}", formula.display_name(), aggregate_prior(&senses, formula)?);
    }

    // Same thing through a lexicon file.
    let tsv = "# lemma\tpos\tneg\nsakhin\t0.375\t0.25\nsakhin\t0.75\t0.125\nqabih\t0.0\t0.625\n";
    let lexicon = Lexicon::parse(tsv, std::path::Path::new("inline.tsv"))?;
    print!("{}", lexicon.priors(PriorFormula::MaxSub)?.to_tsv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> sentilevel::Result<()> {
    run()
}
