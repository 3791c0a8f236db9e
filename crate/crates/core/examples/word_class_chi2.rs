//! Stop-word, punctuation and POS preferences of each method and the
//! human rationales, with pairwise chi-square tests.
//!
//! cargo run --example word_class_chi2

use spanagree::lingstats::{human_top_tags, DEFAULT_TAG_COUNT};
use spanagree::{chi2_all_pairs, load_corpus, KPolicy, HUMAN};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini.jsonl"))?;
    let policy = KPolicy::fixed(4);
    let tags = human_top_tags(&corpus, policy, DEFAULT_TAG_COUNT);
    let mut names = corpus.methods().to_vec();
    names.push(HUMAN.to_owned());

    let (profiles, outcomes) = chi2_all_pairs(&corpus, &names, policy, &tags, false)?;
    println!("{:>10} {:>6} {:>6}  {}", "name", "stop", "punct", tags.join("  "));
    for p in &profiles {
        let pos: Vec<String> = p.pos_ratios().iter().map(|(_, r)| format!("{r:.2}")).collect();
        println!("{:>10} {:>6.3} {:>6.3}  {}", p.name, p.stop_ratio(), p.punct_ratio(), pos.join("  "));
    }

    println!();
    let mut significant = 0;
    for o in outcomes.iter().filter(|o| o.pair.1 == HUMAN) {
        match &o.result {
            Ok(r) => println!(
                "{:>10} vs human  {:<5}  chi2 {:>7.3}  df {}  p {:.4}{}",
                o.pair.0,
                o.word_class.to_string(),
                r.statistic,
                r.df,
                r.p_value,
                if r.significant { " *" } else { "" }
            ),
            Err(e) => println!("{:>10} vs human  {:<5}  {e}", o.pair.0, o.word_class.to_string()),
        }
    }
    for o in &outcomes {
        significant += matches!(&o.result, Ok(r) if r.significant) as usize;
    }
    println!("\n{significant} of {} tests significant at 0.05", outcomes.len());
    Ok(())
}
