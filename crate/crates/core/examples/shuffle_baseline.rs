//! Per-method shuffle baselines and whether each method's agreement with
//! the others clears its own baseline.
//!
//! cargo run --example shuffle_baseline [seed]

use spanagree::{beats_baseline_report, load_corpus, shuffle_baseline, KPolicy, Level};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2024);
    let corpus = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini.jsonl"))?;
    let policy = KPolicy::parse("dynamic:mean:pos", 1)?;

    let first = &corpus.methods()[0];
    let b = shuffle_baseline(&corpus, first, policy, Level::Token, seed)?;
    println!(
        "{first} vs shuffled self: {:.4} ({} defined, {} skipped)\n",
        b.value.unwrap_or(f64::NAN),
        b.defined,
        b.skipped
    );

    for level in [Level::Token, Level::Span] {
        println!("{level} level, {policy}, seed {seed}");
        for row in beats_baseline_report(&corpus, corpus.methods(), policy, level, seed)? {
            let f = |v: Option<f64>| v.map_or("NA".into(), |v| format!("{v:.3}"));
            println!(
                "  {:>10}  BL {}  range {}..{}  {}",
                row.method,
                f(row.baseline),
                f(row.min_agreement),
                f(row.max_agreement),
                if row.beats_baseline() { "above" } else { "BELOW" }
            );
        }
    }
    Ok(())
}
