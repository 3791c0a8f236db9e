//! Within DET NOUN chunks that two consensus methods both target, counts
//! where two probe methods put their selection.
//!
//! cargo run --example np_alternation

use spanagree::lingstats::AlternationQuery;
use spanagree::{load_corpus, np_alternation, KPolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini.jsonl"))?;
    let consensus = ["PartSHAP".to_owned(), "LIME".to_owned()];
    let pattern = ["DET".to_owned(), "NOUN".to_owned()];
    let query = AlternationQuery {
        probes: ("VanGrad", "GradxI"),
        consensus: &consensus,
        pattern: &pattern,
        span_label: "NP",
        policy: KPolicy::fixed(4),
    };
    let r = np_alternation(&corpus, &query)?;

    println!("two-token NPs targeted by both consensus methods: {}", r.same_length_spans);
    println!("  of which DET NOUN: {}", r.matched_spans);
    println!("{:>8} {:>8} {:>8}", "", "DET", "NOUN");
    println!("{:>8} {:>8} {:>8}", r.probes.0, r.probe1_targets[0], r.probe1_targets[1]);
    println!("{:>8} {:>8} {:>8}", r.probes.1, r.probe2_targets[0], r.probe2_targets[1]);
    println!("{} on NOUN while {} on DET: {}", r.probes.0, r.probes.1, r.alternation);
    Ok(())
}
