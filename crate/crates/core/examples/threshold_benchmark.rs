//! Ranks the twelve dynamic-k thresholds by how close each method's
//! (mean k, sd k) lands to a target, here 4 +/- 3.
//!
//! cargo run --example threshold_benchmark

use spanagree::{load_corpus, threshold_benchmark, KPolicy, KTarget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini.jsonl"))?;
    let target = KTarget { mean: 4.0, sd: 3.0 };
    let bench = threshold_benchmark(&corpus, corpus.methods(), target, 1)?;

    for d in &bench.ranking {
        let policy = KPolicy::dynamic(d.threshold, d.positive_only);
        let ks: Vec<String> = corpus
            .methods()
            .iter()
            .map(|m| {
                let s = bench.stat(m, d.threshold, d.positive_only).unwrap();
                format!("{:.1}±{:.1}", s.mean_k, s.sd_k)
            })
            .collect();
        println!("{:<22} {:.3}   {}", policy.to_string(), d.distance, ks.join(" "));
    }
    Ok(())
}
