//! Relevance and agreement@k on hand-sized selections, then the pairwise
//! matrix over the bundled fixture corpus.
//!
//! cargo run --example agreement_at_k

use spanagree::{agreement_at_k, load_corpus, pairwise_matrix, relevance, KPolicy, Level};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a: &[usize] = &[1, 3];
    let b: &[usize] = &[1, 4];
    println!("A={a:?} B={b:?} over 6 tokens");
    println!("  relevance   {:?}", relevance(&[a, b], 6));
    println!("  agreement@k {:.4}", agreement_at_k(&[a, b], 6).unwrap());
    println!("  disjoint    {:.4}", agreement_at_k(&[&[0, 1], &[2, 3]], 6).unwrap());
    println!("  both empty  {:?}", agreement_at_k(&[&[], &[]], 6));

    let corpus = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini.jsonl"))?;
    let matrix = pairwise_matrix(&corpus, corpus.methods(), Level::Token, KPolicy::fixed(4))?;
    println!("\ntoken-level agreement, fixed k=4, {} instances", corpus.len());
    print!("{:>10}", "");
    for l in &matrix.labels {
        print!("{l:>10}");
    }
    println!();
    for (i, l) in matrix.labels.iter().enumerate() {
        print!("{l:>10}");
        for j in 0..matrix.labels.len() {
            print!("{:>10.4}", matrix.value(i, j).unwrap_or(f64::NAN));
        }
        println!();
    }
    println!("mean off-diagonal: {:.4}", matrix.mean_off_diagonal().unwrap_or(f64::NAN));
    Ok(())
}
