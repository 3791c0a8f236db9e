//! Runs the whole pipeline on the fixture corpus and writes every table to
//! a directory (default: a fresh temporary one).
//!
//! cargo run --release --example full_report [out-dir]

use std::path::PathBuf;

use spanagree::load_corpus;
use spanagree::report::{build_report, ReportConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini.jsonl"))?;
    let dir =
        std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("spanagree-report"));
    std::fs::create_dir_all(&dir)?;

    let config = ReportConfig { seed: 2024, with_human: true, ..ReportConfig::default() };
    let artifacts = build_report(&corpus, &config)?;
    for a in &artifacts {
        std::fs::write(dir.join(&a.name), &a.contents)?;
        println!("{:>6} bytes  {}", a.contents.len(), a.name);
    }
    println!("\n{}", std::fs::read_to_string(dir.join("thresholds_ranking.csv"))?);
    println!("wrote {} files to {}", artifacts.len(), dir.display());
    Ok(())
}
