//! Lifting token selections to chunk spans, and token- versus span-level
//! agreement on the fixture corpus.
//!
//! cargo run --example span_agreement

use spanagree::{load_corpus, pairwise_matrix, select, span_stats, targeted_spans, KPolicy, Level};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini.jsonl"))?;
    let inst = &corpus.instances()[0];
    let policy = KPolicy::parse("dynamic:mean", 1)?;

    let words: Vec<&str> = inst.tokens().iter().map(|t| t.text.as_str()).collect();
    println!("{}: {}", inst.id(), words.join(" "));
    for span in inst.spans() {
        print!("[{} {}] ", span.label, words[span.start..span.end].join(" "));
    }
    println!("\n");
    for name in corpus.methods() {
        let sel = select(inst, name, policy)?;
        let spans = targeted_spans(inst, &sel);
        println!("{name:>10}: tokens {:?} -> spans {:?}", sel.indices(), spans.span_indices());
    }

    let stats = span_stats(&corpus, corpus.methods(), policy)?;
    let ratio = stats.span_token_ratio.unwrap();
    println!("\nspans per token: mean {:.3}, range {:.3}..{:.3}", ratio.mean, ratio.min, ratio.max);

    for level in [Level::Token, Level::Span] {
        let m = pairwise_matrix(&corpus, corpus.methods(), level, policy)?;
        println!("{level:>5}-level mean agreement ({policy}): {:.4}", m.mean_off_diagonal().unwrap());
    }
    Ok(())
}
