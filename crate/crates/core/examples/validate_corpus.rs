//! Streams a JSONL corpus through validation and shows how a bad line is
//! reported.
//!
//! cargo run --example validate_corpus [path]

use std::io::Cursor;

use spanagree::{load_corpus, read_corpus};

const BAD: &str = r#"{"id":"x","label":"neutral","tokens":[{"text":"a","pos":"DET","is_stop":true,"is_punct":false},{"text":".","pos":"PUNCT","is_stop":true,"is_punct":true}],"spans":[{"start":0,"end":2,"label":"NP"}],"profiles":{"m":[0.1,0.2]},"human":[0.0,1.0]}"#;

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini.jsonl").to_owned());
    match load_corpus(&path) {
        Ok(c) => {
            let tokens: usize = c.instances().iter().map(|i| i.len()).sum();
            println!("{path}: {} instances, {tokens} tokens, methods {:?}", c.len(), c.methods());
        }
        Err(e) => println!("{path}: {e}"),
    }

    let input = format!("\n{BAD}\n");
    match read_corpus(Cursor::new(input)) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("rejected: {e}"),
    }
}
