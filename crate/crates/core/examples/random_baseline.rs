//! Monte-Carlo agreement of two random binary vectors, compared with the
//! exact expectation from the hypergeometric overlap distribution.
//!
//! cargo run --release --example random_baseline

use spanagree::{random_vector_baseline, RandomVectorSpec};

fn ln_choose(n: usize, k: usize) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

fn exact(length: usize, ones: usize) -> f64 {
    (0..=ones)
        .filter(|&x| x + length >= 2 * ones)
        .map(|x| {
            let p = (ln_choose(ones, x) + ln_choose(length - ones, ones - x) - ln_choose(length, ones)).exp();
            p * ones as f64 / (2 * ones - x) as f64
        })
        .sum()
}

fn main() {
    let seed = 7;
    for (label, ones) in [("token", 16), ("span", 23)] {
        println!("{label}: length 100, {ones} ones, exact {:.4}", exact(100, ones));
        for trials in [1_000, 10_000, 100_000] {
            let spec = RandomVectorSpec::new(100, ones, trials, seed).unwrap();
            println!("  {trials:>7} trials: {:.4}", random_vector_baseline(&spec));
        }
    }
}
