//! Dynamic k: strict local peaks above a global threshold, for every
//! threshold in the grid.
//!
//! cargo run --example dynamic_k

use spanagree::{compute_threshold, local_peaks, select_dynamic, select_fixed, AttributionProfile, KPolicy};

fn main() {
    let profile = AttributionProfile::new("demo", vec![-0.5, 0.2, -0.1, 0.4, 0.1, 0.35, 0.3, -0.2, 0.05]);
    println!("scores: {:?}", profile.scores);
    println!("local peaks (window 1): {:?}", local_peaks(&profile.scores, 1));
    println!("fixed k=4: {:?}\n", select_fixed(&profile, 4).indices());

    println!("{:<22} {:>10} {:>3}  selected", "policy", "threshold", "k");
    for policy in KPolicy::dynamic_grid(1) {
        let KPolicy::Dynamic { threshold, positive_only, .. } = policy else { unreachable!() };
        let cut = compute_threshold(&profile.scores, threshold, positive_only);
        let sel = select_dynamic(&profile, policy);
        let cut = cut.value.map_or("undefined".to_owned(), |v| format!("{v:.4}"));
        println!("{:<22} {:>10} {:>3}  {:?}", policy.to_string(), cut, sel.k(), sel.indices());
    }

    // Wider windows demand dominance over more neighbours.
    for window in 1..=3 {
        let sel = select_dynamic(&profile, KPolicy::parse("dynamic:mean", window).unwrap());
        println!("window {window}: {:?}", sel.indices());
    }
}
