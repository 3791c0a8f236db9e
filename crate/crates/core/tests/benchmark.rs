mod common;

use common::*;
use spanagree::{threshold_benchmark, Corpus, KTarget, ThresholdKind};

#[test]
fn distances_average_over_methods() {
    // Under dynamic:mean, "four" always has k = 4 and "flat" has k = 0:
    // distances from (4, 3) are 3 and 5.
    let four = vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
    let flat = vec![0.5; 8];
    let corpus = Corpus::new(
        (0..5).map(|i| flat_instance(&format!("i{i}"), &[("four", four.clone()), ("flat", flat.clone())])).collect(),
    )
    .unwrap();
    let target = KTarget { mean: 4.0, sd: 3.0 };
    let bench = threshold_benchmark(&corpus, corpus.methods(), target, 1).unwrap();
    let four_stat = bench.stat("four", ThresholdKind::Mean, false).unwrap();
    assert_eq!((four_stat.mean_k, four_stat.sd_k), (4.0, 0.0));
    let flat_stat = bench.stat("flat", ThresholdKind::Mean, false).unwrap();
    assert_eq!((flat_stat.mean_k, flat_stat.sd_k), (0.0, 0.0));
    assert_eq!(bench.distance(ThresholdKind::Mean, false), Some(4.0));

    let only_four = threshold_benchmark(&corpus, &["four".to_string()], target, 1).unwrap();
    assert_eq!(only_four.distance(ThresholdKind::Mean, false), Some(3.0));
}

#[test]
fn planted_corpus_ranks_planted_first_for_any_jitter_seed() {
    for seed in 0..20 {
        let (corpus, _) = planted_corpus(seed);
        let bench = threshold_benchmark(&corpus, corpus.methods(), KTarget { mean: 4.0, sd: 3.0 }, 1).unwrap();
        let first = &bench.ranking[0];
        assert_eq!((first.threshold, first.positive_only), PLANTED, "seed {seed}");
        assert!(bench.ranking[1].distance - first.distance > 1.0, "seed {seed}");
        assert!(bench.ranking.iter().all(|d| d.distance >= 0.0));
    }
}
