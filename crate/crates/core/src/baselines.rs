//! Monte-Carlo baselines and the dynamic-k threshold benchmark.
//!
//! Randomness comes from [`ChaCha8Rng`] and the Fisher-Yates shuffle in
//! `rand`, so results are bit-reproducible for a given build and seed.
//! Per-instance streams are seeded from the first eight bytes
//! (little-endian) of `SHA-256(seed.to_le_bytes() ‖ instance_id)`, which
//! makes shuffle baselines independent of corpus order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agreement::{agreement_at_k, pairwise_matrix, AgreementError, Level, MeanAgreement};
use crate::model::{AttributionProfile, Corpus, Instance};
use crate::selection::{select, select_profile, KPolicy, ThresholdKind, UnknownMethod};
use crate::spanset::targeted_spans;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RandomVectorSpec {
    pub length: usize,
    pub ones: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("vector length must be positive")]
    ZeroLength,
    #[error("ones must be between 1 and the vector length ({length}), got {ones}")]
    Ones { ones: usize, length: usize },
    #[error("trials must be positive")]
    ZeroTrials,
}

impl RandomVectorSpec {
    pub fn new(length: usize, ones: usize, trials: usize, seed: u64) -> Result<Self, SpecError> {
        if length == 0 {
            return Err(SpecError::ZeroLength);
        }
        if ones == 0 || ones > length {
            return Err(SpecError::Ones { ones, length });
        }
        if trials == 0 {
            return Err(SpecError::ZeroTrials);
        }
        Ok(RandomVectorSpec { length, ones, trials, seed })
    }

    /// Ones-count taken as `fraction` of `length`, rounded and clamped to
    /// `[1, length]`.
    pub fn from_fraction(fraction: f64, length: usize, trials: usize, seed: u64) -> Result<Self, SpecError> {
        let ones = ((fraction * length as f64).round() as usize).clamp(1, length.max(1));
        Self::new(length, ones, trials, seed)
    }
}

/// Mean agreement@k of two independently shuffled binary vectors.
pub fn random_vector_baseline(spec: &RandomVectorSpec) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut a: Vec<bool> = (0..spec.length).map(|i| i < spec.ones).collect();
    let mut b = a.clone();
    let mut sel_a = Vec::with_capacity(spec.ones);
    let mut sel_b = Vec::with_capacity(spec.ones);
    let mut sum = 0.0;
    for _ in 0..spec.trials {
        a.shuffle(&mut rng);
        b.shuffle(&mut rng);
        sel_a.clear();
        sel_a.extend(a.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i));
        sel_b.clear();
        sel_b.extend(b.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i));
        sum += agreement_at_k(&[&sel_a, &sel_b], spec.length).expect("ones >= 1");
    }
    sum / spec.trials as f64
}

/// Seed for one instance's private random stream.
pub fn instance_seed(seed: u64, instance_id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(instance_id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("SHA-256 yields 32 bytes"))
}

/// Uniform permutation of `scores` drawn from the instance's stream.
pub fn shuffled_scores(scores: &[f64], seed: u64, instance_id: &str) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(seed, instance_id));
    let mut out = scores.to_vec();
    out.shuffle(&mut rng);
    out
}

fn shuffle_agreement(
    instance: &Instance,
    method: &str,
    policy: KPolicy,
    level: Level,
    seed: u64,
) -> Result<Option<f64>, UnknownMethod> {
    let original = select(instance, method, policy)?;
    let profile = instance.profile(method).expect("select resolved the name");
    let shuffled = AttributionProfile::new(method, shuffled_scores(&profile.scores, seed, instance.id()));
    let permuted = select_profile(&shuffled, policy);
    Ok(match level {
        Level::Token => agreement_at_k(&[original.indices(), permuted.indices()], instance.len()),
        Level::Span => {
            let a = targeted_spans(instance, &original);
            let b = targeted_spans(instance, &permuted);
            agreement_at_k(&[a.span_indices(), b.span_indices()], instance.spans().len())
        }
    })
}

/// Agreement between a method and a score-shuffled copy of itself,
/// averaged over the corpus.
pub fn shuffle_baseline(
    corpus: &Corpus,
    method: &str,
    policy: KPolicy,
    level: Level,
    seed: u64,
) -> Result<MeanAgreement, UnknownMethod> {
    let per_instance: Vec<Option<f64>> = corpus
        .instances()
        .par_iter()
        .map(|inst| shuffle_agreement(inst, method, policy, level, seed))
        .collect::<Result<_, _>>()?;
    Ok(MeanAgreement::from_per_instance(per_instance))
}

/// One method's baseline against its agreement range with the others.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRow {
    pub method: String,
    pub baseline: Option<f64>,
    pub min_agreement: Option<f64>,
    pub max_agreement: Option<f64>,
    pub min_below_baseline: bool,
    pub max_below_baseline: bool,
}

impl BaselineRow {
    pub fn beats_baseline(&self) -> bool {
        !self.min_below_baseline && !self.max_below_baseline
    }
}

fn below(value: Option<f64>, baseline: Option<f64>) -> bool {
    matches!((value, baseline), (Some(v), Some(b)) if v < b)
}

pub fn beats_baseline_report(
    corpus: &Corpus,
    methods: &[String],
    policy: KPolicy,
    level: Level,
    seed: u64,
) -> Result<Vec<BaselineRow>, AgreementError> {
    let matrix = pairwise_matrix(corpus, methods, level, policy)?;
    methods
        .iter()
        .enumerate()
        .map(|(i, method)| {
            let baseline = shuffle_baseline(corpus, method, policy, level, seed)?.value;
            let others: Vec<f64> = matrix.row_others(i).flatten().collect();
            let min_agreement = others.iter().copied().reduce(f64::min);
            let max_agreement = others.iter().copied().reduce(f64::max);
            Ok(BaselineRow {
                method: method.clone(),
                baseline,
                min_agreement,
                max_agreement,
                min_below_baseline: below(min_agreement, baseline),
                max_below_baseline: below(max_agreement, baseline),
            })
        })
        .collect()
}

/// Average share of tokens and of spans a selection policy highlights,
/// over all instances and names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HighlightFractions {
    pub token: f64,
    pub span: f64,
}

pub fn highlight_fractions(
    corpus: &Corpus,
    names: &[String],
    policy: KPolicy,
) -> Result<Option<HighlightFractions>, UnknownMethod> {
    let mut token = 0.0;
    let mut span = 0.0;
    let mut count = 0usize;
    for name in names {
        for inst in corpus.instances() {
            let sel = select(inst, name, policy)?;
            token += sel.k() as f64 / inst.len() as f64;
            span += targeted_spans(inst, &sel).len() as f64 / inst.spans().len() as f64;
            count += 1;
        }
    }
    Ok((count > 0).then(|| HighlightFractions { token: token / count as f64, span: span / count as f64 }))
}

/// Target (mean, sd) pair for dynamic k, e.g. a human-preference average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KTarget {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KStat {
    pub method: String,
    pub threshold: ThresholdKind,
    pub positive_only: bool,
    pub mean_k: f64,
    pub sd_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdDistance {
    pub threshold: ThresholdKind,
    pub positive_only: bool,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdBenchmark {
    pub target: KTarget,
    pub window: usize,
    /// Grid order: all-score thresholds then positive-only, methods inner.
    pub stats: Vec<KStat>,
    /// Ascending by distance; ties keep grid order.
    pub ranking: Vec<ThresholdDistance>,
}

impl ThresholdBenchmark {
    pub fn stat(&self, method: &str, threshold: ThresholdKind, positive_only: bool) -> Option<&KStat> {
        self.stats.iter().find(|s| s.method == method && s.threshold == threshold && s.positive_only == positive_only)
    }

    pub fn distance(&self, threshold: ThresholdKind, positive_only: bool) -> Option<f64> {
        self.ranking.iter().find(|d| d.threshold == threshold && d.positive_only == positive_only).map(|d| d.distance)
    }
}

/// Mean and population sd of dynamic k for every method under all twelve
/// threshold combinations, plus each combination's mean Euclidean distance
/// from `target` in (mean, sd) space.
pub fn threshold_benchmark(
    corpus: &Corpus,
    methods: &[String],
    target: KTarget,
    window: usize,
) -> Result<ThresholdBenchmark, UnknownMethod> {
    let mut stats = Vec::new();
    let mut ranking = Vec::new();
    for policy in KPolicy::dynamic_grid(window) {
        let KPolicy::Dynamic { threshold, positive_only, .. } = policy else { unreachable!() };
        let mut distance_sum = 0.0;
        for method in methods {
            let ks: Vec<f64> = corpus
                .instances()
                .par_iter()
                .map(|inst| select(inst, method, policy).map(|s| s.k() as f64))
                .collect::<Result<_, _>>()?;
            let d = ks.len() as f64;
            let mean_k = ks.iter().sum::<f64>() / d;
            let sd_k = (ks.iter().map(|k| (k - mean_k) * (k - mean_k)).sum::<f64>() / d).sqrt();
            distance_sum += ((mean_k - target.mean).powi(2) + (sd_k - target.sd).powi(2)).sqrt();
            stats.push(KStat { method: method.clone(), threshold, positive_only, mean_k, sd_k });
        }
        ranking.push(ThresholdDistance { threshold, positive_only, distance: distance_sum / methods.len() as f64 });
    }
    ranking.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    Ok(ThresholdBenchmark { target, window, stats, ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Span, Token};

    fn inst(id: &str, scores: &[f64]) -> Instance {
        let n = scores.len();
        let tokens =
            (0..n).map(|_| Token { text: "w".into(), pos: "NOUN".into(), is_stop: false, is_punct: false }).collect();
        let spans = (0..n).map(|i| Span::new(i, i + 1, "NP")).collect();
        Instance::new(id, "x", tokens, spans, vec![AttributionProfile::new("m", scores.to_vec())], vec![0.0; n])
            .unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(RandomVectorSpec::new(0, 1, 1, 0).is_err());
        assert!(RandomVectorSpec::new(10, 0, 1, 0).is_err());
        assert!(RandomVectorSpec::new(10, 11, 1, 0).is_err());
        assert!(RandomVectorSpec::new(10, 3, 0, 0).is_err());
        assert_eq!(RandomVectorSpec::from_fraction(0.16, 100, 1, 0).unwrap().ones, 16);
        assert_eq!(RandomVectorSpec::from_fraction(0.0, 100, 1, 0).unwrap().ones, 1);
    }

    #[test]
    fn full_vectors_agree_perfectly() {
        for trials in [1, 7, 50] {
            let spec = RandomVectorSpec::new(20, 20, trials, 3).unwrap();
            assert_eq!(random_vector_baseline(&spec), 1.0);
        }
    }

    #[test]
    fn random_vectors_are_deterministic() {
        let spec = RandomVectorSpec::new(100, 16, 200, 11).unwrap();
        assert_eq!(random_vector_baseline(&spec).to_bits(), random_vector_baseline(&spec).to_bits());
        let other = RandomVectorSpec { seed: 12, ..spec };
        assert_ne!(random_vector_baseline(&spec), random_vector_baseline(&other));
    }

    #[test]
    fn instance_seed_depends_on_both_inputs() {
        assert_eq!(instance_seed(1, "a"), instance_seed(1, "a"));
        assert_ne!(instance_seed(1, "a"), instance_seed(2, "a"));
        assert_ne!(instance_seed(1, "a"), instance_seed(1, "b"));
    }

    #[test]
    fn shuffle_preserves_multiset_and_threshold() {
        let scores = [0.3, -0.1, 0.7, 0.2, 0.0, -0.4, 0.9];
        for seed in 0..20 {
            let shuffled = shuffled_scores(&scores, seed, "x");
            let mut a = scores.to_vec();
            let mut b = shuffled.clone();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            assert_eq!(a, b);
            for kind in ThresholdKind::ALL {
                for pos in [false, true] {
                    assert_eq!(
                        crate::compute_threshold(&scores, kind, pos).value,
                        crate::compute_threshold(&shuffled, kind, pos).value
                    );
                }
            }
        }
    }

    #[test]
    fn identity_permutation_gives_perfect_baseline() {
        // Enumerate seeds until the length-2 permutation for this instance
        // is the identity, then the shuffled profile equals the original.
        let seed = (0u64..).find(|&s| shuffled_scores(&[0.0, 1.0], s, "only") == vec![0.0, 1.0]).unwrap();
        let corpus = Corpus::new(vec![inst("only", &[0.2, 0.8])]).unwrap();
        let m = shuffle_baseline(&corpus, "m", KPolicy::fixed(1), Level::Token, seed).unwrap();
        assert_eq!(m.value, Some(1.0));
        // And the swapping seed gives perfect disagreement.
        let swap = (0u64..).find(|&s| shuffled_scores(&[0.0, 1.0], s, "only") == vec![1.0, 0.0]).unwrap();
        let m = shuffle_baseline(&corpus, "m", KPolicy::fixed(1), Level::Token, swap).unwrap();
        assert_eq!(m.value, Some(0.5));
    }

    #[test]
    fn fixed_k_covering_everything_is_one() {
        let corpus = Corpus::new(vec![inst("a", &[0.1, 0.5, 0.3]), inst("b", &[0.9, 0.2, 0.4, 0.0])]).unwrap();
        for level in [Level::Token, Level::Span] {
            let m = shuffle_baseline(&corpus, "m", KPolicy::fixed(4), level, 5).unwrap();
            assert_eq!(m.value, Some(1.0));
        }
    }

    #[test]
    fn constant_profiles_skip_everything() {
        let corpus = Corpus::new(vec![inst("a", &[0.5; 4])]).unwrap();
        let m = shuffle_baseline(&corpus, "m", KPolicy::dynamic(ThresholdKind::Mean, false), Level::Token, 1).unwrap();
        assert_eq!((m.value, m.skipped), (None, 1));
    }

    #[test]
    fn duplicate_method_reaches_one() {
        let tokens: Vec<Token> =
            (0..5).map(|_| Token { text: "w".into(), pos: "NOUN".into(), is_stop: false, is_punct: false }).collect();
        let s = vec![0.1, 0.6, 0.2, 0.5, 0.3];
        let instance = Instance::new(
            "a",
            "x",
            tokens,
            vec![Span::new(0, 5, "NP")],
            vec![AttributionProfile::new("A", s.clone()), AttributionProfile::new("B", s)],
            vec![0.0; 5],
        )
        .unwrap();
        let corpus = Corpus::new(vec![instance]).unwrap();
        let names = vec!["A".to_string(), "B".to_string()];
        let rows = beats_baseline_report(&corpus, &names, KPolicy::fixed(2), Level::Token, 3).unwrap();
        assert_eq!(rows[0].max_agreement, Some(1.0));
        assert!(rows[0].max_agreement >= rows[0].baseline);
        assert!(rows.iter().all(BaselineRow::beats_baseline));
    }

    #[test]
    fn benchmark_distance_arithmetic() {
        // k per instance under dynamic:mean for method m: 1 peak each.
        let corpus = Corpus::new(vec![inst("a", &[0.0, 1.0, 0.0]), inst("b", &[1.0, 0.0, 0.0])]).unwrap();
        let names = vec!["m".to_string()];
        let bench = threshold_benchmark(&corpus, &names, KTarget { mean: 1.0, sd: 0.0 }, 1).unwrap();
        let stat = bench.stat("m", ThresholdKind::Mean, false).unwrap();
        assert_eq!((stat.mean_k, stat.sd_k), (1.0, 0.0));
        assert_eq!(bench.distance(ThresholdKind::Mean, false), Some(0.0));
        assert_eq!(bench.ranking.len(), 12);
        assert_eq!(bench.stats.len(), 12);
        assert!(bench.ranking.windows(2).all(|w| w[0].distance <= w[1].distance));
        let bench = threshold_benchmark(&corpus, &names, KTarget { mean: 4.0, sd: 4.0 }, 1).unwrap();
        // (1,0) vs (4,4): distance 5.
        assert_eq!(bench.distance(ThresholdKind::Mean, false), Some(5.0));
    }

    #[test]
    fn highlight_fraction_of_fixed_k() {
        let corpus = Corpus::new(vec![inst("a", &[0.1, 0.5, 0.3, 0.2])]).unwrap();
        let f = highlight_fractions(&corpus, &["m".to_string()], KPolicy::fixed(1)).unwrap().unwrap();
        assert_eq!((f.token, f.span), (0.25, 0.25));
    }
}
