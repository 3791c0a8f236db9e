#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spanagree::{AttributionProfile, Corpus, Instance, KPolicy, Span, ThresholdKind, Token};

/// One NOUN token per score, one single-token span per token.
pub fn flat_instance(id: &str, profiles: &[(&str, Vec<f64>)]) -> Instance {
    let n = profiles[0].1.len();
    let tokens =
        (0..n).map(|i| Token { text: format!("w{i}"), pos: "NOUN".into(), is_stop: false, is_punct: false }).collect();
    let spans = (0..n).map(|i| Span::new(i, i + 1, "X")).collect();
    let profiles = profiles.iter().map(|(m, s)| AttributionProfile::new(*m, s.clone())).collect();
    Instance::new(id, "neutral", tokens, spans, profiles, vec![0.0; n]).unwrap()
}

/// Tokens with random chunk boundaries and `methods` random score profiles.
pub fn random_instance(rng: &mut ChaCha8Rng, id: usize, methods: &[&str], max_len: usize) -> Instance {
    let n = rng.random_range(1..=max_len);
    let tokens =
        (0..n).map(|i| Token { text: format!("w{i}"), pos: "NOUN".into(), is_stop: false, is_punct: false }).collect();
    let mut spans = Vec::new();
    let mut start = 0;
    while start < n {
        let end = (start + rng.random_range(1..=4)).min(n);
        spans.push(Span::new(start, end, "NP"));
        start = end;
    }
    let profiles = methods
        .iter()
        .map(|m| {
            // Coarse grid half the time so ties and plateaus occur.
            let coarse = rng.random_bool(0.5);
            let scores = (0..n)
                .map(|_| if coarse { rng.random_range(-4i32..=4) as f64 * 0.25 } else { rng.random_range(-1.0..1.0) })
                .collect();
            AttributionProfile::new(*m, scores)
        })
        .collect();
    Instance::new(format!("r{id}"), "neutral", tokens, spans, profiles, vec![0.0; n]).unwrap()
}

/// Planted dynamic-k layout: `k_big` descending peaks, 12 mid peaks, a
/// small positive plateau, a zero, then 15 negative peaks. Magnitudes are
/// jittered by up to 3%. Under `mean+2sd` over positive scores exactly the
/// `k_big` leading peaks survive.
pub fn planted_profile(rng: &mut ChaCha8Rng, k_big: usize) -> Vec<f64> {
    let mut j = |x: f64| x * rng.random_range(0.97..1.03);
    let (h0, hr, v, m, v2, p, q, r) = (1.0, 0.97f64, 0.13, 0.41, 0.04, 0.03, 0.99, 1.59);
    let (h0, v, m, v2, p, q, r) = (j(h0), j(v), j(m), j(v2), j(p), j(q), j(r));
    let mut s = Vec::new();
    for i in 0..k_big {
        s.extend([h0 * hr.powi(i as i32), v]);
    }
    for _ in 0..12 {
        s.extend([m, v2]);
    }
    s.extend(std::iter::repeat_n(p, 29));
    s.push(0.0);
    for _ in 0..15 {
        s.extend([-q, -r]);
    }
    s
}

pub const PLANTED: (ThresholdKind, bool) = (ThresholdKind::MeanPlus2Sd, true);

/// 40 instances, k alternating 1 and 7 (mean 4, sd 3), two methods.
pub fn planted_corpus(seed: u64) -> (Corpus, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ks: Vec<usize> = (0..40).map(|i| if i % 2 == 0 { 1 } else { 7 }).collect();
    let instances = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let a = planted_profile(&mut rng, k);
            let b = planted_profile(&mut rng, k);
            flat_instance(&format!("p{i}"), &[("alpha", a), ("beta", b)])
        })
        .collect();
    (Corpus::new(instances).unwrap(), ks)
}

/// Brute-force strict local peaks.
pub fn oracle_peaks(s: &[f64], window: usize) -> Vec<usize> {
    (0..s.len())
        .filter(|&i| {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(s.len() - 1);
            (lo..=hi).all(|j| j == i || s[i] > s[j])
        })
        .collect()
}

/// Threshold from first principles in input order, population sd.
pub fn oracle_threshold(s: &[f64], kind: ThresholdKind, positive_only: bool) -> Option<f64> {
    let x: Vec<f64> = s.iter().copied().filter(|&v| !positive_only || v > 0.0).collect();
    if x.is_empty() {
        return None;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = x.clone();
    sorted.sort_by(f64::total_cmp);
    let median =
        if x.len() % 2 == 1 { sorted[x.len() / 2] } else { (sorted[x.len() / 2 - 1] + sorted[x.len() / 2]) / 2.0 };
    Some(match kind {
        ThresholdKind::Mean => mean,
        ThresholdKind::MeanPlusSd => mean + sd,
        ThresholdKind::MeanPlus2Sd => mean + 2.0 * sd,
        ThresholdKind::MeanMinusSd => mean - sd,
        ThresholdKind::MeanMinus2Sd => mean - 2.0 * sd,
        ThresholdKind::Median => median,
    })
}

/// Exact selection for scores on an integer grid (`units[i] = s[i] * scale`):
/// all comparisons are done in integers, sd via squared inequalities.
pub fn oracle_select_exact(units: &[i64], window: usize, kind: ThresholdKind, positive_only: bool) -> Vec<usize> {
    let x: Vec<i128> = units.iter().map(|&u| u as i128).filter(|&v| !positive_only || v > 0).collect();
    if x.is_empty() {
        return Vec::new();
    }
    let n = x.len() as i128;
    let sum: i128 = x.iter().sum();
    let sumsq: i128 = x.iter().map(|v| v * v).sum();
    let var = n * sumsq - sum * sum; // n^2 * population variance
    let mut sorted = x.clone();
    sorted.sort();
    let above = |s: i128| -> bool {
        let d = n * s - sum; // n * (s - mean)
        let plus = |c: i128| d > 0 && d * d > c * c * var;
        let minus = |c: i128| if d >= 0 { d > 0 || var > 0 } else { d * d < c * c * var };
        match kind {
            ThresholdKind::Mean => d > 0,
            ThresholdKind::MeanPlusSd => plus(1),
            ThresholdKind::MeanPlus2Sd => plus(2),
            ThresholdKind::MeanMinusSd => minus(1),
            ThresholdKind::MeanMinus2Sd => minus(2),
            ThresholdKind::Median => {
                let len = sorted.len();
                if len % 2 == 1 {
                    s > sorted[len / 2]
                } else {
                    2 * s > sorted[len / 2 - 1] + sorted[len / 2]
                }
            }
        }
    };
    let as_f: Vec<f64> = units.iter().map(|&u| u as f64).collect();
    oracle_peaks(&as_f, window).into_iter().filter(|&i| above(units[i] as i128)).collect()
}

pub fn policy(kind: ThresholdKind, positive_only: bool, window: usize) -> KPolicy {
    KPolicy::dynamic(kind, positive_only).with_window(window)
}
