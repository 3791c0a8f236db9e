//! Top-k token selection under fixed and dynamic k.
//!
//! Dynamic k keeps the tokens that are both *locally* important (a strict
//! maximum within a neighbour window) and *globally* important (strictly
//! above a profile-level statistic). The number of such peaks is the
//! instance's k.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AttributionProfile, Instance};

/// Profile-level statistic used as the global-importance cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ThresholdKind {
    Mean,
    MeanPlusSd,
    MeanPlus2Sd,
    MeanMinusSd,
    MeanMinus2Sd,
    Median,
}

impl ThresholdKind {
    pub const ALL: [ThresholdKind; 6] = [
        ThresholdKind::Mean,
        ThresholdKind::MeanPlusSd,
        ThresholdKind::MeanPlus2Sd,
        ThresholdKind::MeanMinusSd,
        ThresholdKind::MeanMinus2Sd,
        ThresholdKind::Median,
    ];

    /// Token used in policy strings, e.g. `mean+2sd`.
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdKind::Mean => "mean",
            ThresholdKind::MeanPlusSd => "mean+sd",
            ThresholdKind::MeanPlus2Sd => "mean+2sd",
            ThresholdKind::MeanMinusSd => "mean-sd",
            ThresholdKind::MeanMinus2Sd => "mean-2sd",
            ThresholdKind::Median => "median",
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ThresholdKind {
    type Err = PolicyParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ThresholdKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| PolicyParseError(format!("unknown threshold {s:?}")))
    }
}

/// How many tokens to select per instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KPolicy {
    Fixed { k: usize },
    Dynamic { threshold: ThresholdKind, positive_only: bool, window: usize },
}

impl KPolicy {
    pub fn fixed(k: usize) -> Self {
        assert!(k >= 1, "fixed k must be at least 1");
        KPolicy::Fixed { k }
    }

    pub fn dynamic(threshold: ThresholdKind, positive_only: bool) -> Self {
        KPolicy::Dynamic { threshold, positive_only, window: 1 }
    }

    pub fn with_window(self, window: usize) -> Self {
        assert!(window >= 1, "peak window must be at least 1");
        match self {
            KPolicy::Dynamic { threshold, positive_only, .. } => KPolicy::Dynamic { threshold, positive_only, window },
            fixed => fixed,
        }
    }

    /// All twelve dynamic (threshold, positive-only) combinations, all-score
    /// variants first.
    pub fn dynamic_grid(window: usize) -> Vec<KPolicy> {
        [false, true]
            .into_iter()
            .flat_map(|pos| ThresholdKind::ALL.into_iter().map(move |t| KPolicy::dynamic(t, pos).with_window(window)))
            .collect()
    }

    /// Parses `fixed:<k>` or `dynamic:<threshold>[:pos]`.
    pub fn parse(s: &str, window: usize) -> Result<Self, PolicyParseError> {
        if window == 0 {
            return Err(PolicyParseError("window must be at least 1".into()));
        }
        let mut parts = s.split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("fixed"), Some(k), None, None) => match k.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(KPolicy::Fixed { k }),
                _ => Err(PolicyParseError(format!("fixed k must be a positive integer, got {k:?}"))),
            },
            (Some("dynamic"), Some(t), pos, None) => {
                let positive_only = match pos {
                    None => false,
                    Some("pos") => true,
                    Some(other) => return Err(PolicyParseError(format!("unknown dynamic modifier {other:?}"))),
                };
                Ok(KPolicy::Dynamic { threshold: t.parse()?, positive_only, window })
            }
            _ => Err(PolicyParseError(format!("policy {s:?} is not fixed:<k> or dynamic:<threshold>[:pos]"))),
        }
    }

    /// Short label used in file names and table headers.
    pub fn slug(&self) -> String {
        match *self {
            KPolicy::Fixed { k } => format!("fixed{k}"),
            KPolicy::Dynamic { threshold, positive_only, window } => {
                let t = threshold.as_str().replace('+', "plus").replace('-', "minus");
                let pos = if positive_only { "_pos" } else { "" };
                let w = if window == 1 { String::new() } else { format!("_w{window}") };
                format!("dynamic_{t}{pos}{w}")
            }
        }
    }
}

impl fmt::Display for KPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KPolicy::Fixed { k } => write!(f, "fixed:{k}"),
            KPolicy::Dynamic { threshold, positive_only, window } => {
                write!(f, "dynamic:{threshold}")?;
                if positive_only {
                    f.write_str(":pos")?;
                }
                if window != 1 {
                    write!(f, " (window {window})")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid policy: {0}")]
pub struct PolicyParseError(pub String);

/// Ascending token indices chosen for one profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopKSelection {
    pub method: String,
    indices: Vec<usize>,
}

impl TopKSelection {
    /// `indices` are sorted and deduplicated.
    pub fn new(method: impl Into<String>, mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        TopKSelection { method: method.into(), indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// A computed global-importance cut. `value` is `None` when the statistic
/// is undefined (positive-only over a profile with no positive score).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdValue {
    pub kind: ThresholdKind,
    pub positive_only: bool,
    pub value: Option<f64>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation.
fn std_dev(values: &[f64], mean: f64) -> f64 {
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
    var.sqrt()
}

/// `sorted` must be in ascending order.
fn median(sorted: &[f64]) -> f64 {
    let mid = sorted.len() / 2;
    if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    }
}

/// Statistics are taken over the sorted scores, so the cut is identical
/// for every permutation of a profile.
pub fn compute_threshold(scores: &[f64], kind: ThresholdKind, positive_only: bool) -> ThresholdValue {
    let mut subset: Vec<f64> =
        if positive_only { scores.iter().copied().filter(|s| *s > 0.0).collect() } else { scores.to_vec() };
    subset.sort_by(f64::total_cmp);
    let value = (!subset.is_empty()).then(|| {
        let mu = mean(&subset);
        match kind {
            ThresholdKind::Mean => mu,
            ThresholdKind::MeanPlusSd => mu + std_dev(&subset, mu),
            ThresholdKind::MeanPlus2Sd => mu + 2.0 * std_dev(&subset, mu),
            ThresholdKind::MeanMinusSd => mu - std_dev(&subset, mu),
            ThresholdKind::MeanMinus2Sd => mu - 2.0 * std_dev(&subset, mu),
            ThresholdKind::Median => median(&subset),
        }
    });
    ThresholdValue { kind, positive_only, value }
}

/// Indices whose score is strictly greater than every other score within
/// `window` positions. Windows are truncated at the sequence edges, so a
/// boundary token only competes with the neighbours it has.
pub fn local_peaks(scores: &[f64], window: usize) -> Vec<usize> {
    let n = scores.len();
    (0..n)
        .filter(|&i| {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(n - 1);
            (lo..=hi).all(|j| j == i || scores[i] > scores[j])
        })
        .collect()
}

/// The `k` highest-scoring tokens, ties going to the lower index.
pub fn select_fixed(profile: &AttributionProfile, k: usize) -> TopKSelection {
    let scores = &profile.scores;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(k);
    TopKSelection::new(profile.method.clone(), order)
}

/// Strict local peaks strictly above the global threshold. A non-dynamic
/// policy falls back to [`select_fixed`].
pub fn select_dynamic(profile: &AttributionProfile, policy: KPolicy) -> TopKSelection {
    let (threshold, positive_only, window) = match policy {
        KPolicy::Dynamic { threshold, positive_only, window } => (threshold, positive_only, window),
        KPolicy::Fixed { k } => return select_fixed(profile, k),
    };
    let cut = compute_threshold(&profile.scores, threshold, positive_only);
    let indices = match cut.value {
        Some(cut) => local_peaks(&profile.scores, window).into_iter().filter(|&i| profile.scores[i] > cut).collect(),
        None => Vec::new(),
    };
    TopKSelection::new(profile.method.clone(), indices)
}

pub fn select_profile(profile: &AttributionProfile, policy: KPolicy) -> TopKSelection {
    match policy {
        KPolicy::Fixed { k } => select_fixed(profile, k),
        dynamic => select_dynamic(profile, dynamic),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown method {name:?} in instance {instance:?}")]
pub struct UnknownMethod {
    pub name: String,
    pub instance: String,
}

/// Selects tokens from the named method profile, or from the human
/// rationale when `name` is [`crate::HUMAN`].
pub fn select(instance: &Instance, name: &str, policy: KPolicy) -> Result<TopKSelection, UnknownMethod> {
    instance
        .profile(name)
        .map(|p| select_profile(p, policy))
        .ok_or_else(|| UnknownMethod { name: name.to_owned(), instance: instance.id().to_owned() })
}
