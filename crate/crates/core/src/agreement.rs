//! Relevance and agreement@k between selections, per instance and as
//! dataset means, at token or span level.
//!
//! For `m` selections over a unit universe, the relevance of a unit is the
//! fraction of selections containing it. Agreement@k averages relevance
//! over units that at least one selection contains, so perfect agreement
//! on unimportant units does not count. Two disjoint selections of equal
//! size score 0.5; identical ones score 1.0.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Corpus, Instance};
use crate::selection::{select, KPolicy, UnknownMethod};
use crate::spanset::targeted_spans;

/// Unit universe agreement is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Token,
    Span,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Token => "token",
            Level::Span => "span",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "token" => Ok(Level::Token),
            "span" => Ok(Level::Span),
            other => Err(format!("unknown level {other:?}, expected token or span")),
        }
    }
}

fn membership_counts(selections: &[&[usize]], units: usize) -> Vec<usize> {
    let mut counts = vec![0usize; units];
    for sel in selections {
        for &u in *sel {
            counts[u] += 1;
        }
    }
    counts
}

/// Fraction of selections that contain each unit.
pub fn relevance(selections: &[&[usize]], units: usize) -> Vec<f64> {
    let m = selections.len() as f64;
    membership_counts(selections, units).into_iter().map(|c| c as f64 / m).collect()
}

/// Mean relevance over units with non-zero relevance; `None` when every
/// selection is empty.
pub fn agreement_at_k(selections: &[&[usize]], units: usize) -> Option<f64> {
    let counts = membership_counts(selections, units);
    let touched = counts.iter().filter(|&&c| c > 0).count();
    if touched == 0 {
        return None;
    }
    // Σ r(u) = Σ count(u) / m, kept in integers until the final division.
    let memberships: usize = counts.iter().sum();
    Some(memberships as f64 / (selections.len() * touched) as f64)
}

/// The units selected for `name` on one instance at `level`, together with
/// the size of that unit universe.
pub fn unit_selection(
    instance: &Instance,
    name: &str,
    policy: KPolicy,
    level: Level,
) -> Result<(Vec<usize>, usize), UnknownMethod> {
    let sel = select(instance, name, policy)?;
    Ok(match level {
        Level::Token => (sel.indices().to_vec(), instance.len()),
        Level::Span => (targeted_spans(instance, &sel).span_indices().to_vec(), instance.spans().len()),
    })
}

/// Why a dataset mean could not be formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Undefined {
    EmptyCorpus,
    AllSelectionsEmpty,
}

/// Mean agreement over instances where it is defined. Instances whose
/// selections are all empty are skipped and tallied, never imputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanAgreement {
    pub value: Option<f64>,
    pub defined: usize,
    pub skipped: usize,
    pub undefined: Option<Undefined>,
}

impl MeanAgreement {
    /// Sums left to right in the given (instance) order.
    pub fn from_per_instance(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let mut sum = 0.0;
        let mut defined = 0;
        let mut skipped = 0;
        for v in values {
            match v {
                Some(v) => {
                    sum += v;
                    defined += 1;
                }
                None => skipped += 1,
            }
        }
        let (value, undefined) = match (defined, skipped) {
            (0, 0) => (None, Some(Undefined::EmptyCorpus)),
            (0, _) => (None, Some(Undefined::AllSelectionsEmpty)),
            _ => (Some(sum / defined as f64), None),
        };
        MeanAgreement { value, defined, skipped, undefined }
    }
}

pub fn instance_agreement(
    instance: &Instance,
    pair: (&str, &str),
    level: Level,
    policy: KPolicy,
) -> Result<Option<f64>, UnknownMethod> {
    let (a, units) = unit_selection(instance, pair.0, policy, level)?;
    let (b, _) = unit_selection(instance, pair.1, policy, level)?;
    Ok(agreement_at_k(&[&a, &b], units))
}

pub fn mean_agreement(
    corpus: &Corpus,
    pair: (&str, &str),
    level: Level,
    policy: KPolicy,
) -> Result<MeanAgreement, UnknownMethod> {
    let per_instance: Vec<Option<f64>> = corpus
        .instances()
        .par_iter()
        .map(|inst| instance_agreement(inst, pair, level, policy))
        .collect::<Result<_, _>>()?;
    Ok(MeanAgreement::from_per_instance(per_instance))
}

#[derive(Debug, Error)]
pub enum AgreementError {
    #[error("need at least two names for a pairwise matrix, got {0}")]
    TooFewNames(usize),
    #[error(transparent)]
    UnknownMethod(#[from] UnknownMethod),
}

/// Symmetric matrix of mean pairwise agreement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementMatrix {
    pub labels: Vec<String>,
    pub level: Level,
    pub policy: KPolicy,
    pub cells: Vec<Vec<MeanAgreement>>,
}

impl AgreementMatrix {
    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i][j].value
    }

    /// Off-diagonal values in row `i`.
    pub fn row_others(&self, i: usize) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.labels.len()).filter(move |&j| j != i).map(move |j| self.value(i, j))
    }

    /// Mean over all unordered off-diagonal pairs with a defined value.
    pub fn mean_off_diagonal(&self) -> Option<f64> {
        let n = self.labels.len();
        let values: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).filter_map(move |j| self.value(i, j))).collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Mean agreement for every pair of `names` (diagonal included).
pub fn pairwise_matrix(
    corpus: &Corpus,
    names: &[String],
    level: Level,
    policy: KPolicy,
) -> Result<AgreementMatrix, AgreementError> {
    let n = names.len();
    if n < 2 {
        return Err(AgreementError::TooFewNames(n));
    }
    // Selections are computed once per (instance, name); each cell is then a
    // two-way agreement.
    let per_instance: Vec<Vec<Option<f64>>> = corpus
        .instances()
        .par_iter()
        .map(|inst| {
            let units: Vec<(Vec<usize>, usize)> =
                names.iter().map(|name| unit_selection(inst, name, policy, level)).collect::<Result<_, _>>()?;
            let mut cells = Vec::with_capacity(n * (n + 1) / 2);
            for i in 0..n {
                for j in i..n {
                    cells.push(agreement_at_k(&[&units[i].0, &units[j].0], units[i].1));
                }
            }
            Ok(cells)
        })
        .collect::<Result<_, UnknownMethod>>()?;

    let mut cells = vec![vec![MeanAgreement::from_per_instance([]); n]; n];
    let mut slot = 0;
    for i in 0..n {
        for j in i..n {
            let mean = MeanAgreement::from_per_instance(per_instance.iter().map(|row| row[slot]));
            cells[i][j] = mean;
            cells[j][i] = mean;
            slot += 1;
        }
    }
    Ok(AgreementMatrix { labels: names.to_vec(), level, policy, cells })
}
