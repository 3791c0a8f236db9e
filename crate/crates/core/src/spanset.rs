//! Span-level view of token selections.
//!
//! A span is *targeted* when at least one of its tokens is selected.
//! Spans are atomic binary units; scores are never aggregated into them.

use serde::Serialize;

use crate::model::{Corpus, Instance};
use crate::selection::{select, KPolicy, TopKSelection, UnknownMethod};

/// Ascending indices into an instance's span list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanSelection {
    pub method: String,
    span_indices: Vec<usize>,
}

impl SpanSelection {
    pub fn span_indices(&self) -> &[usize] {
        &self.span_indices
    }

    pub fn len(&self) -> usize {
        self.span_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.span_indices.is_empty()
    }
}

pub fn targeted_spans(instance: &Instance, sel: &TopKSelection) -> SpanSelection {
    let mut span_indices: Vec<usize> = sel.indices().iter().filter_map(|&i| instance.span_of(i)).collect();
    // Token indices are ascending, so span indices are too; only dedup.
    span_indices.dedup();
    SpanSelection { method: sel.method.clone(), span_indices }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    fn of(values: impl IntoIterator<Item = f64>) -> Option<Summary> {
        let mut count = 0usize;
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            count += 1;
            sum += v;
            min = min.min(v);
            max = max.max(v);
        }
        (count > 0).then(|| Summary { mean: sum / count as f64, min, max })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetedSpans {
    pub name: String,
    pub mean_targeted_spans: f64,
    pub mean_selected_tokens: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanStats {
    pub instances: usize,
    pub tokens: Option<Summary>,
    pub spans: Option<Summary>,
    pub span_token_ratio: Option<Summary>,
    pub policy: KPolicy,
    pub targeted: Vec<TargetedSpans>,
    /// Mean of `mean_targeted_spans` over the named methods, excluding human.
    pub method_average_targeted: Option<f64>,
}

/// Corpus-level token/span counts plus, for each name, the mean number of
/// spans its selections target under `policy`.
pub fn span_stats(corpus: &Corpus, names: &[String], policy: KPolicy) -> Result<SpanStats, UnknownMethod> {
    let instances = corpus.instances();
    let tokens = Summary::of(instances.iter().map(|i| i.len() as f64));
    let spans = Summary::of(instances.iter().map(|i| i.spans().len() as f64));
    let span_token_ratio = Summary::of(instances.iter().map(|i| i.spans().len() as f64 / i.len() as f64));

    let mut targeted = Vec::with_capacity(names.len());
    for name in names {
        let mut span_total = 0.0;
        let mut token_total = 0.0;
        for instance in instances {
            let sel = select(instance, name, policy)?;
            span_total += targeted_spans(instance, &sel).len() as f64;
            token_total += sel.k() as f64;
        }
        let d = instances.len() as f64;
        targeted.push(TargetedSpans {
            name: name.clone(),
            mean_targeted_spans: span_total / d,
            mean_selected_tokens: token_total / d,
        });
    }
    let method_means: Vec<f64> =
        targeted.iter().filter(|t| t.name != crate::HUMAN).map(|t| t.mean_targeted_spans).collect();
    let method_average_targeted =
        (!method_means.is_empty()).then(|| method_means.iter().sum::<f64>() / method_means.len() as f64);

    Ok(SpanStats {
        instances: instances.len(),
        tokens,
        spans,
        span_token_ratio,
        policy,
        targeted,
        method_average_targeted,
    })
}
