//! Agreement analysis for feature-attribution methods at the token and
//! syntactic-span level.
//!
//! The crate reads a JSONL corpus of tokenised instances (with POS tags,
//! chunk spans, one score profile per attribution method and a human
//! rationale profile) and provides:
//!
//! - top-k selection with fixed k or dynamic k (strict local peaks above a
//!   global threshold), in [`selection`];
//! - targeted spans and span statistics, in [`spanset`];
//! - relevance, agreement@k and pairwise agreement matrices, in
//!   [`agreement`];
//! - random-vector and per-method shuffle baselines plus the threshold
//!   benchmark, in [`baselines`];
//! - word-class preferences, chi-square tests and head/modifier
//!   alternation, in [`lingstats`];
//! - the `spanagree` command line, in [`cli`].
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod agreement;
pub mod baselines;
pub mod cli;
pub mod lingstats;
pub mod model;
pub mod report;
pub mod selection;
pub mod spanset;

pub use agreement::{
    agreement_at_k, mean_agreement, pairwise_matrix, relevance, AgreementMatrix, Level, MeanAgreement,
};
pub use baselines::{
    beats_baseline_report, random_vector_baseline, shuffle_baseline, threshold_benchmark, KTarget, RandomVectorSpec,
    ThresholdBenchmark,
};
pub use lingstats::{
    chi2_all_pairs, chi2_pair, np_alternation, preference_profile, Chi2Result, PreferenceProfile, WordClass,
};
pub use model::{
    load_corpus, normalize_punct_spans, read_corpus, AttributionProfile, Corpus, CorpusError, Instance, Span, Token,
    HUMAN,
};
pub use selection::{
    compute_threshold, local_peaks, select, select_dynamic, select_fixed, KPolicy, ThresholdKind, ThresholdValue,
    TopKSelection,
};
pub use spanset::{span_stats, targeted_spans, SpanSelection, SpanStats};
