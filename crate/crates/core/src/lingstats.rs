//! Word-class preferences of top-k selections and the statistics built on
//! them: Pearson chi-square tests between two names' preference counts,
//! and head/modifier alternation inside fixed-pattern chunks.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use statrs::function::gamma::gamma_ur;
use thiserror::Error;

use crate::model::Corpus;
use crate::selection::{select, KPolicy, UnknownMethod};
use crate::spanset::targeted_spans;

/// Significance level used for the `significant` flag.
pub const ALPHA: f64 = 0.05;

/// Number of POS tags in the default comparison set.
pub const DEFAULT_TAG_COUNT: usize = 5;

/// Counts of word classes among one name's selected tokens, summed over
/// the corpus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferenceProfile {
    pub name: String,
    pub total_selected: u64,
    pub stop_count: u64,
    pub punct_count: u64,
    /// Every POS tag seen among the selections; sums to `total_selected`.
    pub pos_counts: BTreeMap<String, u64>,
    /// Tags compared in the POS table, in column order.
    pub tag_set: Vec<String>,
}

impl PreferenceProfile {
    fn ratio(&self, count: u64) -> f64 {
        if self.total_selected == 0 {
            0.0
        } else {
            count as f64 / self.total_selected as f64
        }
    }

    pub fn stop_ratio(&self) -> f64 {
        self.ratio(self.stop_count)
    }

    pub fn punct_ratio(&self) -> f64 {
        self.ratio(self.punct_count)
    }

    /// Share of each tag in `tag_set` among all selected tokens.
    pub fn pos_ratios(&self) -> Vec<(String, f64)> {
        self.tag_set.iter().map(|t| (t.clone(), self.ratio(self.pos_count(t)))).collect()
    }

    pub fn pos_count(&self, tag: &str) -> u64 {
        self.pos_counts.get(tag).copied().unwrap_or(0)
    }

    /// The row this profile contributes to a 2×C contingency table.
    pub fn counts(&self, class: WordClass) -> Vec<u64> {
        match class {
            WordClass::Stop => vec![self.stop_count, self.total_selected - self.stop_count],
            WordClass::Punct => vec![self.punct_count, self.total_selected - self.punct_count],
            WordClass::Pos => self.tag_set.iter().map(|t| self.pos_count(t)).collect(),
        }
    }
}

pub fn preference_profile(
    corpus: &Corpus,
    name: &str,
    policy: KPolicy,
    tag_set: &[String],
) -> Result<PreferenceProfile, UnknownMethod> {
    let mut profile = PreferenceProfile {
        name: name.to_owned(),
        total_selected: 0,
        stop_count: 0,
        punct_count: 0,
        pos_counts: BTreeMap::new(),
        tag_set: tag_set.to_vec(),
    };
    for inst in corpus.instances() {
        let sel = select(inst, name, policy)?;
        for &i in sel.indices() {
            let token = &inst.tokens()[i];
            profile.total_selected += 1;
            profile.stop_count += u64::from(token.is_stop);
            profile.punct_count += u64::from(token.is_punct);
            *profile.pos_counts.entry(token.pos.clone()).or_default() += 1;
        }
    }
    Ok(profile)
}

/// The `n` most frequent POS tags among the human rationale's selections,
/// ties broken alphabetically.
pub fn human_top_tags(corpus: &Corpus, policy: KPolicy, n: usize) -> Vec<String> {
    let human = preference_profile(corpus, crate::HUMAN, policy, &[]).expect("human always resolves");
    let mut tags: Vec<(String, u64)> = human.pos_counts.into_iter().collect();
    tags.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    tags.into_iter().take(n).map(|(t, _)| t).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WordClass {
    Stop,
    Punct,
    Pos,
}

impl WordClass {
    pub const ALL: [WordClass; 3] = [WordClass::Stop, WordClass::Punct, WordClass::Pos];
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WordClass::Stop => "stop",
            WordClass::Punct => "punct",
            WordClass::Pos => "pos",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
pub enum Chi2Error {
    #[error("degenerate table: expected count is zero at row {row}, column {column} ({label})")]
    Degenerate { row: usize, column: usize, label: String },
    #[error("rows have different lengths ({0} vs {1})")]
    Shape(usize, usize),
    #[error("table needs at least two columns, got {0}")]
    TooFewColumns(usize),
}

/// Pearson chi-square statistic and degrees of freedom for a 2×C table.
/// With `continuity`, a 2×2 table uses Yates' correction; wider tables are
/// never corrected.
pub fn pearson_chi2(rows: [&[u64]; 2], continuity: bool, labels: &[String]) -> Result<(f64, usize), Chi2Error> {
    let [a, b] = rows;
    if a.len() != b.len() {
        return Err(Chi2Error::Shape(a.len(), b.len()));
    }
    let cols = a.len();
    if cols < 2 {
        return Err(Chi2Error::TooFewColumns(cols));
    }
    let row_totals = [a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64];
    let grand = row_totals[0] + row_totals[1];
    let yates = continuity && cols == 2;
    let mut stat = 0.0;
    for (r, row) in rows.iter().enumerate() {
        for c in 0..cols {
            let col_total = (a[c] + b[c]) as f64;
            let expected = row_totals[r] * col_total / grand;
            if expected.is_nan() || expected <= 0.0 {
                let label = labels.get(c).cloned().unwrap_or_else(|| format!("column {c}"));
                return Err(Chi2Error::Degenerate { row: r, column: c, label });
            }
            let mut diff = (row[c] as f64 - expected).abs();
            if yates {
                diff = (diff - 0.5).max(0.0);
            }
            stat += diff * diff / expected;
        }
    }
    Ok((stat, cols - 1))
}

/// Upper tail probability of the chi-square distribution.
pub fn chi2_sf(stat: f64, df: usize) -> f64 {
    if stat <= 0.0 {
        1.0
    } else if stat.is_infinite() {
        0.0
    } else {
        gamma_ur(df as f64 / 2.0, stat / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chi2Result {
    pub pair: (String, String),
    pub word_class: WordClass,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub significant: bool,
}

fn class_labels(p: &PreferenceProfile, class: WordClass) -> Vec<String> {
    match class {
        WordClass::Stop => vec!["stop".into(), "non-stop".into()],
        WordClass::Punct => vec!["punct".into(), "non-punct".into()],
        WordClass::Pos => p.tag_set.clone(),
    }
}

pub fn chi2_pair(
    p1: &PreferenceProfile,
    p2: &PreferenceProfile,
    word_class: WordClass,
    continuity: bool,
) -> Result<Chi2Result, Chi2Error> {
    let (r1, r2) = (p1.counts(word_class), p2.counts(word_class));
    let (statistic, df) = pearson_chi2([&r1, &r2], continuity, &class_labels(p1, word_class))?;
    let p_value = chi2_sf(statistic, df);
    Ok(Chi2Result {
        pair: (p1.name.clone(), p2.name.clone()),
        word_class,
        statistic,
        df,
        p_value,
        significant: p_value < ALPHA,
    })
}

/// One cell of the all-pairs battery; a degenerate table does not abort
/// the others.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chi2Outcome {
    pub pair: (String, String),
    pub word_class: WordClass,
    pub result: Result<Chi2Result, Chi2Error>,
}

/// Profiles for every name plus the chi-square test of every unordered
/// pair on all three word classes.
pub fn chi2_all_pairs(
    corpus: &Corpus,
    names: &[String],
    policy: KPolicy,
    tag_set: &[String],
    continuity: bool,
) -> Result<(Vec<PreferenceProfile>, Vec<Chi2Outcome>), UnknownMethod> {
    let profiles: Vec<PreferenceProfile> =
        names.iter().map(|n| preference_profile(corpus, n, policy, tag_set)).collect::<Result<_, _>>()?;
    let mut outcomes = Vec::new();
    for i in 0..profiles.len() {
        for j in i + 1..profiles.len() {
            for class in WordClass::ALL {
                outcomes.push(Chi2Outcome {
                    pair: (names[i].clone(), names[j].clone()),
                    word_class: class,
                    result: chi2_pair(&profiles[i], &profiles[j], class, continuity),
                });
            }
        }
    }
    Ok((profiles, outcomes))
}

/// Chunks whose POS sequence equals `pattern`, restricted to those every
/// consensus name targets, and how two probe names target positions
/// inside them.
#[derive(Debug, Clone)]
pub struct AlternationQuery<'a> {
    pub probes: (&'a str, &'a str),
    pub consensus: &'a [String],
    pub pattern: &'a [String],
    pub span_label: &'a str,
    pub policy: KPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlternationReport {
    pub pattern: Vec<String>,
    pub probes: (String, String),
    /// Consensus-targeted chunks with the label and pattern length.
    pub same_length_spans: u64,
    /// Of those, chunks whose tags equal the pattern.
    pub matched_spans: u64,
    /// `probe1_targets[p]`: matched chunks where probe 1 selects position p.
    pub probe1_targets: Vec<u64>,
    pub probe2_targets: Vec<u64>,
    /// `joint[p][q]`: chunks where probe 1 selects p and probe 2 selects q.
    pub joint: Vec<Vec<u64>>,
    /// Probe 1 on the final (head) position, probe 2 on the first.
    pub alternation: u64,
    pub probe1_token_ratio: f64,
    pub probe2_token_ratio: f64,
}

impl AlternationReport {
    pub fn pattern_share(&self) -> Option<f64> {
        (self.same_length_spans > 0).then(|| self.matched_spans as f64 / self.same_length_spans as f64)
    }
}

#[derive(Debug, Error)]
pub enum AlternationError {
    #[error("pattern must have at least two tags, got {0}")]
    PatternTooShort(usize),
    #[error(transparent)]
    UnknownMethod(#[from] UnknownMethod),
}

pub fn np_alternation(corpus: &Corpus, query: &AlternationQuery<'_>) -> Result<AlternationReport, AlternationError> {
    let len = query.pattern.len();
    if len < 2 {
        return Err(AlternationError::PatternTooShort(len));
    }
    let mut report = AlternationReport {
        pattern: query.pattern.to_vec(),
        probes: (query.probes.0.to_owned(), query.probes.1.to_owned()),
        same_length_spans: 0,
        matched_spans: 0,
        probe1_targets: vec![0; len],
        probe2_targets: vec![0; len],
        joint: vec![vec![0; len]; len],
        alternation: 0,
        probe1_token_ratio: 0.0,
        probe2_token_ratio: 0.0,
    };
    let (mut hits1, mut hits2) = (0u64, 0u64);
    for inst in corpus.instances() {
        let consensus: Vec<_> = query
            .consensus
            .iter()
            .map(|n| select(inst, n, query.policy).map(|s| targeted_spans(inst, &s)))
            .collect::<Result<_, _>>()?;
        let p1 = select(inst, query.probes.0, query.policy)?;
        let p2 = select(inst, query.probes.1, query.policy)?;
        for (j, span) in inst.spans().iter().enumerate() {
            if span.label != query.span_label || span.len() != len {
                continue;
            }
            if !consensus.iter().all(|c| c.span_indices().binary_search(&j).is_ok()) {
                continue;
            }
            report.same_length_spans += 1;
            let tokens = &inst.tokens()[span.start..span.end];
            if !tokens.iter().zip(query.pattern).all(|(t, tag)| &t.pos == tag) {
                continue;
            }
            report.matched_spans += 1;
            let at1: Vec<bool> = (span.start..span.end).map(|i| p1.contains(i)).collect();
            let at2: Vec<bool> = (span.start..span.end).map(|i| p2.contains(i)).collect();
            for p in 0..len {
                report.probe1_targets[p] += u64::from(at1[p]);
                report.probe2_targets[p] += u64::from(at2[p]);
                for q in 0..len {
                    report.joint[p][q] += u64::from(at1[p] && at2[q]);
                }
            }
            hits1 += at1.iter().filter(|&&x| x).count() as u64;
            hits2 += at2.iter().filter(|&&x| x).count() as u64;
        }
    }
    report.alternation = report.joint[len - 1][0];
    if report.matched_spans > 0 {
        let slots = (report.matched_spans * len as u64) as f64;
        report.probe1_token_ratio = hits1 as f64 / slots;
        report.probe2_token_ratio = hits2 as f64 / slots;
    }
    Ok(report)
}
