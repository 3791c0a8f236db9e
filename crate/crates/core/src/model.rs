//! Corpus data model: tokens, syntactic spans, attribution profiles and
//! the JSONL loader that validates them.
//!
//! One instance is stored per line:
//!
//! ```text
//! {"id": "...", "label": "...",
//!  "tokens": [{"text": "...", "pos": "NOUN", "is_stop": false, "is_punct": false}, ...],
//!  "spans": [{"start": 0, "end": 2, "label": "NP"}, ...],
//!  "profiles": {"LIME": [0.1, ...], ...},
//!  "human": [0.0, 0.66, ...]}
//! ```
//!
//! Tokens are at the model's subword granularity. Human rationale scores
//! are word-level annotator ratios replicated onto every subword of the
//! word, and model special tokens are never part of an instance.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved profile name for the aggregated human rationale.
pub const HUMAN: &str = "human";

/// POS tag carried by every punctuation token.
pub const PUNCT_TAG: &str = "PUNCT";

/// Chunk label given to singleton punctuation spans.
pub const PUNCT_SPAN_LABEL: &str = "PUNCT";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub pos: String,
    pub is_stop: bool,
    pub is_punct: bool,
}

/// Half-open token range `[start, end)` labelled with its chunk type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl Span {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        Span { start, end, label: label.into() }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, token: usize) -> bool {
        self.start <= token && token < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionProfile {
    pub method: String,
    pub scores: Vec<f64>,
}

impl AttributionProfile {
    pub fn new(method: impl Into<String>, scores: Vec<f64>) -> Self {
        AttributionProfile { method: method.into(), scores }
    }
}

/// One validated premise/hypothesis instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    id: String,
    label: String,
    tokens: Vec<Token>,
    spans: Vec<Span>,
    profiles: IndexMap<String, AttributionProfile>,
    human: AttributionProfile,
}

impl Instance {
    /// Builds an instance and checks every invariant, including the
    /// singleton-punctuation-span rule.
    pub fn new(
        id: impl Into<String>,
        label: impl Into<String>,
        tokens: Vec<Token>,
        spans: Vec<Span>,
        profiles: Vec<AttributionProfile>,
        human: Vec<f64>,
    ) -> Result<Self, InvariantViolation> {
        let instance = Self::unchecked(id.into(), label.into(), tokens, spans, profiles, human)?;
        instance.validate()?;
        Ok(instance)
    }

    /// Like [`Instance::new`], but first splits punctuation out of chunks
    /// so that a chunker output which ignores punctuation is accepted.
    pub fn with_normalized_spans(
        id: impl Into<String>,
        label: impl Into<String>,
        tokens: Vec<Token>,
        spans: Vec<Span>,
        profiles: Vec<AttributionProfile>,
        human: Vec<f64>,
    ) -> Result<Self, InvariantViolation> {
        let instance = Self::unchecked(id.into(), label.into(), tokens, spans, profiles, human)?;
        instance.check_tokens_and_partition()?;
        let instance = normalize_punct_spans(instance);
        instance.validate()?;
        Ok(instance)
    }

    fn unchecked(
        id: String,
        label: String,
        tokens: Vec<Token>,
        spans: Vec<Span>,
        profiles: Vec<AttributionProfile>,
        human: Vec<f64>,
    ) -> Result<Self, InvariantViolation> {
        let mut map = IndexMap::with_capacity(profiles.len());
        for profile in profiles {
            if profile.method == HUMAN {
                return Err(InvariantViolation::new(
                    &id,
                    format!("profiles.{HUMAN}"),
                    "profile name is reserved for the human rationale",
                ));
            }
            if map.contains_key(&profile.method) {
                return Err(InvariantViolation::new(
                    &id,
                    format!("profiles.{}", profile.method),
                    "duplicate profile name",
                ));
            }
            map.insert(profile.method.clone(), profile);
        }
        Ok(Instance { id, label, tokens, spans, profiles: map, human: AttributionProfile::new(HUMAN, human) })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn profiles(&self) -> impl Iterator<Item = &AttributionProfile> {
        self.profiles.values()
    }

    pub fn method_names(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }

    pub fn human(&self) -> &AttributionProfile {
        &self.human
    }

    /// Resolves a method name, or [`HUMAN`], to its score profile.
    pub fn profile(&self, name: &str) -> Option<&AttributionProfile> {
        if name == HUMAN {
            Some(&self.human)
        } else {
            self.profiles.get(name)
        }
    }

    /// Index of the span containing `token`.
    pub fn span_of(&self, token: usize) -> Option<usize> {
        let j = self.spans.partition_point(|s| s.end <= token);
        (j < self.spans.len() && self.spans[j].contains(token)).then_some(j)
    }

    fn violation(&self, field: impl Into<String>, message: impl Into<String>) -> InvariantViolation {
        InvariantViolation::new(&self.id, field, message)
    }

    fn check_tokens_and_partition(&self) -> Result<(), InvariantViolation> {
        if self.tokens.is_empty() {
            return Err(self.violation("tokens", "instance has no tokens"));
        }
        for (i, token) in self.tokens.iter().enumerate() {
            if token.text.is_empty() {
                return Err(self.violation(format!("tokens[{i}].text"), "token text is empty"));
            }
            if token.is_punct && token.pos != PUNCT_TAG {
                return Err(self.violation(
                    format!("tokens[{i}].pos"),
                    format!("punctuation token tagged {:?}, expected {PUNCT_TAG}", token.pos),
                ));
            }
        }
        let n = self.tokens.len();
        let mut cursor = 0;
        for (j, span) in self.spans.iter().enumerate() {
            if span.start >= span.end || span.end > n {
                return Err(self.violation(
                    format!("spans[{j}]"),
                    format!("span [{}, {}) is empty or exceeds {n} tokens", span.start, span.end),
                ));
            }
            if span.start != cursor {
                return Err(self.violation(
                    format!("spans[{j}]"),
                    format!("spans must partition the tokens: expected start {cursor}, got {}", span.start),
                ));
            }
            cursor = span.end;
        }
        if cursor != n {
            return Err(
                self.violation("spans", format!("spans cover tokens [0, {cursor}) but the instance has {n} tokens"))
            );
        }
        Ok(())
    }

    fn check_scores(&self, field: &str, scores: &[f64]) -> Result<(), InvariantViolation> {
        if scores.len() != self.tokens.len() {
            return Err(self.violation(
                field,
                format!("length mismatch: {} scores for {} tokens", scores.len(), self.tokens.len()),
            ));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(self.violation(format!("{field}[{i}]"), "score is not finite"));
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), InvariantViolation> {
        self.check_tokens_and_partition()?;
        for (j, span) in self.spans.iter().enumerate() {
            let has_punct = self.tokens[span.start..span.end].iter().any(|t| t.is_punct);
            if has_punct && span.len() > 1 {
                return Err(self.violation(
                    format!("spans[{j}]"),
                    format!("punctuation inside multi-token {} span; punctuation must be its own span", span.label),
                ));
            }
            if has_punct && span.label != PUNCT_SPAN_LABEL {
                return Err(self.violation(
                    format!("spans[{j}].label"),
                    format!("punctuation span labelled {:?}, expected {PUNCT_SPAN_LABEL}", span.label),
                ));
            }
        }
        for (name, profile) in &self.profiles {
            self.check_scores(&format!("profiles.{name}"), &profile.scores)?;
        }
        self.check_scores("human", &self.human.scores)?;
        if let Some(i) = self.human.scores.iter().position(|h| !(0.0..=1.0).contains(h)) {
            return Err(self.violation(format!("human[{i}]"), "human score outside [0, 1]"));
        }
        Ok(())
    }
}

/// Splits every punctuation token into its own `PUNCT` span, leaving all
/// other chunk boundaries in place. The input spans must already
/// partition the tokens.
pub fn normalize_punct_spans(mut instance: Instance) -> Instance {
    let mut spans = Vec::with_capacity(instance.spans.len());
    for span in &instance.spans {
        let mut run_start = span.start;
        for i in span.start..span.end {
            if instance.tokens[i].is_punct {
                if run_start < i {
                    spans.push(Span::new(run_start, i, span.label.clone()));
                }
                spans.push(Span::new(i, i + 1, PUNCT_SPAN_LABEL));
                run_start = i + 1;
            }
        }
        if run_start < span.end {
            spans.push(Span::new(run_start, span.end, span.label.clone()));
        }
    }
    instance.spans = spans;
    instance
}

/// An ordered collection of instances sharing one set of methods.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    instances: Vec<Instance>,
    methods: Vec<String>,
}

impl Corpus {
    /// Methods are taken from the first instance; every other instance
    /// must carry exactly the same set.
    pub fn new(instances: Vec<Instance>) -> Result<Self, CorpusError> {
        let methods: Vec<String> =
            instances.first().map(|i| i.method_names().map(str::to_owned).collect()).unwrap_or_default();
        let mut seen = HashSet::new();
        for instance in &instances {
            if !seen.insert(instance.id.as_str()) {
                return Err(CorpusError::Invariant {
                    line: None,
                    violation: instance.violation("id", "duplicate instance id"),
                });
            }
            if let Some(missing) = methods.iter().find(|m| !instance.profiles.contains_key(*m)) {
                return Err(CorpusError::MissingMethod { id: instance.id.clone(), method: missing.clone() });
            }
            if let Some(extra) = instance.method_names().find(|m| !methods.iter().any(|x| x == m)) {
                return Err(CorpusError::UnexpectedMethod { id: instance.id.clone(), method: extra.to_owned() });
            }
        }
        Ok(Corpus { instances, methods })
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// True when `name` is a corpus method or the human identifier.
    pub fn resolves(&self, name: &str) -> bool {
        name == HUMAN || self.methods.iter().any(|m| m == name)
    }

    /// Writes the corpus as JSONL, one instance per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for instance in &self.instances {
            serde_json::to_writer(&mut out, &RawInstance::from(instance))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// An instance that breaks one of the model invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("instance {id:?}: {field}: {message}")]
pub struct InvariantViolation {
    pub id: String,
    pub field: String,
    pub message: String,
}

impl InvariantViolation {
    fn new(id: &str, field: impl Into<String>, message: impl Into<String>) -> Self {
        InvariantViolation { id: id.to_owned(), field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed instance: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}{violation}", LinePrefix(*line))]
    Invariant { line: Option<usize>, violation: InvariantViolation },
    #[error("instance {id:?}: missing profile for method {method:?}")]
    MissingMethod { id: String, method: String },
    #[error("instance {id:?}: profile {method:?} is not present in the first instance")]
    UnexpectedMethod { id: String, method: String },
}

struct LinePrefix(Option<usize>);

impl fmt::Display for LinePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(line) => write!(f, "line {line}: "),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    id: String,
    label: String,
    tokens: Vec<Token>,
    spans: Vec<Span>,
    profiles: IndexMap<String, Vec<f64>>,
    human: Vec<f64>,
}

impl From<&Instance> for RawInstance {
    fn from(instance: &Instance) -> Self {
        RawInstance {
            id: instance.id.clone(),
            label: instance.label.clone(),
            tokens: instance.tokens.clone(),
            spans: instance.spans.clone(),
            profiles: instance.profiles.iter().map(|(k, p)| (k.clone(), p.scores.clone())).collect(),
            human: instance.human.scores.clone(),
        }
    }
}

impl RawInstance {
    fn into_instance(self) -> Result<Instance, InvariantViolation> {
        let profiles = self.profiles.into_iter().map(|(k, v)| AttributionProfile::new(k, v)).collect();
        Instance::new(self.id, self.label, self.tokens, self.spans, profiles, self.human)
    }
}

/// Parses one JSONL line into a validated instance.
pub fn parse_instance(line: &str) -> Result<Instance, CorpusError> {
    let raw: RawInstance = serde_json::from_str(line).map_err(|source| CorpusError::Parse { line: 1, source })?;
    raw.into_instance().map_err(|violation| CorpusError::Invariant { line: Some(1), violation })
}

/// Reads a corpus from any buffered reader. Blank lines are skipped;
/// line numbers in errors are 1-based.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    let mut instances = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let number = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawInstance =
            serde_json::from_str(&line).map_err(|source| CorpusError::Parse { line: number, source })?;
        let instance =
            raw.into_instance().map_err(|violation| CorpusError::Invariant { line: Some(number), violation })?;
        instances.push(instance);
    }
    Corpus::new(instances)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let file = File::open(path)?;
    read_corpus(BufReader::new(file))
}
