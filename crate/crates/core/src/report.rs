//! Plot-ready tables (CSV, Markdown, JSON) and the full report pipeline.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::agreement::{pairwise_matrix, AgreementError, AgreementMatrix, Level};
use crate::baselines::{
    beats_baseline_report, highlight_fractions, random_vector_baseline, BaselineRow, KTarget, RandomVectorSpec,
    ThresholdBenchmark,
};
use crate::lingstats::{
    chi2_all_pairs, human_top_tags, np_alternation, AlternationError, AlternationQuery, AlternationReport, Chi2Outcome,
    PreferenceProfile, WordClass, DEFAULT_TAG_COUNT,
};
use crate::model::Corpus;
use crate::selection::{KPolicy, ThresholdKind, UnknownMethod};
use crate::spanset::{span_stats, SpanStats};

/// Rendering for undefined values.
pub const NA: &str = "NA";

pub fn fmt_fixed(value: Option<f64>, digits: usize) -> String {
    match value {
        Some(v) => format!("{v:.digits$}"),
        None => NA.to_owned(),
    }
}

/// p-values at three decimals, with `<0.001` below that.
pub fn fmt_p(p: f64) -> String {
    if p < 0.001 {
        "<0.001".to_owned()
    } else {
        format!("{p:.3}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Markdown => "md",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "md" => Ok(Format::Markdown),
            other => Err(format!("unknown format {other:?}, expected csv, json or md")),
        }
    }
}

/// A rectangular table of pre-formatted cells plus the structured value
/// it was rendered from.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub data: Value,
}

impl Table {
    pub fn new<S: Serialize>(header: Vec<String>, rows: Vec<Vec<String>>, data: &S) -> Self {
        let data = serde_json::to_value(data).expect("report values serialise");
        Table { header, rows, data }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
        out.push_str(&line(&self.header));
        out.push_str(&line(&vec!["---".to_owned(); self.header.len()]));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.data).expect("Value serialises");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Markdown => self.to_markdown(),
        }
    }
}

fn strings<I: IntoIterator<Item = S>, S: Into<String>>(items: I) -> Vec<String> {
    items.into_iter().map(Into::into).collect()
}

/// Names as header row and column, four decimals per cell.
pub fn matrix_table(m: &AgreementMatrix) -> Table {
    let mut header = vec!["name".to_owned()];
    header.extend(m.labels.iter().cloned());
    let rows = m
        .labels
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let mut row = vec![label.clone()];
            row.extend((0..m.labels.len()).map(|j| fmt_fixed(m.value(i, j), 4)));
            row
        })
        .collect();
    Table::new(header, rows, m)
}

pub fn topk_table(corpus: &Corpus, names: &[String], policy: KPolicy) -> Result<Table, UnknownMethod> {
    #[derive(Serialize)]
    struct Row<'a> {
        id: &'a str,
        name: &'a str,
        k: usize,
        indices: Vec<usize>,
        spans: Vec<usize>,
    }
    let mut data = Vec::new();
    for inst in corpus.instances() {
        for name in names {
            let sel = crate::selection::select(inst, name, policy)?;
            let spans = crate::spanset::targeted_spans(inst, &sel).span_indices().to_vec();
            data.push(Row { id: inst.id(), name, k: sel.k(), indices: sel.indices().to_vec(), spans });
        }
    }
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let rows = data
        .iter()
        .map(|r| vec![r.id.to_owned(), r.name.to_owned(), r.k.to_string(), join(&r.indices), join(&r.spans)])
        .collect();
    Ok(Table::new(strings(["id", "name", "k", "token_indices", "span_indices"]), rows, &data))
}

pub fn span_stats_table(stats: &SpanStats) -> Table {
    let mut rows = vec![vec!["instances".to_owned(), stats.instances.to_string(), String::new(), String::new()]];
    for (label, s) in [("tokens", stats.tokens), ("spans", stats.spans), ("span_token_ratio", stats.span_token_ratio)] {
        rows.push(vec![
            label.to_owned(),
            fmt_fixed(s.map(|s| s.mean), 4),
            fmt_fixed(s.map(|s| s.min), 4),
            fmt_fixed(s.map(|s| s.max), 4),
        ]);
    }
    for t in &stats.targeted {
        rows.push(vec![
            format!("targeted_spans:{}", t.name),
            format!("{:.4}", t.mean_targeted_spans),
            String::new(),
            String::new(),
        ]);
    }
    rows.push(vec![
        "targeted_spans:method_average".to_owned(),
        fmt_fixed(stats.method_average_targeted, 4),
        String::new(),
        String::new(),
    ]);
    Table::new(strings(["statistic", "mean", "min", "max"]), rows, stats)
}

#[derive(Debug, Clone, Serialize)]
pub struct RandomBaselineRow {
    pub level: Level,
    pub source: String,
    pub spec: RandomVectorSpec,
    pub value: f64,
}

pub fn random_baseline_table(rows: &[RandomBaselineRow]) -> Table {
    let body = rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                r.source.clone(),
                r.spec.length.to_string(),
                r.spec.ones.to_string(),
                r.spec.trials.to_string(),
                r.spec.seed.to_string(),
                format!("{:.4}", r.value),
            ]
        })
        .collect();
    Table::new(strings(["level", "source", "length", "ones", "trials", "seed", "baseline"]), body, &rows)
}

/// Baseline against min/max agreement with the other methods; `*` marks a
/// value below the method's own baseline.
pub fn baseline_table(level: Level, policy: KPolicy, rows: &[BaselineRow]) -> Table {
    let mark = |below: bool| if below { "*" } else { "" }.to_owned();
    let body = rows
        .iter()
        .map(|r| {
            vec![
                r.method.clone(),
                fmt_fixed(r.baseline, 4),
                fmt_fixed(r.min_agreement, 4),
                mark(r.min_below_baseline),
                fmt_fixed(r.max_agreement, 4),
                mark(r.max_below_baseline),
                r.beats_baseline().to_string(),
            ]
        })
        .collect();
    #[derive(Serialize)]
    struct Data<'a> {
        level: Level,
        policy: KPolicy,
        rows: &'a [BaselineRow],
    }
    Table::new(
        strings(["method", "baseline", "min_agreement", "min_below", "max_agreement", "max_below", "beats_baseline"]),
        body,
        &Data { level, policy, rows },
    )
}

fn scope(positive_only: bool) -> &'static str {
    if positive_only {
        ">0"
    } else {
        "all"
    }
}

/// Mean and sd of dynamic k per (scope, method) with thresholds as columns.
pub fn k_stats_table(bench: &ThresholdBenchmark) -> Table {
    let mut header = strings(["scope", "method"]);
    for t in ThresholdKind::ALL {
        header.push(format!("{t}_mean"));
        header.push(format!("{t}_sd"));
    }
    let mut methods: Vec<&str> = Vec::new();
    for s in &bench.stats {
        if !methods.contains(&s.method.as_str()) {
            methods.push(&s.method);
        }
    }
    let mut rows = Vec::new();
    for pos in [false, true] {
        for m in &methods {
            let mut row = vec![scope(pos).to_owned(), (*m).to_owned()];
            for t in ThresholdKind::ALL {
                let s = bench.stat(m, t, pos).expect("full grid");
                row.push(format!("{:.4}", s.mean_k));
                row.push(format!("{:.4}", s.sd_k));
            }
            rows.push(row);
        }
    }
    Table::new(header, rows, &bench.stats)
}

/// Averaged distance to the target, scopes as rows and thresholds as columns.
pub fn distance_table(bench: &ThresholdBenchmark) -> Table {
    let mut header = vec!["scope".to_owned()];
    header.extend(ThresholdKind::ALL.iter().map(|t| t.to_string()));
    let rows = [false, true]
        .into_iter()
        .map(|pos| {
            let mut row = vec![scope(pos).to_owned()];
            row.extend(ThresholdKind::ALL.iter().map(|&t| fmt_fixed(bench.distance(t, pos), 3)));
            row
        })
        .collect();
    #[derive(Serialize)]
    struct Data<'a> {
        target: KTarget,
        window: usize,
        ranking: &'a [crate::baselines::ThresholdDistance],
    }
    Table::new(header, rows, &Data { target: bench.target, window: bench.window, ranking: &bench.ranking })
}

pub fn ranking_table(bench: &ThresholdBenchmark) -> Table {
    let rows = bench
        .ranking
        .iter()
        .enumerate()
        .map(|(i, d)| {
            vec![
                (i + 1).to_string(),
                KPolicy::dynamic(d.threshold, d.positive_only).to_string(),
                format!("{:.3}", d.distance),
            ]
        })
        .collect();
    Table::new(strings(["rank", "policy", "distance"]), rows, &bench.ranking)
}

pub fn preference_table(profiles: &[PreferenceProfile]) -> Table {
    let tags: Vec<String> = profiles.first().map(|p| p.tag_set.clone()).unwrap_or_default();
    let mut header = strings(["name", "selected", "stop_count", "stop_ratio", "punct_count", "punct_ratio"]);
    header.extend(tags.iter().map(|t| format!("pos_{t}")));
    let rows = profiles
        .iter()
        .map(|p| {
            let mut row = vec![
                p.name.clone(),
                p.total_selected.to_string(),
                p.stop_count.to_string(),
                format!("{:.4}", p.stop_ratio()),
                p.punct_count.to_string(),
                format!("{:.4}", p.punct_ratio()),
            ];
            row.extend(p.pos_ratios().into_iter().map(|(_, r)| format!("{r:.4}")));
            row
        })
        .collect();
    Table::new(header, rows, &profiles)
}

/// One row per pair; statistic, p, df and significance per word class.
pub fn chi2_table(outcomes: &[Chi2Outcome]) -> Table {
    let mut header = vec!["comparison".to_owned()];
    for class in WordClass::ALL {
        for col in ["chi2", "p", "df", "sig"] {
            header.push(format!("{class}_{col}"));
        }
    }
    header.push("note".to_owned());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for chunk in outcomes.chunks(WordClass::ALL.len()) {
        let (a, b) = &chunk[0].pair;
        let mut row = vec![format!("{a} vs {b}")];
        let mut notes = Vec::new();
        for o in chunk {
            match &o.result {
                Ok(r) => row.extend([
                    format!("{:.3}", r.statistic),
                    fmt_p(r.p_value),
                    r.df.to_string(),
                    if r.significant { "*" } else { "" }.to_owned(),
                ]),
                Err(e) => {
                    row.extend([NA.to_owned(), NA.to_owned(), NA.to_owned(), String::new()]);
                    notes.push(format!("{}: {e}", o.word_class));
                }
            }
        }
        row.push(notes.join("; "));
        rows.push(row);
    }
    Table::new(header, rows, &outcomes)
}

pub fn alternation_table(r: &AlternationReport) -> Table {
    let mut rows = vec![
        vec!["pattern".to_owned(), r.pattern.join(" ")],
        vec!["probes".to_owned(), format!("{} / {}", r.probes.0, r.probes.1)],
        vec!["same_length_spans".to_owned(), r.same_length_spans.to_string()],
        vec!["matched_spans".to_owned(), r.matched_spans.to_string()],
        vec!["pattern_share".to_owned(), fmt_fixed(r.pattern_share(), 4)],
    ];
    for (p, tag) in r.pattern.iter().enumerate() {
        rows.push(vec![format!("probe1_targets:{p}:{tag}"), r.probe1_targets[p].to_string()]);
    }
    for (p, tag) in r.pattern.iter().enumerate() {
        rows.push(vec![format!("probe2_targets:{p}:{tag}"), r.probe2_targets[p].to_string()]);
    }
    rows.push(vec!["alternation".to_owned(), r.alternation.to_string()]);
    rows.push(vec!["probe1_token_ratio".to_owned(), format!("{:.4}", r.probe1_token_ratio)]);
    rows.push(vec!["probe2_token_ratio".to_owned(), format!("{:.4}", r.probe2_token_ratio)]);
    Table::new(strings(["statistic", "value"]), rows, r)
}

/// Settings for [`build_report`].
#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    pub seed: u64,
    pub window: usize,
    pub with_human: bool,
    pub target: KTarget,
    pub random_trials: usize,
    pub probes: Option<(String, String)>,
    pub consensus: Option<Vec<String>>,
    pub pattern: Vec<String>,
    pub continuity: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            seed: 0,
            window: 1,
            with_human: false,
            target: KTarget { mean: 4.0, sd: 3.0 },
            random_trials: 1000,
            probes: None,
            consensus: None,
            pattern: vec!["DET".into(), "NOUN".into()],
            continuity: false,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Agreement(#[from] AgreementError),
    #[error(transparent)]
    UnknownMethod(#[from] UnknownMethod),
    #[error(transparent)]
    Alternation(#[from] AlternationError),
    #[error("{0}")]
    Config(String),
}

/// A named output file and, when one exists, the `spanagree` arguments
/// (minus `--data`) that print the same bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
    pub command: Option<Vec<String>>,
}

fn csv_artifact(name: impl Into<String>, table: &Table, command: Option<Vec<String>>) -> Artifact {
    Artifact { name: format!("{}.csv", name.into()), contents: table.to_csv(), command }
}

fn args<I: IntoIterator<Item = S>, S: ToString>(items: I) -> Vec<String> {
    items.into_iter().map(|s| s.to_string()).collect()
}

fn policy_args(policy: KPolicy, window: usize) -> Vec<String> {
    args(["--policy".to_owned(), policy.to_string(), "--window".to_owned(), window.to_string()])
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Dynamic policies compared against fixed k = 4 throughout the report.
pub fn report_policies(window: usize) -> Vec<KPolicy> {
    vec![
        KPolicy::fixed(4),
        KPolicy::dynamic(ThresholdKind::Mean, false).with_window(window),
        KPolicy::dynamic(ThresholdKind::Mean, true).with_window(window),
        KPolicy::dynamic(ThresholdKind::Median, true).with_window(window),
    ]
}

/// Every analysis table for one corpus. The caller adds the manifest.
pub fn build_report(corpus: &Corpus, config: &ReportConfig) -> Result<Vec<Artifact>, ReportError> {
    let methods: Vec<String> = corpus.methods().to_vec();
    if methods.len() < 2 {
        return Err(ReportError::Config(format!("report needs at least two methods, corpus has {}", methods.len())));
    }
    let mut names = methods.clone();
    if config.with_human {
        names.push(crate::HUMAN.to_owned());
    }
    let mut with_human = methods.clone();
    with_human.push(crate::HUMAN.to_owned());
    let fixed4 = KPolicy::fixed(4);
    let policies = report_policies(config.window);
    let mut out = Vec::new();

    for policy in &policies {
        for level in [Level::Token, Level::Span] {
            let m = pairwise_matrix(corpus, &names, level, *policy)?;
            let mut cmd = args(["agreement", "--level", level.as_str()]);
            cmd.extend(policy_args(*policy, config.window));
            if config.with_human {
                cmd.push("--with-human".into());
            }
            out.push(csv_artifact(format!("agreement_{level}_{}", policy.slug()), &matrix_table(&m), Some(cmd)));
        }
    }

    for policy in [fixed4, policies[1]] {
        let stats = span_stats(corpus, &with_human, policy)?;
        let mut cmd = args(["spans", "--with-human"]);
        cmd.extend(policy_args(policy, config.window));
        out.push(csv_artifact(format!("span_stats_{}", policy.slug()), &span_stats_table(&stats), Some(cmd)));
    }

    let mut random_rows = Vec::new();
    for (level, ones) in [(Level::Token, 16), (Level::Span, 23)] {
        let spec = RandomVectorSpec::new(100, ones, config.random_trials, config.seed).expect("constant spec is valid");
        random_rows.push(RandomBaselineRow {
            level,
            source: "fixed".into(),
            value: random_vector_baseline(&spec),
            spec,
        });
    }
    if let Some(f) = highlight_fractions(corpus, &methods, fixed4)? {
        for (level, fraction) in [(Level::Token, f.token), (Level::Span, f.span)] {
            let spec = RandomVectorSpec::from_fraction(fraction, 100, config.random_trials, config.seed)
                .expect("clamped ones-count is valid");
            random_rows.push(RandomBaselineRow {
                level,
                source: format!("corpus:{}", fixed4.slug()),
                value: random_vector_baseline(&spec),
                spec,
            });
        }
    }
    out.push(csv_artifact("baseline_random_vectors", &random_baseline_table(&random_rows), None));

    for policy in &policies[1..] {
        for level in [Level::Token, Level::Span] {
            let rows = beats_baseline_report(corpus, &methods, *policy, level, config.seed)?;
            let mut cmd = args(["baseline", "shuffle", "--level", level.as_str()]);
            cmd.extend(policy_args(*policy, config.window));
            cmd.extend(args(["--seed".to_owned(), config.seed.to_string()]));
            out.push(csv_artifact(
                format!("baseline_shuffle_{level}_{}", policy.slug()),
                &baseline_table(level, *policy, &rows),
                Some(cmd),
            ));
        }
    }

    let bench = crate::baselines::threshold_benchmark(corpus, &methods, config.target, config.window)?;
    // `thresholds --out DIR` writes all three files at once.
    let cmd = args([
        "thresholds".to_owned(),
        "--target".to_owned(),
        format!("{}:{}", config.target.mean, config.target.sd),
        "--window".to_owned(),
        config.window.to_string(),
    ]);
    out.push(csv_artifact("thresholds_k", &k_stats_table(&bench), Some(cmd.clone())));
    out.push(csv_artifact("thresholds_distance", &distance_table(&bench), Some(cmd.clone())));
    out.push(csv_artifact("thresholds_ranking", &ranking_table(&bench), Some(cmd)));

    let tags = human_top_tags(corpus, fixed4, DEFAULT_TAG_COUNT);
    let (profiles, outcomes) = chi2_all_pairs(corpus, &with_human, fixed4, &tags, config.continuity)?;
    let mut cmd = args(["prefs", "--with-human"]);
    cmd.extend(policy_args(fixed4, config.window));
    out.push(csv_artifact("prefs_fixed4", &preference_table(&profiles), Some(cmd)));
    let mut cmd = args(["chi2", "--with-human"]);
    cmd.extend(policy_args(fixed4, config.window));
    if config.continuity {
        cmd.push("--yates".into());
    }
    out.push(csv_artifact("chi2_fixed4", &chi2_table(&outcomes), Some(cmd)));

    let probes = config.probes.clone().unwrap_or_else(|| (methods[0].clone(), methods[1].clone()));
    let consensus = config.consensus.clone().unwrap_or_else(|| methods.iter().skip(2).take(2).cloned().collect());
    let query = AlternationQuery {
        probes: (&probes.0, &probes.1),
        consensus: &consensus,
        pattern: &config.pattern,
        span_label: "NP",
        policy: fixed4,
    };
    let alternation = np_alternation(corpus, &query)?;
    let mut cmd = args(["np-analysis".to_owned(), "--probes".to_owned(), format!("{},{}", probes.0, probes.1)]);
    if !consensus.is_empty() {
        cmd.extend(args(["--consensus".to_owned(), consensus.join(",")]));
    }
    cmd.extend(args(["--pattern".to_owned(), config.pattern.join(","), "--label".to_owned(), "NP".to_owned()]));
    cmd.extend(policy_args(fixed4, config.window));
    out.push(csv_artifact("np_alternation_fixed4", &alternation_table(&alternation), Some(cmd)));

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_fixed(Some(2.0 / 3.0), 4), "0.6667");
        assert_eq!(fmt_fixed(None, 4), "NA");
        assert_eq!(fmt_p(0.0004), "<0.001");
        assert_eq!(fmt_p(0.0039), "0.004");
    }

    #[test]
    fn table_renderings() {
        let t = Table::new(strings(["a", "b"]), vec![strings(["1", "x,y"])], &serde_json::json!({"k": 1}));
        assert_eq!(t.to_csv(), "a,b\n1,\"x,y\"\n");
        assert_eq!(t.to_markdown(), "| a | b |\n| --- | --- |\n| 1 | x,y |\n");
        assert_eq!(t.to_json(), "{\n  \"k\": 1\n}\n");
    }
}
