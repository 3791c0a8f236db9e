//! The `spanagree` command line.
//!
//! Errors are printed as one line, `error[config]: ...` (exit 1) or
//! `error[data]: ...` (exit 2).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::agreement::{pairwise_matrix, Level};
use crate::baselines::{beats_baseline_report, random_vector_baseline, threshold_benchmark, KTarget, RandomVectorSpec};
use crate::lingstats::{chi2_all_pairs, human_top_tags, np_alternation, AlternationQuery, DEFAULT_TAG_COUNT};
use crate::model::{load_corpus, Corpus, CorpusError, HUMAN};
use crate::report::{self, sha256_hex, Format, RandomBaselineRow, ReportConfig, Table};
use crate::selection::KPolicy;
use crate::spanset::span_stats;

/// Seed used when neither `--seed` nor `SPANAGREE_SEED` is given.
pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Parser)]
#[command(name = "spanagree", version, about = "Token- and span-level agreement of attribution methods")]
pub struct Cli {
    /// Worker threads for per-instance work (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load a corpus and check every invariant.
    Validate { path: PathBuf },
    /// Selected token and span indices per instance and name.
    Topk {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        names: NameArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pairwise mean agreement@k matrix.
    Agreement {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        names: NameArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, default_value = "token")]
        level: Level,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Span statistics and targeted-span counts.
    Spans {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        names: NameArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Random-vector and shuffle baselines.
    Baseline {
        #[command(subcommand)]
        command: BaselineCommand,
    },
    /// Mean/sd of dynamic k for all thresholds and distance to a target.
    Thresholds {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        /// Target as `<mean>:<sd>`.
        #[arg(long, default_value = "4:3")]
        target: String,
        #[arg(long, default_value_t = 1)]
        window: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stop-word, punctuation and POS preferences.
    Prefs {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        names: NameArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        tags: TagArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Chi-square tests of preferences for every pair of names.
    Chi2 {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        names: NameArgs,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        tags: TagArgs,
        /// Yates continuity correction on 2x2 tables.
        #[arg(long)]
        yates: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Head/modifier alternation inside consensus-targeted chunks.
    NpAnalysis {
        #[command(flatten)]
        data: DataArgs,
        /// Exactly two names.
        #[arg(long, value_delimiter = ',', required = true)]
        probes: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        consensus: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "DET,NOUN")]
        pattern: Vec<String>,
        #[arg(long, default_value = "NP")]
        label: String,
        #[command(flatten)]
        policy: PolicyArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Every table plus a manifest, written to a directory.
    Report {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "SPANAGREE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        window: usize,
        #[arg(long)]
        with_human: bool,
        #[arg(long, default_value = "4:3")]
        target: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Alternation probes (default: first two methods).
        #[arg(long, value_delimiter = ',')]
        probes: Vec<String>,
        /// Alternation consensus names (default: third and fourth methods).
        #[arg(long, value_delimiter = ',')]
        consensus: Option<Vec<String>>,
        #[arg(long)]
        yates: bool,
    },
}

#[derive(Debug, Subcommand)]
enum BaselineCommand {
    /// Expected agreement@k of two random binary vectors.
    RandomVectors {
        #[arg(long, default_value_t = 100)]
        len: usize,
        #[arg(long, default_value_t = 16)]
        ones: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = "SPANAGREE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Agreement of each method with a shuffled copy of itself, against its
    /// agreement with the other methods.
    Shuffle {
        #[command(flatten)]
        data: DataArgs,
        /// Report only this method's row.
        #[arg(long)]
        method: Option<String>,
        #[arg(long, value_delimiter = ',')]
        methods: Vec<String>,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, default_value = "token")]
        level: Level,
        #[arg(long, env = "SPANAGREE_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct DataArgs {
    /// JSONL corpus.
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
}

#[derive(Debug, Args)]
struct NameArgs {
    /// Comma-separated methods (default: all in the corpus).
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Append the human profile.
    #[arg(long)]
    with_human: bool,
}

#[derive(Debug, Args)]
struct PolicyArgs {
    /// `fixed:<k>` or `dynamic:<threshold>[:pos]`.
    #[arg(long, default_value = "fixed:4")]
    policy: String,
    /// Half-width of the local-peak window.
    #[arg(long, default_value_t = 1)]
    window: usize,
}

#[derive(Debug, Args)]
struct TagArgs {
    /// POS tags to compare (default: the human profile's most selected).
    #[arg(long, value_delimiter = ',')]
    tags: Vec<String>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// csv, json or md.
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Directory to write into instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Data(String),
}

impl CliError {
    fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Config(m) => ("config", m),
            CliError::Data(m) => ("data", m),
        };
        let msg: Vec<&str> = msg.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        format!("error[{kind}]: {}", msg.join("; "))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

/// Runs with the process arguments and standard streams; returns the exit code.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let _ = writeln!(err, "{}", CliError::Config(first.to_owned()).line());
            return 1;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                let mut buf = Vec::new();
                let r = pool.install(|| dispatch(cli.command, &mut buf));
                out.write_all(&buf).map_err(CliError::from).and(r)
            }
            Err(e) => Err(CliError::config(e)),
        },
        None => dispatch(cli.command, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.line());
            e.code()
        }
    }
}

fn load(path: &Path) -> Result<Corpus, CliError> {
    load_corpus(path).map_err(|e| match e {
        CorpusError::Io(io) => CliError::Config(format!("cannot read {}: {io}", path.display())),
        other => CliError::Data(format!("{}: {other}", path.display())),
    })
}

fn policy(args: &PolicyArgs) -> Result<KPolicy, CliError> {
    KPolicy::parse(&args.policy, args.window).map_err(CliError::config)
}

fn target(s: &str) -> Result<KTarget, CliError> {
    let bad = || CliError::Config(format!("target must be <mean>:<sd>, got {s:?}"));
    let (m, sd) = s.split_once(':').ok_or_else(bad)?;
    let mean: f64 = m.parse().map_err(|_| bad())?;
    let sd: f64 = sd.parse().map_err(|_| bad())?;
    if !mean.is_finite() || !sd.is_finite() {
        return Err(bad());
    }
    Ok(KTarget { mean, sd })
}

fn check_names(corpus: &Corpus, names: &[String]) -> Result<(), CliError> {
    match names.iter().find(|n| !corpus.resolves(n)) {
        Some(n) => Err(CliError::Config(format!(
            "unknown method {n:?}; corpus has {} and {HUMAN}",
            corpus.methods().join(", ")
        ))),
        None => Ok(()),
    }
}

fn methods_or_all(corpus: &Corpus, methods: &[String]) -> Result<Vec<String>, CliError> {
    let names = if methods.is_empty() { corpus.methods().to_vec() } else { methods.to_vec() };
    check_names(corpus, &names)?;
    Ok(names)
}

fn names(corpus: &Corpus, args: &NameArgs) -> Result<Vec<String>, CliError> {
    let mut names = methods_or_all(corpus, &args.methods)?;
    if args.with_human && !names.iter().any(|n| n == HUMAN) {
        names.push(HUMAN.to_owned());
    }
    Ok(names)
}

fn tags(corpus: &Corpus, args: &TagArgs, policy: KPolicy) -> Vec<String> {
    if args.tags.is_empty() {
        human_top_tags(corpus, policy, DEFAULT_TAG_COUNT)
    } else {
        args.tags.clone()
    }
}

fn emit(output: &OutputArgs, stem: &str, table: &Table, out: &mut dyn Write) -> Result<(), CliError> {
    emit_many(output, &[(stem.to_owned(), table.clone())], out)
}

/// Writes each table to `<out>/<stem>.<ext>`, or all of them to stdout.
fn emit_many(output: &OutputArgs, tables: &[(String, Table)], out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(dir) = &output.out {
        fs::create_dir_all(dir)?;
        for (stem, table) in tables {
            fs::write(dir.join(format!("{stem}.{}", output.format.extension())), table.render(output.format))?;
        }
        return Ok(());
    }
    match (output.format, tables) {
        (_, [(_, table)]) => out.write_all(table.render(output.format).as_bytes())?,
        (Format::Json, _) => {
            let map: serde_json::Map<String, serde_json::Value> =
                tables.iter().map(|(s, t)| (s.clone(), t.data.clone())).collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&map).expect("Value serialises"))?;
        }
        (format, _) => {
            for (i, (stem, table)) in tables.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                if format == Format::Markdown {
                    writeln!(out, "### {stem}\n")?;
                }
                out.write_all(table.render(format).as_bytes())?;
            }
        }
    }
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Validate { path } => {
            let corpus = load(&path)?;
            writeln!(out, "ok: {} instances, methods: {}", corpus.len(), corpus.methods().join(","))?;
        }
        Command::Topk { data, names: n, policy: p, output } => {
            let corpus = load(&data.data)?;
            let names = names(&corpus, &n)?;
            let policy = policy(&p)?;
            let table = report::topk_table(&corpus, &names, policy).map_err(CliError::config)?;
            emit(&output, &format!("topk_{}", policy.slug()), &table, out)?;
        }
        Command::Agreement { data, names: n, policy: p, level, output } => {
            let corpus = load(&data.data)?;
            let names = names(&corpus, &n)?;
            let policy = policy(&p)?;
            let m = pairwise_matrix(&corpus, &names, level, policy).map_err(CliError::config)?;
            emit(&output, &format!("agreement_{level}_{}", policy.slug()), &report::matrix_table(&m), out)?;
        }
        Command::Spans { data, names: n, policy: p, output } => {
            let corpus = load(&data.data)?;
            let names = names(&corpus, &n)?;
            let policy = policy(&p)?;
            let stats = span_stats(&corpus, &names, policy).map_err(CliError::config)?;
            emit(&output, &format!("span_stats_{}", policy.slug()), &report::span_stats_table(&stats), out)?;
        }
        Command::Baseline { command } => baseline(command, out)?,
        Command::Thresholds { data, methods, target: t, window, output } => {
            let corpus = load(&data.data)?;
            let methods = methods_or_all(&corpus, &methods)?;
            let target = target(&t)?;
            if window == 0 {
                return Err(CliError::Config("window must be at least 1".into()));
            }
            let bench = threshold_benchmark(&corpus, &methods, target, window).map_err(CliError::config)?;
            let tables = vec![
                ("thresholds_k".to_owned(), report::k_stats_table(&bench)),
                ("thresholds_distance".to_owned(), report::distance_table(&bench)),
                ("thresholds_ranking".to_owned(), report::ranking_table(&bench)),
            ];
            emit_many(&output, &tables, out)?;
        }
        Command::Prefs { data, names: n, policy: p, tags: t, output } => {
            let corpus = load(&data.data)?;
            let names = names(&corpus, &n)?;
            let policy = policy(&p)?;
            let tags = tags(&corpus, &t, policy);
            let (profiles, _) = chi2_all_pairs(&corpus, &names, policy, &tags, false).map_err(CliError::config)?;
            emit(&output, &format!("prefs_{}", policy.slug()), &report::preference_table(&profiles), out)?;
        }
        Command::Chi2 { data, names: n, policy: p, tags: t, yates, output } => {
            let corpus = load(&data.data)?;
            let names = names(&corpus, &n)?;
            let policy = policy(&p)?;
            let tags = tags(&corpus, &t, policy);
            let (_, outcomes) = chi2_all_pairs(&corpus, &names, policy, &tags, yates).map_err(CliError::config)?;
            emit(&output, &format!("chi2_{}", policy.slug()), &report::chi2_table(&outcomes), out)?;
        }
        Command::NpAnalysis { data, probes, consensus, pattern, label, policy: p, output } => {
            let corpus = load(&data.data)?;
            let policy = policy(&p)?;
            let [a, b] = probes.as_slice() else {
                return Err(CliError::Config(format!("--probes takes exactly two names, got {}", probes.len())));
            };
            check_names(&corpus, &probes)?;
            check_names(&corpus, &consensus)?;
            let query = AlternationQuery {
                probes: (a, b),
                consensus: &consensus,
                pattern: &pattern,
                span_label: &label,
                policy,
            };
            let r = np_alternation(&corpus, &query).map_err(CliError::config)?;
            emit(&output, &format!("np_alternation_{}", policy.slug()), &report::alternation_table(&r), out)?;
        }
        Command::Report { data, out: dir, seed, window, with_human, target: t, trials, probes, consensus, yates } => {
            if window == 0 {
                return Err(CliError::Config("window must be at least 1".into()));
            }
            if trials == 0 {
                return Err(CliError::Config("trials must be positive".into()));
            }
            let corpus = load(&data.data)?;
            let probes = match probes.as_slice() {
                [] => None,
                [a, b] => Some((a.clone(), b.clone())),
                other => {
                    return Err(CliError::Config(format!("--probes takes exactly two names, got {}", other.len())))
                }
            };
            if let Some((a, b)) = &probes {
                check_names(&corpus, &[a.clone(), b.clone()])?;
            }
            if let Some(c) = &consensus {
                check_names(&corpus, c)?;
            }
            let config = ReportConfig {
                seed,
                window,
                with_human,
                target: target(&t)?,
                random_trials: trials,
                probes,
                consensus,
                continuity: yates,
                ..ReportConfig::default()
            };
            let artifacts = report::build_report(&corpus, &config).map_err(CliError::config)?;
            let input = fs::read(&data.data)?;
            fs::create_dir_all(&dir)?;
            for a in &artifacts {
                fs::write(dir.join(&a.name), &a.contents)?;
            }
            let manifest = json!({
                "tool": "spanagree",
                "version": env!("CARGO_PKG_VERSION"),
                "input": {
                    "path": data.data.display().to_string(),
                    "sha256": sha256_hex(&input),
                    "instances": corpus.len(),
                    "methods": corpus.methods(),
                },
                "config": config,
                "artifacts": artifacts
                    .iter()
                    .map(|a| {
                        json!({
                            "name": a.name,
                            "sha256": sha256_hex(a.contents.as_bytes()),
                            "command": a.command,
                        })
                    })
                    .collect::<Vec<_>>(),
            });
            let mut text = serde_json::to_string_pretty(&manifest).expect("Value serialises");
            text.push('\n');
            fs::write(dir.join("manifest.json"), text)?;
            writeln!(out, "wrote {} artifacts and manifest.json to {}", artifacts.len(), dir.display())?;
        }
    }
    Ok(())
}

fn baseline(command: BaselineCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        BaselineCommand::RandomVectors { len, ones, trials, seed, output } => {
            let spec = RandomVectorSpec::new(len, ones, trials, seed).map_err(CliError::config)?;
            let row = RandomBaselineRow {
                level: Level::Token,
                source: "cli".into(),
                value: random_vector_baseline(&spec),
                spec,
            };
            let mut table = report::random_baseline_table(std::slice::from_ref(&row));
            // The level column is meaningless for a bare vector spec.
            table.header.remove(0);
            table.rows[0].remove(0);
            table.data = json!({"spec": row.spec, "baseline": row.value});
            emit(&output, "baseline_random_vectors", &table, out)?;
        }
        BaselineCommand::Shuffle { data, method, methods, policy: p, level, seed, output } => {
            let corpus = load(&data.data)?;
            let methods = methods_or_all(&corpus, &methods)?;
            let policy = policy(&p)?;
            if let Some(m) = &method {
                if !methods.contains(m) {
                    check_names(&corpus, std::slice::from_ref(m))?;
                    return Err(CliError::Config(format!("--method {m:?} is not among the compared methods")));
                }
            }
            let mut rows = beats_baseline_report(&corpus, &methods, policy, level, seed).map_err(CliError::config)?;
            if let Some(m) = &method {
                rows.retain(|r| &r.method == m);
            }
            emit(
                &output,
                &format!("baseline_shuffle_{level}_{}", policy.slug()),
                &report::baseline_table(level, policy, &rows),
                out,
            )?;
        }
    }
    Ok(())
}
