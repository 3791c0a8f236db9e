use std::path::Path;
use std::process::{Command, Output};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini.jsonl");

fn spanagree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spanagree")).args(args).env_remove("SPANAGREE_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn assert_error(o: &Output, code: i32, kind: &str) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", stderr(o));
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "single-line error expected: {err:?}");
    assert!(err.starts_with(&format!("error[{kind}]: ")), "{err:?}");
}

#[test]
fn validate_fixture_exits_zero() {
    let o = spanagree(&["validate", FIXTURE]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ok: 40 instances"));
}

#[test]
fn agreement_csv_is_byte_identical_across_runs() {
    let args = ["agreement", "--data", FIXTURE, "--policy", "dynamic:mean", "--level", "span"];
    let a = spanagree(&args);
    let b = spanagree(&args);
    let c = spanagree(&[&["--jobs", "2"], &args[..]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let text = stdout(&a);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][0], "name");
    for (i, row) in rows[1..].iter().enumerate() {
        assert_eq!(row.len(), 7);
        assert_eq!(row[i + 1], "1.0000");
        for (j, cell) in row[1..].iter().enumerate() {
            assert_eq!(*cell, rows[j + 1][i + 1], "symmetric");
            assert_eq!(cell.split('.').nth(1).map(str::len), Some(4));
        }
    }
}

#[test]
fn random_vectors_seed_seven() {
    let o =
        spanagree(&["baseline", "random-vectors", "--len", "100", "--ones", "16", "--trials", "1000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let value: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((0.53..=0.55).contains(&value), "{value}");

    let json = spanagree(&["baseline", "random-vectors", "--seed", "7", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["spec"]["seed"], 7);
    assert!((v["baseline"].as_f64().unwrap() - value).abs() < 5e-5);
}

#[test]
fn seed_defaults_from_environment() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_spanagree"))
        .args(["baseline", "random-vectors"])
        .env("SPANAGREE_SEED", "7")
        .output()
        .unwrap();
    let explicit = spanagree(&["baseline", "random-vectors", "--seed", "7"]);
    assert_eq!(with_env.stdout, explicit.stdout);
    let default = spanagree(&["baseline", "random-vectors"]);
    assert!(stdout(&default).contains(",2024,"));
}

#[test]
fn config_errors_exit_one() {
    assert_error(&spanagree(&["agreement", "--data", FIXTURE, "--policy", "dynamic:nope"]), 1, "config");
    assert_error(&spanagree(&["agreement", "--data", FIXTURE, "--methods", "nope"]), 1, "config");
    assert_error(&spanagree(&["agreement", "--data", FIXTURE, "--level", "phrase"]), 1, "config");
    assert_error(&spanagree(&["agreement", "--data", "/nonexistent.jsonl"]), 1, "config");
    assert_error(&spanagree(&["thresholds", "--data", FIXTURE, "--target", "4"]), 1, "config");
    assert_error(&spanagree(&["baseline", "random-vectors", "--ones", "101"]), 1, "config");
    assert_error(&spanagree(&["np-analysis", "--data", FIXTURE, "--probes", "LIME"]), 1, "config");
    assert_error(&spanagree(&["no-such-command"]), 1, "config");
    assert_error(&spanagree(&["--jobs", "0", "validate", FIXTURE]), 1, "config");
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    let line = r#"{"id":"x","label":"l","tokens":[{"text":"a","pos":"DET","is_stop":true,"is_punct":false},{"text":".","pos":"PUNCT","is_stop":false,"is_punct":true}],"spans":[{"start":0,"end":2,"label":"NP"}],"profiles":{"m":[0.1,0.2]},"human":[0.0,1.0]}"#;
    std::fs::write(&bad, format!("{line}\n")).unwrap();
    let o = spanagree(&["validate", bad.to_str().unwrap()]);
    assert_error(&o, 2, "data");
    assert!(stderr(&o).contains("line 1"));

    std::fs::write(&bad, "{not json\n").unwrap();
    assert_error(&spanagree(&["agreement", "--data", bad.to_str().unwrap()]), 2, "data");
}

#[test]
fn formats_and_out_directory() {
    let md = spanagree(&["spans", "--data", FIXTURE, "--format", "md"]);
    assert!(stdout(&md).starts_with("| statistic | mean | min | max |\n| --- |"));
    let json = spanagree(&["chi2", "--data", FIXTURE, "--with-human", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 21 * 3);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = spanagree(&["thresholds", "--data", FIXTURE, "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["thresholds_k.csv", "thresholds_distance.csv", "thresholds_ranking.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn topk_and_shuffle_outputs() {
    let o = spanagree(&["topk", "--data", FIXTURE, "--methods", "LIME", "--with-human", "--policy", "fixed:4"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 40 * 2);
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(2) == Some("4")));

    let o = spanagree(&["baseline", "shuffle", "--data", FIXTURE, "--method", "LIME", "--policy", "dynamic:mean"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("LIME,"));
}

fn read_dir(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn report_is_deterministic_and_regenerable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |dir: &Path, jobs: &str| {
        let o =
            spanagree(&["--jobs", jobs, "report", "--data", FIXTURE, "--out", dir.to_str().unwrap(), "--seed", "11"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    };
    run(a.path(), "1");
    run(b.path(), "4");
    let files = read_dir(a.path());
    assert_eq!(files, read_dir(b.path()));

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 11);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["input"]["sha256"].as_str().unwrap().len(), 64);
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert_eq!(artifacts.len() + 1, files.len());

    let regen = tempfile::tempdir().unwrap();
    let mut regenerated = 0;
    for art in artifacts {
        let name = art["name"].as_str().unwrap();
        let Some(cmd) = art["command"].as_array() else { continue };
        let mut args: Vec<String> = cmd.iter().map(|c| c.as_str().unwrap().to_owned()).collect();
        args.extend(["--data".to_owned(), FIXTURE.to_owned()]);
        let expected = std::fs::read(a.path().join(name)).unwrap();
        let actual = if args[0] == "thresholds" {
            args.extend(["--out".to_owned(), regen.path().to_str().unwrap().to_owned()]);
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            assert_eq!(spanagree(&refs).status.code(), Some(0));
            std::fs::read(regen.path().join(name)).unwrap()
        } else {
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            spanagree(&refs).stdout
        };
        assert_eq!(String::from_utf8(actual).unwrap(), String::from_utf8(expected).unwrap(), "{name}: {args:?}");
        regenerated += 1;
    }
    assert_eq!(regenerated, artifacts.len() - 1);
}
