use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn demobias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_demobias"))
        .args(args)
        .env_remove("DEMOBIAS_CONFIG")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs `audit` on the fixture corpus; returns the run directory.
fn audit(out: &Path, extra: &[&str]) -> PathBuf {
    let (m, s) = (fixture("messages.jsonl"), fixture("sidecar.jsonl"));
    let mut args = vec!["audit", "--messages", &m, "--sidecar", &s, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = demobias(&args);
    assert!(o.status.success(), "audit failed: {}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let dir = stdout
        .lines()
        .find_map(|l| l.strip_prefix("reports: "))
        .expect("reports line");
    PathBuf::from(dir)
}

fn read_csv(path: &Path) -> (String, Vec<csv::StringRecord>, csv::StringRecord) {
    let text = std::fs::read_to_string(path).unwrap();
    let first = text.lines().next().unwrap().to_string();
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let rows = rdr.records().map(Result::unwrap).collect();
    (first, rows, header)
}

#[test]
fn grid_rejects_empty_axes() {
    let dir = tempfile::tempdir().unwrap();
    let axes = dir.path().join("empty.toml");
    std::fs::write(&axes, "genders = []\nage_groups = []\nstances = []\n").unwrap();
    let o = demobias(&["grid", "--setting", "sg", "--axes", axes.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty"), "{}", stderr(&o));
}

#[test]
fn grid_writes_jsonl_to_stdout() {
    let o = demobias(&["grid", "--setting", "sg", "--models", "m1,m2"]);
    assert!(o.status.success());
    let lines: Vec<serde_json::Value> = String::from_utf8_lossy(&o.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 32);
    assert_eq!(lines[0]["model_id"], "m1");
    assert_eq!(lines[0]["setting"], "SG");
}

#[test]
fn empty_corpus_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let messages = dir.path().join("messages.jsonl");
    std::fs::write(&messages, "").unwrap();
    let o = demobias(&[
        "audit",
        "--family",
        "all",
        "--messages",
        messages.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn bad_knobs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture("messages.jsonl");
    let o = demobias(&["audit", "--messages", &m, "--smoothing", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = demobias(&["audit", "--messages", &m, "--family", "astrology", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn missing_sidecar_fields_fail_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let m = fixture("messages.jsonl");
    let out = dir.path().join("out");
    let o = demobias(&["audit", "--messages", &m, "--family", "style", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("formality_prob"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn persuasion_report_has_tiers() {
    let dir = tempfile::tempdir().unwrap();
    let run = audit(dir.path(), &["--family", "persuasion"]);
    let (first, rows, header) = read_csv(&run.join("persuasion_report.csv"));
    assert!(first.starts_with("# config_hash="));
    let tier = header.iter().position(|h| h == "tier").unwrap();
    assert!(!rows.is_empty());
    for r in &rows {
        assert!(["ns", "†", "*", "**", "***", "NA"].contains(&&r[tier]), "tier {:?}", &r[tier]);
    }
    assert!(rows.iter().any(|r| r[tier].starts_with('*')));
    assert!(run.join("manifest.json").exists());
    assert!(!run.join("formality_gender.csv").exists());
}

#[test]
fn lexical_family_reports_top_and_bottom_words() {
    let dir = tempfile::tempdir().unwrap();
    let run = audit(dir.path(), &["--family", "lexical", "--pos-filter", "noun", "--top-k", "10"]);
    let (_, rows, header) = read_csv(&run.join("salient_words.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (axis, direction, model) = (col("axis"), col("direction"), col("model_id"));
    for d in ["top", "bottom"] {
        let n = rows
            .iter()
            .filter(|r| &r[model] == "fixture-a" && &r[axis] == "gender" && &r[direction] == d)
            .count();
        assert_eq!(n, 10, "{d} words");
    }
}

#[test]
fn config_file_supplies_knobs_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[paths]\nout = 'from-config'\n[run]\nlambda = 0.2\n").unwrap();
    let (m, s) = (fixture("messages.jsonl"), fixture("sidecar.jsonl"));
    let run = |extra: &[&str]| {
        let mut args = vec!["--config", cfg.to_str().unwrap(), "audit", "--family", "persuasion", "--messages", &m, "--sidecar", &s];
        args.extend_from_slice(extra);
        let o = demobias(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        String::from_utf8_lossy(&o.stdout).into_owned()
    };
    let stdout = run(&[]);
    assert!(stdout.contains("from-config"), "{stdout}");
    let runs: Vec<_> = std::fs::read_dir(dir.path().join("from-config")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    let gaps = std::fs::read_to_string(runs[0].as_ref().unwrap().path().join("persuasion_gaps.csv")).unwrap();
    assert!(gaps.contains(",0.2\n"), "{gaps}");

    let other = dir.path().join("flag-out");
    let stdout = run(&["--lambda", "0.05", "--out", other.to_str().unwrap()]);
    assert!(stdout.contains("flag-out"), "{stdout}");
}

#[test]
fn report_prints_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let run = audit(dir.path(), &["--family", "insights"]);
    let run = run.to_str().unwrap();
    let o = demobias(&["report", run]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("config_hash: "));
    assert!(text.contains("linkage.csv"));
    let o = demobias(&["report", run, "--table", "linkage"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.lines().next().unwrap().starts_with("model_id"));
    assert_eq!(text.lines().count(), 1 + 2 * 3);
}

#[test]
fn ingest_reports_coverage_and_rewrites_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("canonical.jsonl");
    let (m, s) = (fixture("messages.jsonl"), fixture("sidecar.jsonl"));
    let o = demobias(&["ingest", "--messages", &m, "--sidecar", &s, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("fixture-a, fixture-b"));
    let original = std::fs::read_to_string(&m).unwrap();
    let rewritten = std::fs::read_to_string(&out).unwrap();
    assert_eq!(original.lines().count(), rewritten.lines().count());
}
