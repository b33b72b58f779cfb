use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn desk() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/resources/desk")
}

fn bundled() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/resources")
}

fn mop(args: &[&str]) -> Output {
    mop_env(args, &[])
}

fn mop_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mop"));
    cmd.args(args).env_remove("MOP_RESOURCES").env("SOURCE_DATE_EPOCH", "0");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn corpus() -> String {
    s(&desk().join("corpus")).to_string()
}

fn gold() -> String {
    s(&desk().join("gold.jsonl")).to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn extract_writes_mid_tsv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mid.jsonl");
    stdout(&mop(&["extract", "--corpus", &corpus(), "--out", s(&out)]));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(desk().join("gold_mid.jsonl")).unwrap());
    let tsv = std::fs::read_to_string(dir.path().join("mid.tsv")).unwrap();
    assert!(tsv.starts_with("reference\tautonym\tinformation\tmarkers\n"));
    assert_eq!(tsv.lines().count(), 37);
    let manifest = std::fs::read_to_string(dir.path().join("mid.manifest.json")).unwrap();
    assert!(manifest.contains("\"corpus_hash\""));
    assert!(manifest.contains("\"timestamp\": \"1970-01-01T00:00:00Z\""), "{manifest}");
}

#[test]
fn missing_resource_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mid.jsonl");
    let o = mop(&["extract", "--corpus", &corpus(), "--patterns", "/nonexistent/p.txt", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn single_label_training_data_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.tsv");
    std::fs::write(&data, "YES\tWORD\t1\tthe\tcalled\tx\nYES\tWORD\t1\ta\tcalled\ty\n").unwrap();
    let o = mop(&["train", "--data", s(&data), "--algo", "nb", "--out", s(&dir.path().join("m.txt"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unaligned_gold_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("gold.jsonl");
    std::fs::write(&g, "{\"doc\":\"Nowhere\",\"sentence\":0,\"is_emo\":false}\n").unwrap();
    let o = mop(&["eval", "--corpus", &corpus(), "--gold", s(&g)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn empty_corpus_gives_empty_mid() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = dir.path().join("mid.jsonl");
    stdout(&mop(&["extract", "--corpus", s(&empty), "--out", s(&out)]));
    assert_eq!(std::fs::read_to_string(out).unwrap(), "");
}

#[test]
fn sweep_is_deterministic_and_labels_both_modes() {
    let args = ["sweep", "--corpus", &corpus(), "--gold", &gold()];
    let a = stdout(&mop(&args));
    assert_eq!(a, stdout(&mop(&args)));
    let rows: Vec<&str> = a.lines().skip(1).collect();
    assert_eq!(rows.len(), 36);
    assert_eq!(rows.iter().filter(|r| r.starts_with("held-out,")).count(), 18);
    assert_eq!(rows.iter().filter(|r| r.starts_with("held-in,")).count(), 18);
}

#[test]
fn training_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for algo in ["nb", "gis", "iis"] {
        let run = |name: &str| {
            let out = dir.path().join(format!("{algo}-{name}.model"));
            stdout(&mop(&["train", "--corpus", &corpus(), "--gold", &gold(), "--algo", algo, "--out", s(&out)]));
            std::fs::read(out).unwrap()
        };
        assert_eq!(run("a"), run("b"), "{algo}");
    }
}

#[test]
fn classifier_filter_runs_from_trained_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("nb.model");
    stdout(&mop(&["train", "--corpus", &corpus(), "--gold", &gold(), "--algo", "nb", "--out", s(&model)]));
    let out = dir.path().join("mid.jsonl");
    stdout(&mop(&["extract", "--corpus", &corpus(), "--filter", "classifier", "--model", s(&model), "--out", s(&out)]));
    let mid = std::fs::read_to_string(out).unwrap();
    assert!(mid.lines().count() > 0);
    assert!(mid.lines().all(|l| l.contains("\"confidence\"")));
}

#[test]
fn explicit_beta_one_matches_default() {
    let base = ["eval", "--corpus", &corpus(), "--gold", &gold()];
    let default = stdout(&mop(&base));
    let mut with_beta = base.to_vec();
    with_beta.extend(["--beta", "1"]);
    assert_eq!(default, stdout(&mop(&with_beta)));
    assert!(default.contains("filtering (golden)"));
}

#[test]
fn eval_writes_csv_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("report.csv");
    let gm = desk().join("gold_mid.jsonl");
    stdout(&mop(&["eval", "--corpus", &corpus(), "--gold", &gold(), "--gold-mid", s(&gm), "--report-csv", s(&csv)]));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("section,scope,tp,fp,fn,precision,recall,f\n"));
    assert!(text.contains("autonym"));
}

#[test]
fn export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let gm = desk().join("gold_mid.jsonl");
    let out = dir.path().join("copy.jsonl");
    stdout(&mop(&["export", "--mid", s(&gm), "--format", "jsonl", "--out", s(&out)]));
    assert_eq!(std::fs::read(out).unwrap(), std::fs::read(&gm).unwrap());
    let tsv = dir.path().join("copy.tsv");
    stdout(&mop(&["export", "--mid", s(&gm), "--format", "tsv", "--out", s(&tsv)]));
    assert_eq!(std::fs::read_to_string(tsv).unwrap().lines().count(), 37);
}

#[test]
fn resource_directory_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let res = dir.path().join("res");
    std::fs::create_dir(&res).unwrap();
    // an empty pattern inventory means nothing can match
    std::fs::write(res.join("patterns.txt"), "# none\n").unwrap();
    let out = dir.path().join("mid.jsonl");
    stdout(&mop_env(&["extract", "--corpus", &corpus(), "--out", s(&out)], &[("MOP_RESOURCES", s(&res))]));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "");
    let out2 = dir.path().join("mid2.jsonl");
    stdout(&mop(&["extract", "--corpus", &corpus(), "--resources", s(&bundled()), "--out", s(&out2)]));
    assert_eq!(std::fs::read(out2).unwrap(), std::fs::read(desk().join("gold_mid.jsonl")).unwrap());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mop(&["extract"]).status.code(), Some(2));
    assert_eq!(mop(&["--set", "colour=blue", "export", "--mid", "x"]).status.code(), Some(2));
}
