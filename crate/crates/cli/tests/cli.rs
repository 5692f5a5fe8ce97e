use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn corpus() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
}

fn paremia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paremia"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn build(dir: &Path) -> PathBuf {
    let out = dir.join("index.json");
    let meta = fixtures().join("metadata.json");
    let mut args = vec![
        "index".to_string(),
        "--out".into(),
        out.display().to_string(),
        "--meta".into(),
        meta.display().to_string(),
    ];
    args.extend(corpus().iter().map(|p| p.display().to_string()));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = paremia(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn validate_reports_and_exit_codes() {
    let files: Vec<String> = corpus().iter().map(|p| p.display().to_string()).collect();
    let mut args = vec!["validate", "--strict"];
    args.extend(files.iter().map(String::as_str));
    let o = paremia(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("incomplete es1:1: missing sl.es"));
    assert!(text.ends_with("ok: 5 unit(s) in 5 file(s)\n"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.xml");
    std::fs::write(
        &bad,
        "<pr.all>\n<sl.en>y</sl.en>\n<pr?>x</pr?>\n</pr.all>\n",
    )
    .unwrap();
    let bad = bad.display().to_string();
    let o = paremia(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("bad.xml:3:"));
    // legacy tags are accepted in lenient mode
    assert_eq!(
        paremia(&["validate", "--lenient", &bad]).status.code(),
        Some(0)
    );
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(paremia(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(paremia(&["validate"]).status.code(), Some(2));
    assert_eq!(
        paremia(&["validate", "--strict", "--lenient", "x.xml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        paremia(&[
            "similar",
            "--index",
            "i.json",
            "--unit",
            "a",
            "--weights",
            "1,2"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn index_query_similar_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let index = build(dir.path());
    let index = index.to_str().unwrap();

    let o = paremia(&[
        "query",
        "--index",
        index,
        "--keyword",
        "ser",
        "--lang",
        "es",
    ]);
    assert_eq!(stdout(&o), "es1:1\nes2:1\n");
    let o = paremia(&["query", "--index", index, "--from", "1500", "--to", "1600"]);
    assert_eq!(stdout(&o), "");
    let o = paremia(&["--format", "json", "query", "--index", index]);
    let ids: Vec<String> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(ids.len(), 5);
    let o = paremia(&["query", "--index", index, "--lang", "xx-yy"]);
    assert_eq!(o.status.code(), Some(1));

    let o = paremia(&[
        "--format", "json", "similar", "--index", index, "--unit", "es1:1", "--top", "2",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["score"]["keyword"], 1.0);
    let o = paremia(&["similar", "--index", index, "--unit", "nope"]);
    assert_eq!(o.status.code(), Some(1));

    let o = paremia(&["cluster", "--index", index, "--threshold", "0.4"]);
    assert_eq!(stdout(&o), "ar:1 es1:1 es2:1 he:1 la:1\n");
    let o = paremia(&["cluster", "--index", index, "--threshold", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn posterity_edges_and_chains() {
    let dir = tempfile::tempdir().unwrap();
    let index = build(dir.path());
    let index = index.to_str().unwrap();
    let o = paremia(&["posterity", "--index", index, "--threshold", "0.4"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("ar:1 -> la:1\t")));
    let o = paremia(&[
        "posterity",
        "--index",
        index,
        "--seed",
        "ar:1",
        "--max-depth",
        "1",
    ]);
    assert_eq!(stdout(&o).lines().count(), 4);
    let o = paremia(&["posterity", "--index", index, "--seed", "es2:1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");
    let o = paremia(&["posterity", "--index", index, "--seed", "zz:9"]);
    assert_eq!(o.status.code(), Some(1));
    let o = paremia(&["posterity", "--index", index, "--strictness", "sometimes"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn duplicates_fail_unless_allowed() {
    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.xml");
    std::fs::write(
        &dup,
        "<pr.all><pr>E ANTE érades mucho alto, e agora sodes  mucho baxo</pr></pr.all>\n",
    )
    .unwrap();
    let es1 = fixtures().join("corpus/es1.xml");
    let meta = fixtures().join("metadata.json");
    let out = dir.path().join("i.json");
    let base = [
        "index",
        "--out",
        out.to_str().unwrap(),
        "--meta",
        meta.to_str().unwrap(),
        es1.to_str().unwrap(),
        dup.to_str().unwrap(),
    ];
    let o = paremia(&base);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dup:1, es1:1"));
    assert!(!out.exists());

    let mut allowed = base.to_vec();
    allowed.push("--allow-duplicates");
    assert!(paremia(&allowed).status.success());
    assert!(out.exists());
    let report = std::fs::read_to_string(dir.path().join("i.json.duplicates.json")).unwrap();
    assert!(report.contains("es1:1"));
}

#[test]
fn config_file_sets_weights() {
    let dir = tempfile::tempdir().unwrap();
    let index = build(dir.path());
    let config = dir.path().join("paremia.conf");
    std::fs::write(&config, "# structure only\nweights = 0,0,0,1\n").unwrap();
    let o = paremia(&[
        "--format",
        "json",
        "similar",
        "--index",
        index.to_str().unwrap(),
        "--unit",
        "es1:1",
        "--config",
        config.to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        v[0]["score"]["weights_used"],
        serde_json::json!({"structure": 1.0})
    );
}

#[test]
fn rebuilds_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ia = std::fs::read(build(a.path())).unwrap();
    let ib = std::fs::read(build(b.path())).unwrap();
    assert_eq!(ia, ib);
}
