use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_convograph"));
    cmd.env_remove("CONVOGRAPH_DATA_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn convograph")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn fixture_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/compare/config.ini")
}

fn record(id: usize, author: &str, text: &str) -> String {
    serde_json::json!({
        "id": id.to_string(),
        "author": author,
        "text": text,
        "created_at": format!("2019-10-{:02}T10:00:00Z", 1 + id % 28),
    })
    .to_string()
}

/// Writes one record per edge (author mentions target) plus one silent
/// record per isolated author.
fn write_edges(dir: &Path, name: &str, edges: &[(&str, &str)], isolated: &[&str]) -> PathBuf {
    let mut lines: Vec<String> = edges
        .iter()
        .enumerate()
        .map(|(i, (a, b))| record(i, a, &format!("halo @{b}")))
        .collect();
    for (i, a) in isolated.iter().enumerate() {
        lines.push(record(edges.len() + i, a, "halo semua"));
    }
    let path = dir.join(name);
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

fn write_config(dir: &Path, brands: &[(&str, &Path)], extra: &str) -> PathBuf {
    let mut text = format!("[run]\nseed = 3\n{extra}\n");
    for (name, path) in brands {
        text.push_str(&format!("[brand.{name}]\nrecords = {}\n", path.display()));
    }
    let path = dir.join("config.ini");
    fs::write(&path, text).unwrap();
    path
}

fn clique(prefix: &str, n: usize) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push((format!("{prefix}{i}"), format!("{prefix}{j}")));
        }
    }
    out
}

#[test]
fn path_of_four() {
    let dir = TempDir::new().unwrap();
    let p = write_edges(
        dir.path(),
        "p.jsonl",
        &[("a", "b"), ("b", "c"), ("c", "d")],
        &[],
    );
    let o = run(&["graph", "metrics", p.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["size"], 4);
    assert_eq!(v["edges"], 3);
    assert_eq!(v["diameter"], 3);
    assert_eq!(v["connected_components"], 1);
    assert_eq!(v["density"], 0.5);
    assert_eq!(v["avg_degree"], 1.5);
    assert!((v["avg_path_length"].as_f64().unwrap() - 10.0 / 6.0).abs() < 1e-12);
    for key in [
        "size",
        "edges",
        "density",
        "modularity",
        "diameter",
        "avg_path_length",
        "avg_degree",
        "reachability",
        "connected_components",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn table_output_lists_every_property() {
    let dir = TempDir::new().unwrap();
    let p = write_edges(dir.path(), "p.jsonl", &[("a", "b")], &["c"]);
    let o = run(&["graph", "metrics", p.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("connected_components: 2"), "{text}");
    assert!(text.contains("diameter: 1"));
}

#[test]
fn empty_input_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("empty.jsonl");
    fs::write(&p, "").unwrap();
    let o = run(&["graph", "metrics", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no records"), "{}", stderr(&o));
}

#[test]
fn malformed_lines_are_skipped_with_a_warning() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("mixed.jsonl");
    fs::write(
        &p,
        format!(
            "{}\nnot json\n{}\n",
            record(1, "a", "@b hi"),
            record(2, "b", "@c hi")
        ),
    )
    .unwrap();
    let o = run(&[
        "ingest",
        "validate",
        p.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("skipped 1"));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["records"], 2);
    assert_eq!(v["mentions"], 2);
}

#[test]
fn bad_arguments_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let p = write_edges(dir.path(), "one.jsonl", &[("a", "b")], &[]);
    let single = write_config(dir.path(), &[("solo", &p)], "");
    for args in [
        vec!["compare", "--config", single.to_str().unwrap()],
        vec![
            "graph",
            "metrics",
            "--config",
            single.to_str().unwrap(),
            "--brand",
            "ghost",
        ],
        vec!["graph", "metrics", "/does/not/exist.jsonl"],
        vec![
            "graph",
            "metrics",
            p.to_str().unwrap(),
            "--since",
            "last tuesday",
        ],
        vec!["graph", "metrics"],
        vec!["no-such-command"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn time_window_narrows_the_graph() {
    let dir = TempDir::new().unwrap();
    let p = write_edges(
        dir.path(),
        "t.jsonl",
        &[("a", "b"), ("b", "c"), ("c", "d")],
        &[],
    );
    let o = run(&[
        "graph",
        "metrics",
        p.to_str().unwrap(),
        "--format",
        "json",
        "--since",
        "2019-10-02T00:00:00Z",
        "--until",
        "2019-10-03T00:00:00Z",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        (v["size"].as_u64(), v["edges"].as_u64()),
        (Some(2), Some(1))
    );
}

#[test]
fn export_formats() {
    let dir = TempDir::new().unwrap();
    let p = write_edges(dir.path(), "e.jsonl", &[("b", "a"), ("a", "c")], &["z"]);
    let tsv = stdout(&run(&["graph", "export", p.to_str().unwrap()]));
    assert_eq!(tsv, "a\tb\na\tc\n");
    let dot = stdout(&run(&[
        "graph",
        "export",
        p.to_str().unwrap(),
        "--as",
        "dot",
    ]));
    assert!(dot.starts_with("graph conversation {"));
    assert!(dot.contains("\"z\";"));
    assert!(dot.contains("\"a\" -- \"b\";"));
    assert!(dot.trim_end().ends_with('}'));
}

#[test]
fn community_detect_writes_two_columns() {
    let dir = TempDir::new().unwrap();
    let edges: Vec<(String, String)> = clique("x", 4)
        .into_iter()
        .chain(clique("y", 4))
        .chain([("x0".into(), "y0".into())])
        .collect();
    let refs: Vec<(&str, &str)> = edges
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let p = write_edges(dir.path(), "c.jsonl", &refs, &[]);
    let o = run(&["community", "detect", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("modularity"));
    let rows: Vec<(String, String)> = stdout(&o)
        .lines()
        .map(|l| {
            let (h, c) = l.split_once('\t').unwrap();
            (h.to_string(), c.to_string())
        })
        .collect();
    assert_eq!(rows.len(), 8);
    let of = |h: &str| rows.iter().find(|(x, _)| x == h).unwrap().1.clone();
    assert_eq!(of("x1"), of("x3"));
    assert_ne!(of("x1"), of("y1"));
}

#[test]
fn dominating_brand_wins_every_network_row() {
    let dir = TempDir::new().unwrap();
    let mut strong: Vec<(String, String)> =
        clique("a", 5).into_iter().chain(clique("b", 5)).collect();
    strong.push(("a0".into(), "b0".into()));
    let strong: Vec<(&str, &str)> = strong
        .iter()
        .map(|(a, b)| (a.as_str(), b.as_str()))
        .collect();
    let a = write_edges(dir.path(), "a.jsonl", &strong, &[]);
    let b = write_edges(
        dir.path(),
        "b.jsonl",
        &[("p", "q"), ("q", "r"), ("r", "s"), ("s", "t")],
        &["u"],
    );
    let cfg = write_config(dir.path(), &[("A", &a), ("B", &b)], "");
    let o = run(&["compare", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("rows won: A: 9, B: 0"), "{text}");
    assert!(text.contains("positive_pct") && text.contains("n/a"));
}

#[test]
fn identical_brands_tie_everywhere() {
    let dir = TempDir::new().unwrap();
    let a = write_edges(
        dir.path(),
        "a.jsonl",
        &[("a", "b"), ("b", "c"), ("d", "e")],
        &[],
    );
    let cfg = write_config(dir.path(), &[("A", &a), ("B", &a)], "");
    let o = run(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let network: Vec<&Value> = rows.iter().take(9).collect();
    assert!(network
        .iter()
        .all(|r| r["tied"] == true && r["best"].is_null()));
    assert!(v["wins"].as_array().unwrap().iter().all(|w| w["wins"] == 0));
}

#[test]
fn label_tally_of_seven_in_ten() {
    let dir = TempDir::new().unwrap();
    let labeled = dir.path().join("labeled.csv");
    fs::write(
        &labeled,
        "text,label\nbagus mantap,positive\nsenang puas,positive\ngagal error,negative\nkecewa parah,negative\n",
    )
    .unwrap();
    let mut lines = Vec::new();
    for i in 0..10 {
        let text = if i < 7 { "mantap puas" } else { "gagal parah" };
        lines.push(record(i, "u", text));
    }
    let records = dir.path().join("r.jsonl");
    fs::write(&records, lines.join("\n")).unwrap();
    let model = dir.path().join("model.json");
    let o = run(&[
        "sentiment",
        "train",
        "--labeled",
        labeled.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--all",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&[
        "sentiment",
        "label",
        "--model",
        model.to_str().unwrap(),
        records.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tally"]["positive_rendered"], "70.00%");
    assert_eq!(v["tally"]["negative_rendered"], "30.00%");
    assert_eq!(v["predictions"].as_array().unwrap().len(), 10);
}

#[test]
fn model_rejects_a_different_pipeline() {
    let dir = TempDir::new().unwrap();
    let labeled = dir.path().join("labeled.csv");
    fs::write(&labeled, "text,label\nbagus,positive\ngagal,negative\n").unwrap();
    let model = dir.path().join("model.json");
    assert!(run(&[
        "sentiment",
        "train",
        "--labeled",
        labeled.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--all"
    ])
    .status
    .success());
    let stop = dir.path().join("stop.txt");
    fs::write(&stop, "bagus\n").unwrap();
    let records = write_edges(dir.path(), "r.jsonl", &[("a", "b")], &[]);
    let cfg = write_config(
        dir.path(),
        &[("A", &records)],
        &format!("[pipeline]\nstopwords = {}\n", stop.display()),
    );
    let o = run(&[
        "sentiment",
        "label",
        "--config",
        cfg.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--brand",
        "A",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sentiment_eval_reports_agreement() {
    let o = run(&[
        "sentiment",
        "eval",
        "--config",
        fixture_config().to_str().unwrap(),
        "--brand",
        "west",
        "--format",
        "table",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for key in [
        "precision",
        "recall",
        "f_measure",
        "accuracy",
        "kappa",
        "positive",
        "negative",
    ] {
        assert!(text.contains(key), "{key} missing from\n{text}");
    }
}

#[test]
fn compare_is_deterministic_and_round_trips() {
    let cfg = fixture_config();
    let a = run(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let b = run(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(v, again);
    assert_eq!(
        v["brands"],
        serde_json::json!(["north", "south", "east", "west"])
    );
    assert_eq!(v["rows"].as_array().unwrap().len(), 11);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.csv");
    let o = run(&[
        "compare",
        "--config",
        fixture_config().to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(out).unwrap();
    assert!(text.starts_with("property,north,south,east,west,best\n"));
}

#[test]
fn data_dir_overrides_config_directory() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    write_edges(&data, "a.jsonl", &[("a", "b")], &[]);
    write_edges(&data, "b.jsonl", &[("c", "d"), ("d", "e")], &[]);
    let cfg = dir.path().join("run.ini");
    fs::write(
        &cfg,
        "[brand.A]\nrecords = a.jsonl\n[brand.B]\nrecords = b.jsonl\n",
    )
    .unwrap();
    let missing = run(&["compare", "--config", cfg.to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    let o = bin()
        .args(["compare", "--config", cfg.to_str().unwrap()])
        .env("CONVOGRAPH_DATA_DIR", &data)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}
