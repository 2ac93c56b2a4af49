use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dspan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dspan")).args(args).output().expect("run dspan")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn clique_round_trip_and_deficiency() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k5.txt");
    let out = dspan(&["gen-clique", "--n", "5", "--out", p(&g)]);
    assert!(out.status.success());
    let text = fs::read_to_string(&g).unwrap();
    assert!(text.starts_with("5 10\n1 2\n"));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("k5.txt.json")).unwrap()).unwrap();
    assert_eq!(meta["edges"], 10);

    let out = dspan(&["deficiency", "--graph", p(&g)]);
    assert!(out.status.success());
    assert_eq!(json(&out)["failed_pairs"], 0);

    let out = dspan(&["deficiency", "--graph", p(&g), "--psi", "0.5", "--trials", "50", "--seed", "3"]);
    let a = json(&out);
    let again = json(&dspan(&["deficiency", "--graph", p(&g), "--psi", "0.5", "--trials", "50", "--seed", "3"]));
    assert_eq!(a, again);
    assert!(a["mean_failed_pairs"].as_f64().unwrap() > 0.0);
}

#[test]
fn filter_is_seeded_subgraph() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("k.txt");
    let f1 = dir.path().join("f1.txt");
    let f2 = dir.path().join("f2.txt");
    assert!(dspan(&["gen-clique", "--n", "30", "--out", p(&g)]).status.success());
    for f in [&f1, &f2] {
        assert!(dspan(&["filter", "--graph", p(&g), "--psi", "0.3", "--seed", "8", "--out", p(f)]).status.success());
    }
    let a = fs::read_to_string(&f1).unwrap();
    assert_eq!(a, fs::read_to_string(&f2).unwrap());
    let m: usize = a.lines().next().unwrap().split(' ').nth(1).unwrap().parse().unwrap();
    assert!(m > 0 && m < 435);
}

#[test]
fn builds_write_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("four.txt");
    let o = dspan(&["build", "fourhop", "--n", "500", "--psi", "0.5", "--seed", "2", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("four.txt.json")).unwrap()).unwrap();
    assert!(meta["derived"]["block_size"].as_u64().unwrap() >= 1);
    let o = dspan(&["deficiency", "--graph", p(&out), "--hops", "4"]);
    assert_eq!(json(&o)["failed_pairs"], 0);

    let iv = dir.path().join("iv.txt");
    assert!(dspan(&["build", "interval", "--n", "100", "--psi", "0.5", "--out", p(&iv)]).status.success());
    let kh = dir.path().join("kh.txt");
    assert!(dspan(&["build", "khop", "--n", "300", "--psi", "0.5", "--k", "6", "--out", p(&kh)]).status.success());
    let o = dspan(&["deficiency", "--graph", p(&kh), "--hops", "6"]);
    assert_eq!(json(&o)["failed_pairs"], 0);
}

#[test]
fn euclid_build_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    let mut text = String::from("40 2\n");
    for i in 0..40 {
        text.push_str(&format!("{} {}\n", (i * 7 % 40) as f64 * 2.5, (i * i % 37) as f64));
    }
    fs::write(&pts, text).unwrap();
    let g = dir.path().join("g.txt");
    let o = dspan(&["build", "euclid", "--points", p(&pts), "--eps", "0.25", "--psi", "1", "--out", p(&g)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = dspan(&["verify-stretch", "--graph", p(&g), "--points", p(&pts), "--eps", "0.25", "--check"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["failures"], 0);

    // A path through the points by index fails the stretch check.
    let path = dir.path().join("path.txt");
    let mut text = String::from("40 39\n");
    for i in 1..40 {
        text.push_str(&format!("{} {}\n", i, i + 1));
    }
    fs::write(&path, text).unwrap();
    let o = dspan(&["verify-stretch", "--graph", p(&path), "--points", p(&pts), "--eps", "0.25", "--check"]);
    assert_eq!(o.status.code(), Some(3));

    let o = dspan(&["lso-check", "--points", p(&pts), "--eps", "0.5", "--pairs", "200", "--check"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["passed"], 200);
}

#[test]
fn experiment_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let args = |out: &str| {
        vec![
            "experiment".to_string(),
            "clique-scaling".into(),
            "--n".into(),
            "64,128".into(),
            "--psi".into(),
            "0.5,0.25".into(),
            "--trials".into(),
            "10".into(),
            "--seed".into(),
            "4".into(),
            "--out".into(),
            out.into(),
        ]
    };
    let run = |out: &str| {
        Command::new(env!("CARGO_BIN_EXE_dspan")).args(args(out)).output().unwrap()
    };
    assert!(run(p(&a)).status.success());
    let b = dir.path().join("b.csv");
    assert!(run(p(&b)).status.success());
    let csv = fs::read_to_string(&a).unwrap();
    assert_eq!(csv, fs::read_to_string(&b).unwrap());
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("clique-scaling.v1,64,0.5,inf,exact,10,4,"));
    assert!(dir.path().join("a.csv.json").exists());

    let o = dspan(&["experiment", "sparse-failure", "--n", "32", "--trials", "5"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("schema,n,psi"));
}

#[test]
fn check_flag_reports_threshold_violations() {
    // A 4-vertex path at psi = 0.99 almost never loses an edge.
    let o = dspan(&["experiment", "sparse-failure", "--n", "4", "--psi", "0.99", "--trials", "5", "--check"]);
    assert_eq!(o.status.code(), Some(3));
    let o = dspan(&["experiment", "sparse-failure", "--n", "8", "--psi", "0.5", "--trials", "50", "--check"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.txt");
    assert_eq!(dspan(&["build", "fourhop", "--n", "100", "--psi", "1.5", "--out", p(&out)]).status.code(), Some(2));
    assert_eq!(dspan(&["build", "khop", "--n", "100", "--psi", "0.5", "--out", p(&out)]).status.code(), Some(2));
    assert_eq!(dspan(&["experiment", "nonsense"]).status.code(), Some(2));
    assert_eq!(dspan(&["experiment", "clique-scaling", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(dspan(&["gen-clique", "--n", "x", "--out", p(&out)]).status.code(), Some(2));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "5 2\n1 2\n5 3\n").unwrap();
    let o = dspan(&["deficiency", "--graph", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let missing = dir.path().join("missing.txt");
    assert_eq!(dspan(&["deficiency", "--graph", p(&missing)]).status.code(), Some(1));
}
