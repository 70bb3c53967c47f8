use std::path::Path;
use std::process::{Command, Output};

fn pcgraph(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcgraph"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("PCGRAPH_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_then_select_recovers_model_a() {
    let dir = tempfile::tempdir().unwrap();
    let sim = pcgraph(dir.path(), &["simulate", "--model", "a", "--n", "2048", "--seed", "7"]);
    assert!(sim.status.success(), "{}", stderr(&sim));
    for f in ["sample.csv", "sample_model.json", "sample_truth.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let csv = dir.path().join("sample.csv");
    let sel = pcgraph(
        dir.path(),
        &[
            "select",
            csv.to_str().unwrap(),
            "--m",
            "64",
            "--format",
            "json",
            "--dump-spectrum",
        ],
    );
    assert!(sel.status.success(), "{}", stderr(&sel));
    let result: serde_json::Value = serde_json::from_str(&stdout(&sel)).unwrap();
    assert_eq!(result["method"], "mht");
    for f in [
        "selection.json",
        "selection_graph.json",
        "selection.dot",
        "selection_statistics.csv",
        "selection.txt",
        "selection_spectrum.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let truth = std::fs::read_to_string(dir.path().join("sample_truth.json")).unwrap();
    let estimated = std::fs::read_to_string(dir.path().join("selection_graph.json")).unwrap();
    let truth: serde_json::Value = serde_json::from_str(&truth).unwrap();
    let estimated: serde_json::Value = serde_json::from_str(&estimated).unwrap();
    assert_eq!(truth, estimated);
}

#[test]
fn stepwise_method_and_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pcgraph(dir.path(), &["simulate", "--model", "b", "--n", "1024"])
        .status
        .success());
    let csv = dir.path().join("sample.csv");
    let sel = pcgraph(
        dir.path(),
        &[
            "select",
            csv.to_str().unwrap(),
            "--method",
            "stepwise",
            "--format",
            "csv",
        ],
    );
    assert!(sel.status.success(), "{}", stderr(&sel));
    assert!(stdout(&sel).starts_with("edge_i,edge_j,Z"));
}

#[test]
fn exit_codes_distinguish_failure_classes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = pcgraph(dir.path(), &["select", "/definitely/not/here.csv"]);
    assert_eq!(missing.status.code(), Some(4));
    assert!(stderr(&missing).contains("not/here.csv"));

    assert!(pcgraph(dir.path(), &["simulate", "--model", "a", "--n", "256"])
        .status
        .success());
    let csv = dir.path().join("sample.csv");
    let singular = pcgraph(dir.path(), &["select", csv.to_str().unwrap(), "--m", "1"]);
    assert_eq!(singular.status.code(), Some(2));
    assert!(stderr(&singular).contains("2M+1"));

    let unknown = pcgraph(dir.path(), &["select", csv.to_str().unwrap(), "--method", "nope"]);
    assert_eq!(unknown.status.code(), Some(2));

    let bad_window = pcgraph(dir.path(), &["select", csv.to_str().unwrap(), "--window", "nope"]);
    assert_eq!(bad_window.status.code(), Some(2));
}

#[test]
fn rejects_non_numeric_samples() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "a,b\n1,2\nx,3\n").unwrap();
    let o = pcgraph(dir.path(), &["select", csv.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn refuses_non_stationary_model_json() {
    let dir = tempfile::tempdir().unwrap();
    let sim = pcgraph(dir.path(), &["simulate", "--model", "a", "--n", "64"]);
    assert!(sim.status.success());
    let path = dir.path().join("sample_model.json");
    let mut model: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    scale_numbers(&mut model["phi"], 10.0);
    let bad = dir.path().join("bad_model.json");
    std::fs::write(&bad, serde_json::to_string(&model).unwrap()).unwrap();
    let o = pcgraph(
        dir.path(),
        &["simulate", "--model-json", bad.to_str().unwrap(), "--name", "x"],
    );
    assert!(!o.status.success());
    assert!(!dir.path().join("x.csv").exists());
}

fn scale_numbers(v: &mut serde_json::Value, factor: f64) {
    match v {
        serde_json::Value::Number(n) => *v = serde_json::json!(n.as_f64().unwrap() * factor),
        serde_json::Value::Array(a) => a.iter_mut().for_each(|x| scale_numbers(x, factor)),
        serde_json::Value::Object(o) => o.values_mut().for_each(|x| scale_numbers(x, factor)),
        _ => {}
    }
}

#[test]
fn cohort_mixes_samples_and_graphs() {
    let dir = tempfile::tempdir().unwrap();
    for (name, seed) in [("s1", "1"), ("s2", "2")] {
        let o = pcgraph(
            dir.path(),
            &[
                "simulate", "--model", "a", "--n", "1024", "--seed", seed, "--name", name,
            ],
        );
        assert!(o.status.success());
    }
    let p = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let g1 = format!("left={},{}", p("s1.csv"), p("s2.csv"));
    let g2 = format!("right={}", p("s1_truth.json"));
    let o = pcgraph(dir.path(), &["cohort", "--group", &g1, "--group", &g2, "--m", "32"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("ordinal,edge_i,edge_j,left,right"));
    assert_eq!(lines.count(), 10);
    // (1,2) is present in the truth, so its percentage there is 100.
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("1,1,2,"));
    assert!(row.ends_with(",100"), "{row}");
    assert!(dir.path().join("cohort.csv").exists());

    let bad = pcgraph(dir.path(), &["cohort", "--group", "nofiles"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bench_timing_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcgraph(dir.path(), &["bench", "timing", "--p", "6,8", "--n", "256"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("timing_mht.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn bench_errors_requires_long_flag_for_large_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let o = pcgraph(dir.path(), &["bench", "errors", "--p", "60"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dimension_ranges_and_lists() {
    let dir = tempfile::tempdir().unwrap();
    let rows = |spec: &str| {
        let o = pcgraph(dir.path(), &["bench", "timing", "--p", spec, "--n", "128", "--m", "8"]);
        assert!(o.status.success(), "{spec}: {}", stderr(&o));
        let csv = std::fs::read_to_string(dir.path().join("timing_mht.csv")).unwrap();
        csv.lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().to_string())
            .collect::<Vec<_>>()
    };
    assert_eq!(rows("4:6"), ["4", "5", "6"]);
    assert_eq!(rows("4:8:2"), ["4", "6", "8"]);
    assert_eq!(rows("5,7"), ["5", "7"]);
    for bad in ["6:4", "a:b", "4:8:0"] {
        let o = pcgraph(dir.path(), &["bench", "timing", "--p", bad]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
    }
    let o = pcgraph(
        dir.path(),
        &["bench", "errors", "--p", "6", "--alpha-grid", "0:1", "--reps", "1"],
    );
    assert_eq!(o.status.code(), Some(2));
}
