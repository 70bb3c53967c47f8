use pcgraph::cohort::{cohort_csv, connection_percentages, frequent_connections};
use pcgraph::io::{read_json, read_sample_csv, write_json, write_sample_csv, write_text};
use pcgraph::var::model_a;
use pcgraph::{Edge, ErrorKind, Graph, SampleMatrix, VarModel};

fn e(j: usize, k: usize) -> Edge {
    Edge::new(j, k).unwrap()
}

#[test]
fn sample_csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let x = model_a().simulate(64, 9, None).unwrap();
    write_sample_csv(&path, &x).unwrap();
    let (back, truncated) = read_sample_csv(&path).unwrap();
    assert!(!truncated);
    assert_eq!(back, x);
}

#[test]
fn odd_row_count_drops_last_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("odd.csv");
    write_text(&path, "a,b\n1,2\n3,4\n5,6\n").unwrap();
    let (x, truncated) = read_sample_csv(&path).unwrap();
    assert!(truncated);
    assert_eq!(x.n(), 2);
    assert_eq!(x.row(1), vec![3.0, 4.0]);
}

#[test]
fn malformed_samples_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("nan.csv", "a,b\n1,2\nNaN,4\n"),
        ("text.csv", "a,b\n1,2\nx,4\n"),
        ("ragged.csv", "a,b\n1,2\n3\n"),
    ] {
        let path = dir.path().join(name);
        write_text(&path, body).unwrap();
        assert!(read_sample_csv(&path).is_err(), "{name}");
    }
    let missing = read_sample_csv(&dir.path().join("absent.csv")).unwrap_err();
    assert_eq!(missing.kind(), ErrorKind::Io);
}

#[test]
fn model_and_graph_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = model_a();
    write_json(&dir.path().join("m.json"), &model).unwrap();
    let back: VarModel = read_json(&dir.path().join("m.json")).unwrap();
    let x = model.simulate(32, 4, None).unwrap();
    let y = back.simulate(32, 4, None).unwrap();
    assert_eq!(x, y);

    let g = Graph::with_missing(5, [e(2, 3), e(3, 4)]).unwrap();
    write_json(&dir.path().join("g.json"), &g).unwrap();
    assert_eq!(read_json::<Graph>(&dir.path().join("g.json")).unwrap(), g);
}

#[test]
fn cohort_percentages_and_table() {
    let a = Graph::with_missing(4, [e(1, 2)]).unwrap();
    let b = Graph::with_missing(4, [e(1, 2), e(3, 4)]).unwrap();
    let c = Graph::saturated(4).unwrap();
    let left = connection_percentages("left", &[a, b, c.clone()]).unwrap();
    let right = connection_percentages("right", &[c]).unwrap();
    let csv = cohort_csv(&[left.clone(), right]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "ordinal,edge_i,edge_j,left,right");
    assert_eq!(lines.len(), 7);
    let first: Vec<f64> = lines[1].split(',').skip(3).map(|v| v.parse().unwrap()).collect();
    assert!((first[0] - 100.0 / 3.0).abs() < 1e-9);
    assert_eq!(first[1], 100.0);
    let frequent = frequent_connections(&left, 100.0);
    assert_eq!(frequent.len(), 4);
    assert!(!frequent.contains(&e(1, 2)) && !frequent.contains(&e(3, 4)));
}

#[test]
fn cohort_refuses_mixed_dimensions() {
    let g4 = Graph::saturated(4).unwrap();
    let g5 = Graph::saturated(5).unwrap();
    assert!(connection_percentages("x", &[g4.clone(), g5.clone()]).is_err());
    let s4 = connection_percentages("a", &[g4]).unwrap();
    let s5 = connection_percentages("b", &[g5]).unwrap();
    assert!(cohort_csv(&[s4, s5]).is_err());
    assert!(SampleMatrix::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
}
