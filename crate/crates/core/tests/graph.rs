use pcgraph::graph::*;

#[test]
fn ordinals_follow_hypothesis_listing() {
    assert_eq!(edge_index_to_pair(1, 5).unwrap(), Edge::new(1, 2).unwrap());
    assert_eq!(edge_index_to_pair(4, 5).unwrap(), Edge::new(1, 5).unwrap());
    assert_eq!(edge_index_to_pair(5, 5).unwrap(), Edge::new(2, 3).unwrap());
    assert_eq!(edge_index_to_pair(10, 5).unwrap(), Edge::new(4, 5).unwrap());
    assert_eq!(edge_index_to_pair(1, 2).unwrap(), Edge::new(1, 2).unwrap());
}

#[test]
fn ordinal_out_of_range() {
    assert!(edge_index_to_pair(0, 5).is_err());
    assert!(edge_index_to_pair(11, 5).is_err());
    assert!(edge_index_to_pair(1, 1).is_err());
}

#[test]
fn ordinal_round_trip_exhaustive() {
    for p in 2..=12 {
        let edges = all_edges(p);
        assert_eq!(edges.len(), edge_count(p));
        for i in 1..=edge_count(p) {
            let e = edge_index_to_pair(i, p).unwrap();
            assert_eq!(e, edges[i - 1]);
            assert_eq!(pair_to_edge_index(e.j(), e.k(), p).unwrap(), i);
        }
    }
}

#[test]
fn edges_are_canonical() {
    let e = Edge::new(4, 2).unwrap();
    assert_eq!((e.j(), e.k()), (2, 4));
    assert!(Edge::new(3, 3).is_err());
    assert!(Edge::new(0, 3).is_err());
}

#[test]
fn single_missing_counts() {
    assert_eq!(single_missing_graphs(5).unwrap().len(), 10);
    assert_eq!(single_missing_graphs(2).unwrap().len(), 1);
    let three = single_missing_graphs(3).unwrap();
    assert_eq!(three.len(), 3);
    for (i, g) in three.iter().enumerate() {
        assert_eq!(g.present().len(), 2);
        assert_eq!(
            g.missing().iter().next().copied().unwrap(),
            edge_index_to_pair(i + 1, 3).unwrap()
        );
    }
}

#[test]
fn json_shape() {
    let g = Graph::with_missing(5, [Edge::new(3, 2).unwrap(), Edge::new(2, 5).unwrap()]).unwrap();
    let s = serde_json::to_string(&g).unwrap();
    assert_eq!(s, r#"{"p":5,"missing":[[2,3],[2,5]]}"#);
    let back: Graph = serde_json::from_str(&s).unwrap();
    assert_eq!(back, g);
    assert!(serde_json::from_str::<Graph>(r#"{"p":3,"missing":[[1,4]]}"#).is_err());
    assert!(serde_json::from_str::<Graph>(r#"{"p":3,"missing":[[2,2]]}"#).is_err());
}

#[test]
fn dot_lists_present_edges_only() {
    let g = Graph::with_missing(3, [Edge::new(1, 3).unwrap()]).unwrap();
    let dot = g.to_dot();
    assert!(dot.contains("1 -- 2;"));
    assert!(dot.contains("2 -- 3;"));
    assert!(!dot.contains("1 -- 3;"));
}

#[test]
fn saturated_and_empty() {
    assert!(Graph::saturated(4).unwrap().is_saturated());
    assert_eq!(Graph::empty(4).unwrap().missing_count(), 6);
    assert!(Graph::saturated(1).is_err());
}
