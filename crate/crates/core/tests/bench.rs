use pcgraph::bench::*;
use pcgraph::graph::{all_edges, Edge};
use pcgraph::kl::EdgeStatistic;

#[test]
fn seeds_are_distinct_and_stable() {
    let seeds: Vec<u64> = (0..1000).map(|r| replication_seed(42, r)).collect();
    let mut sorted = seeds.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), 1000);
    assert_eq!(replication_seed(42, 7), seeds[7]);
    assert_ne!(replication_seed(43, 7), seeds[7]);
}

#[test]
fn grids() {
    let g = linear_alpha_grid(0.5, 0.00125).unwrap();
    assert_eq!(g.len(), 401);
    assert_eq!(g[0], 0.0);
    assert!((g[400] - 0.5).abs() < 1e-12);
    let b = beta_alpha_grid(0.5, 0.00125, 5).unwrap();
    assert!((b[400] - 0.03125).abs() < 1e-12);
    assert!(b.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn error_rate_definitions() {
    let e = |j, k| Edge::new(j, k).unwrap();
    let truth = [e(2, 3), e(2, 5)];
    assert_eq!(
        error_rates(5, &truth, &truth),
        ErrorRates {
            type1_pct: Some(0.0),
            type2_pct: Some(0.0)
        }
    );
    let r = error_rates(5, &truth, &[e(2, 3), e(1, 2)]);
    assert_eq!(r.type1_pct, Some(50.0));
    assert_eq!(r.type2_pct, Some(12.5));
    assert_eq!(error_rates(3, &[], &[]).type1_pct, None);
}

fn stats(z: &[f64]) -> Vec<EdgeStatistic> {
    all_edges(5)
        .into_iter()
        .zip(z)
        .enumerate()
        .map(|(i, (edge, &z))| EdgeStatistic {
            edge,
            ordinal: i + 1,
            ekl: 0.0,
            z,
        })
        .collect()
}

#[test]
fn mht_grid_matches_single_runs() {
    let z = [53.71, 12.72, 22.25, 67.92, 0.54, 18.16, 1.89, 0.21, 5.86, 73.17];
    let alphas = [0.0, 0.001, 0.05, 0.3];
    let grid = mht_missing_for_alphas(&stats(&z), &alphas).unwrap();
    assert_eq!(grid[0].len(), 10);
    for (a, missing) in alphas.iter().zip(&grid).skip(1) {
        let single = pcgraph::selection::mht_select(&stats(&z), 5, *a).unwrap();
        let expected: Vec<Edge> = single.graph.missing().iter().copied().collect();
        assert_eq!(missing, &expected);
    }
}

#[test]
fn power_curve_lookup() {
    let c = PowerCurve {
        method: "mht".into(),
        alpha_grid: vec![0.0, 0.1, 0.2],
        fwer: vec![0.0, 0.04, 0.09],
        effective_power: vec![0.0, 0.6, 0.8],
        reps: 100,
    };
    assert_eq!(c.power_at_fwer(0.05), 0.6);
    assert_eq!(c.power_at_fwer(0.01), 0.0);
    assert_eq!(c.power_at_fwer(1.0), 0.8);
}
