//! Holm maximin-stepdown test over the single-missing-edge hypotheses.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::fit::FitConfig;
use crate::graph::{edge_count, Graph};
use crate::kl::{all_single_edge_statistics, EdgeStatistic, KlContext};
use crate::quantile::holm_levels;
use crate::selection::{SelectionMethod, SelectionResult, TestRecord};
use crate::spectral::SpectralField;

/// Indices of `stats` sorted by ascending statistic, ties by ordinal.
pub fn ascending_order(stats: &[EdgeStatistic]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..stats.len()).collect();
    idx.sort_by(|&a, &b| {
        stats[a]
            .z
            .total_cmp(&stats[b].z)
            .then(stats[a].ordinal.cmp(&stats[b].ordinal))
    });
    idx
}

/// Stepdown over ascending-sorted statistics `z_sorted` with increasing
/// levels `levels` (`levels[i]` pairs with rank `i + 1`). Returns how many
/// of the largest statistics are rejected.
pub fn stepdown_rejections(z_sorted: &[f64], levels: &[f64]) -> usize {
    let l = z_sorted.len();
    let mut rejected = 0;
    for rank in (1..=l).rev() {
        if z_sorted[rank - 1] >= levels[rank - 1] {
            rejected += 1;
        } else {
            break;
        }
    }
    rejected
}

fn validate(stats: &[EdgeStatistic], p: usize) -> Result<()> {
    let l = edge_count(p);
    if stats.len() != l {
        return Err(Error::domain(format!(
            "expected {l} statistics for p={p}, got {}",
            stats.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for s in stats {
        if s.ordinal == 0 || s.ordinal > l {
            return Err(Error::domain(format!("ordinal {} out of range", s.ordinal)));
        }
        if !seen.insert(s.ordinal) {
            return Err(Error::domain(format!("duplicate edge ordinal {}", s.ordinal)));
        }
        if s.z.is_nan() {
            return Err(Error::domain(format!("statistic for {} is NaN", s.edge)));
        }
    }
    Ok(())
}

/// Applies the Holm stepdown at level `alpha` to one statistic per pair.
/// Accepted hypotheses become the missing edges of the estimated graph.
pub fn mht_select(stats: &[EdgeStatistic], p: usize, alpha: f64) -> Result<SelectionResult> {
    validate(stats, p)?;
    let l = stats.len();
    let levels = holm_levels(l, alpha)?;
    let order = ascending_order(stats);
    let z_sorted: Vec<f64> = order.iter().map(|&i| stats[i].z).collect();
    let rejected_count = stepdown_rejections(&z_sorted, &levels);

    let mut records: Vec<TestRecord> = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| TestRecord {
            edge: stats[i].edge,
            ordinal: stats[i].ordinal,
            z: stats[i].z,
            critical: levels[pos],
            rejected: pos >= l - rejected_count,
        })
        .collect();
    records.sort_by_key(|r| r.ordinal);
    let graph = Graph::with_missing(p, records.iter().filter(|r| !r.rejected).map(|r| r.edge))?;
    Ok(SelectionResult {
        method: "mht".into(),
        alpha,
        graph,
        records,
        steps: Vec::new(),
        statistics_computed: l,
    })
}

/// Computes all single-edge statistics, then runs the stepdown.
#[derive(Debug, Clone, Copy, Default)]
pub struct HolmMht;

impl SelectionMethod for HolmMht {
    fn name(&self) -> &'static str {
        "mht"
    }

    fn description(&self) -> &'static str {
        "Holm stepdown over all single-missing-edge statistics"
    }

    fn select(&self, s_hat: &SpectralField, ctx: &KlContext, alpha: f64, _fit: &FitConfig) -> Result<SelectionResult> {
        let stats = all_single_edge_statistics(s_hat, ctx)?;
        mht_select(&stats, s_hat.p(), alpha)
    }
}
