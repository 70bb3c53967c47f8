//! Per-group connection percentages over many subjects' estimated graphs.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{all_edges, Edge, Graph};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub name: String,
    pub p: usize,
    pub subjects: usize,
    /// Percentage of subjects with each connection present, by ordinal.
    pub percentages: Vec<f64>,
}

pub fn connection_percentages(name: &str, graphs: &[Graph]) -> Result<GroupSummary> {
    let first = graphs
        .first()
        .ok_or_else(|| Error::config(format!("group '{name}' has no subjects")))?;
    let p = first.p();
    if let Some(g) = graphs.iter().find(|g| g.p() != p) {
        return Err(Error::config(format!(
            "group '{name}' mixes channel counts {p} and {}",
            g.p()
        )));
    }
    let percentages = all_edges(p)
        .iter()
        .map(|e| {
            let present = graphs.iter().filter(|g| g.has_edge(e)).count();
            100.0 * present as f64 / graphs.len() as f64
        })
        .collect();
    Ok(GroupSummary {
        name: name.to_string(),
        p,
        subjects: graphs.len(),
        percentages,
    })
}

/// CSV with columns `ordinal,edge_i,edge_j` and one percentage column per
/// group. All groups must share `p`.
pub fn cohort_csv(groups: &[GroupSummary]) -> Result<String> {
    let p = groups.first().ok_or_else(|| Error::config("no groups"))?.p;
    if let Some(g) = groups.iter().find(|g| g.p != p) {
        return Err(Error::config(format!("group '{}' has p={}, expected {p}", g.name, g.p)));
    }
    let mut out = String::from("ordinal,edge_i,edge_j");
    for g in groups {
        let _ = write!(out, ",{}", g.name);
    }
    out.push('\n');
    for (i, e) in all_edges(p).iter().enumerate() {
        let _ = write!(out, "{},{},{}", i + 1, e.j(), e.k());
        for g in groups {
            let _ = write!(out, ",{}", g.percentages[i]);
        }
        out.push('\n');
    }
    Ok(out)
}

/// Edges present in at least `threshold` percent of a group.
pub fn frequent_connections(group: &GroupSummary, threshold: f64) -> Vec<Edge> {
    all_edges(group.p)
        .into_iter()
        .zip(&group.percentages)
        .filter(|(_, &pct)| pct >= threshold)
        .map(|(e, _)| e)
        .collect()
}
