//! Backward stepwise search: starting from the saturated graph, repeatedly
//! test every graph with one more missing pair against the current one and
//! drop the pair with the smallest statistic until all statistics exceed the
//! per-step level.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::{fit_constrained_from, FitConfig};
use crate::graph::{all_edges, edge_count, Edge, Graph};
use crate::kl::{ekl_term, z_from_ekl, KlContext};
use crate::quantile::stepwise_level;
use crate::selection::{SelectionMethod, SelectionResult, StepEntry, StepTable, TestRecord};
use crate::spectral::SpectralField;

/// All steps of a search up to the point where it stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct StepwiseTrace {
    pub p: usize,
    pub steps: Vec<StepTable>,
}

impl StepwiseTrace {
    pub fn statistics_computed(&self) -> usize {
        self.steps.iter().map(|s| s.entries.len()).sum()
    }

    /// Step at which a search at level `alpha` stops: the first step with no
    /// candidates or whose smallest statistic exceeds its level. `alpha = 0`
    /// never stops on a statistic. Returns `None` when the trace ends before
    /// that step is reached.
    pub fn stopping_step(&self, alpha: f64) -> Result<Option<usize>> {
        for step in &self.steps {
            let Some(min) = step.smallest() else {
                return Ok(Some(step.step));
            };
            if alpha > 0.0 && min.z > stepwise_level(step.l_k, alpha)? {
                return Ok(Some(step.step));
            }
        }
        Ok(None)
    }

    /// Missing pairs after stopping at step `k`.
    pub fn missing_at(&self, k: usize) -> Vec<Edge> {
        self.steps[..k].iter().filter_map(|s| s.removed).collect()
    }
}

/// Runs the search. `candidates` restricts which pairs are tested; the rest
/// are treated as having infinite statistics and are never removed.
/// `stop(step, l_k, smallest_z)` decides whether to stop at a step; steps
/// with no candidates always stop.
pub fn stepwise_trace<F>(
    s_hat: &SpectralField,
    ctx: &KlContext,
    fit: &FitConfig,
    candidates: Option<&[Edge]>,
    stop: F,
) -> Result<StepwiseTrace>
where
    F: Fn(usize, usize, f64) -> Result<bool>,
{
    fit.validate()?;
    let p = s_hat.p();
    let n = s_hat.n();
    if s_hat.n() != ctx.n || p != ctx.p {
        return Err(Error::domain("spectral estimate does not match the analysis context"));
    }
    let mut current: Vec<_> = s_hat.half().to_vec();
    let mut missing: Vec<Edge> = Vec::new();
    let mut steps = Vec::new();
    for k in 0..=edge_count(p) {
        let present: Vec<Edge> = all_edges(p).into_iter().filter(|e| !missing.contains(e)).collect();
        let l_k = present.len();
        let tested: Vec<Edge> = match candidates {
            Some(c) => present.iter().copied().filter(|e| c.contains(e)).collect(),
            None => present.clone(),
        };
        let evaluated = tested
            .par_iter()
            .map(|&edge| {
                let mut trial = missing.clone();
                trial.push(edge);
                trial.sort();
                let mut sum = 0.0;
                let mut cycles = 0;
                for j in 1..=n / 2 {
                    let (t, c) = fit_constrained_from(current[j].clone(), &trial, fit)
                        .and_then(|(t, c)| ekl_term(&current[j], &t).map(|v| (v, c)))
                        .map_err(|e| e.at_frequency(j).for_edge(edge).at_step(k))?;
                    sum += t;
                    cycles = cycles.max(c);
                }
                let z = z_from_ekl(sum / n as f64, k, k + 1, ctx)?;
                Ok((
                    StepEntry {
                        edge,
                        ordinal: edge.ordinal(p)?,
                        z,
                    },
                    cycles,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let max_cycles = evaluated.iter().map(|(_, c)| *c).max().unwrap_or(0);
        let mut table = StepTable {
            step: k,
            missing_before: missing.clone(),
            l_k,
            level: None,
            entries: evaluated.into_iter().map(|(e, _)| e).collect(),
            removed: None,
            max_cycles,
        };
        let Some(smallest) = table.smallest().cloned() else {
            steps.push(table);
            break;
        };
        if stop(k, l_k, smallest.z)? {
            steps.push(table);
            break;
        }
        table.removed = Some(smallest.edge);
        steps.push(table);
        missing.push(smallest.edge);
        missing.sort();
        // The DC bin is not used by the divergence and is carried unfitted.
        let next = (1..=n / 2)
            .into_par_iter()
            .map(|j| {
                fit_constrained_from(current[j].clone(), &missing, fit)
                    .map(|(t, _)| t)
                    .map_err(|e| e.at_frequency(j).for_edge(smallest.edge).at_step(k))
            })
            .collect::<Result<Vec<_>>>()?;
        for (j, t) in (1..=n / 2).zip(next) {
            current[j] = t;
        }
    }
    Ok(StepwiseTrace { p, steps })
}

/// Runs the backward search at level `alpha`.
pub fn matsuda_select(s_hat: &SpectralField, ctx: &KlContext, alpha: f64, fit: &FitConfig) -> Result<SelectionResult> {
    matsuda_select_restricted(s_hat, ctx, alpha, fit, None)
}

/// As [`matsuda_select`], testing only `candidates` when given.
pub fn matsuda_select_restricted(
    s_hat: &SpectralField,
    ctx: &KlContext,
    alpha: f64,
    fit: &FitConfig,
    candidates: Option<&[Edge]>,
) -> Result<SelectionResult> {
    // Validates alpha up front.
    stepwise_level(1, alpha)?;
    let mut trace = stepwise_trace(s_hat, ctx, fit, candidates, |_, l_k, z| {
        Ok(z > stepwise_level(l_k, alpha)?)
    })?;
    for step in &mut trace.steps {
        if !step.entries.is_empty() {
            step.level = Some(stepwise_level(step.l_k, alpha)?);
        }
    }
    let p = s_hat.p();
    let mut records = Vec::new();
    for step in &trace.steps {
        let level = step.level.unwrap_or(f64::INFINITY);
        match step.removed {
            Some(removed) => {
                let entry = step
                    .entries
                    .iter()
                    .find(|e| e.edge == removed)
                    .expect("removed edge was tested");
                records.push(TestRecord {
                    edge: removed,
                    ordinal: entry.ordinal,
                    z: entry.z,
                    critical: level,
                    rejected: false,
                });
            }
            None => records.extend(step.entries.iter().map(|e| TestRecord {
                edge: e.edge,
                ordinal: e.ordinal,
                z: e.z,
                critical: level,
                rejected: true,
            })),
        }
    }
    records.sort_by_key(|r| r.ordinal);
    let missing = trace.steps.iter().filter_map(|s| s.removed);
    let graph = Graph::with_missing(p, missing)?;
    Ok(SelectionResult {
        method: "stepwise".into(),
        alpha,
        graph,
        records,
        statistics_computed: trace.statistics_computed(),
        steps: trace.steps,
    })
}

/// Statistics computed by a full (unrestricted) search that stops after
/// removing `k` pairs: `sum_{s=0}^{k} (L - s)`.
pub fn stepwise_statistic_count(p: usize, k: usize) -> usize {
    let l = edge_count(p);
    (k + 1) * l - k * (k + 1) / 2
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MatsudaStepwise;

impl SelectionMethod for MatsudaStepwise {
    fn name(&self) -> &'static str {
        "stepwise"
    }

    fn description(&self) -> &'static str {
        "backward stepwise search with per-step levels"
    }

    fn select(&self, s_hat: &SpectralField, ctx: &KlContext, alpha: f64, fit: &FitConfig) -> Result<SelectionResult> {
        matsuda_select(s_hat, ctx, alpha, fit)
    }
}
