//! Desk-scale experiments: FWER against effective power, timing, type I/II
//! error rates and parallel scaling. Every experiment is fixed by its
//! configuration and base seed; replication `r` draws from
//! [`replication_seed`]`(seed, r)`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitConfig;
use crate::graph::{all_edges, edge_count, Edge};
use crate::kl::{single_edge_statistics, EdgeStatistic, KlContext};
use crate::parallel::with_workers;
use crate::pipeline::estimate;
use crate::quantile::{holm_levels, stepwise_level};
use crate::selection::mht::{ascending_order, stepdown_rejections};
use crate::selection::{stepwise_trace, MethodRegistry, SelectionResult};
use crate::spectral::{SpectralField, WindowRegistry, WindowSpec};
use crate::var::{random_var_model, VarModel};

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent seed for replication `rep` of an experiment seeded `base`.
pub fn replication_seed(base: u64, rep: u64) -> u64 {
    mix(mix(base) ^ rep.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// `0, step, 2 step, …` up to and including `max` (within rounding).
pub fn linear_alpha_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= 0.0) || max >= 1.0 {
        return Err(Error::config(format!("bad grid: max={max}, step={step}")));
    }
    let count = (max / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| i as f64 * step).collect())
}

/// Stepwise grid: `beta` on a linear grid, `alpha = beta^power`. Concentrates
/// points near zero, where the stepwise FWER changes fastest.
pub fn beta_alpha_grid(max_beta: f64, step: f64, power: i32) -> Result<Vec<f64>> {
    Ok(linear_alpha_grid(max_beta, step)?
        .into_iter()
        .map(|b| b.powi(power))
        .collect())
}

/// Missing pairs chosen by the Holm stepdown at each level in `alphas`,
/// from one statistic per pair. `alpha = 0` rejects nothing.
pub fn mht_missing_for_alphas(stats: &[EdgeStatistic], alphas: &[f64]) -> Result<Vec<Vec<Edge>>> {
    let order = ascending_order(stats);
    let z_sorted: Vec<f64> = order.iter().map(|&i| stats[i].z).collect();
    let l = stats.len();
    alphas
        .iter()
        .map(|&alpha| {
            let rejected = if alpha == 0.0 {
                0
            } else {
                stepdown_rejections(&z_sorted, &holm_levels(l, alpha)?)
            };
            let mut missing: Vec<Edge> = order[..l - rejected].iter().map(|&i| stats[i].edge).collect();
            missing.sort();
            Ok(missing)
        })
        .collect()
}

/// Missing pairs chosen by the backward search at each level in `alphas`.
/// One trace is run to the stopping point of the smallest positive level;
/// every larger level stops at or before it. `alpha = 0` never stops, so
/// every tested pair ends up missing.
pub fn stepwise_missing_for_alphas(
    s_hat: &SpectralField,
    ctx: &KlContext,
    fit: &FitConfig,
    candidates: Option<&[Edge]>,
    alphas: &[f64],
) -> Result<Vec<Vec<Edge>>> {
    let tested: Vec<Edge> = match candidates {
        Some(c) => c.to_vec(),
        None => all_edges(s_hat.p()),
    };
    let positive = alphas.iter().copied().filter(|&a| a > 0.0);
    let trace = match positive.clone().reduce(f64::min) {
        Some(a_min) => Some(stepwise_trace(s_hat, ctx, fit, candidates, |_, l_k, z| {
            Ok(z > stepwise_level(l_k, a_min)?)
        })?),
        None => None,
    };
    alphas
        .iter()
        .map(|&alpha| {
            if alpha == 0.0 {
                let mut all = tested.clone();
                all.sort();
                return Ok(all);
            }
            let trace = trace.as_ref().expect("trace exists for positive levels");
            let k = trace
                .stopping_step(alpha)?
                .ok_or_else(|| Error::domain("stepwise trace ended before the stopping step"))?;
            let mut missing = trace.missing_at(k);
            missing.sort();
            Ok(missing)
        })
        .collect()
}

/// Single-pair statistics with pairs outside `restrict` set to `+inf`.
fn restricted_statistics(
    s_hat: &SpectralField,
    ctx: &KlContext,
    restrict: Option<&[Edge]>,
) -> Result<Vec<EdgeStatistic>> {
    let p = s_hat.p();
    let all = all_edges(p);
    let Some(restrict) = restrict else {
        return single_edge_statistics(s_hat, ctx, &all);
    };
    let computed = single_edge_statistics(s_hat, ctx, restrict)?;
    all.into_iter()
        .map(|edge| {
            Ok(computed
                .iter()
                .find(|s| s.edge == edge)
                .cloned()
                .unwrap_or(EdgeStatistic {
                    edge,
                    ordinal: edge.ordinal(p)?,
                    ekl: f64::INFINITY,
                    z: f64::INFINITY,
                }))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerExperiment {
    pub model: VarModel,
    /// Hypotheses that are true: these pairs are missing in the model.
    pub true_nulls: Vec<Edge>,
    /// False hypotheses whose joint rejection defines effective power.
    pub false_nulls: Vec<Edge>,
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    pub seed: u64,
    pub mht_alphas: Vec<f64>,
    pub stepwise_alphas: Vec<f64>,
    /// Evaluate only these pairs; all others count as rejected.
    pub restrict: Option<Vec<Edge>>,
    pub window: WindowSpec,
    pub fit: FitConfig,
}

impl PowerExperiment {
    /// Grids as in the reference study: `alpha` over `[0, 0.5]` in steps of
    /// `0.00125` for the stepdown, `beta` over the same grid with
    /// `alpha = beta^5` for the stepwise search.
    pub fn with_default_grids(
        model: VarModel,
        true_nulls: Vec<Edge>,
        false_nulls: Vec<Edge>,
        n: usize,
        m: usize,
        reps: usize,
        seed: u64,
    ) -> Result<Self> {
        Ok(PowerExperiment {
            model,
            true_nulls,
            false_nulls,
            n,
            m,
            reps,
            seed,
            mht_alphas: linear_alpha_grid(0.5, 0.00125)?,
            stepwise_alphas: beta_alpha_grid(0.5, 0.00125, 5)?,
            restrict: None,
            window: WindowSpec::default(),
            fit: FitConfig::default(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub method: String,
    pub alpha_grid: Vec<f64>,
    pub fwer: Vec<f64>,
    pub effective_power: Vec<f64>,
    pub reps: usize,
}

impl PowerCurve {
    /// Largest effective power over grid points whose FWER does not exceed
    /// `target`.
    pub fn power_at_fwer(&self, target: f64) -> f64 {
        self.fwer
            .iter()
            .zip(&self.effective_power)
            .filter(|(f, _)| **f <= target)
            .map(|(_, p)| *p)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,alpha,fwer,effective_power\n");
        for i in 0..self.alpha_grid.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.method, self.alpha_grid[i], self.fwer[i], self.effective_power[i]
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerComparison {
    pub mht: PowerCurve,
    pub stepwise: PowerCurve,
    /// Per replication and pair (ordinal order), the single-pair statistic.
    pub statistics: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityPoint {
    pub fwer: f64,
    pub mht_power: f64,
    pub stepwise_power: f64,
}

impl PowerComparison {
    /// Powers of both methods at `count` FWER targets spread evenly over
    /// `(0, f]`, where `f` is the largest FWER both curves reach.
    pub fn matched_points(&self, count: usize) -> Vec<ParityPoint> {
        let top = |c: &PowerCurve| c.fwer.iter().copied().fold(0.0, f64::max);
        let overlap = top(&self.mht).min(top(&self.stepwise));
        (1..=count)
            .map(|i| {
                let fwer = overlap * i as f64 / count as f64;
                ParityPoint {
                    fwer,
                    mht_power: self.mht.power_at_fwer(fwer),
                    stepwise_power: self.stepwise.power_at_fwer(fwer),
                }
            })
            .collect()
    }
}

struct RepOutcome {
    mht: Vec<(bool, bool)>,
    stepwise: Vec<(bool, bool)>,
    z: Vec<f64>,
}

fn outcome(missing: &[Edge], true_nulls: &[Edge], false_nulls: &[Edge]) -> (bool, bool) {
    let false_rejection = true_nulls.iter().any(|e| !missing.contains(e));
    let all_false_rejected = false_nulls.iter().all(|e| !missing.contains(e));
    (false_rejection, all_false_rejected)
}

fn curve(method: &str, alphas: &[f64], outcomes: &[Vec<(bool, bool)>]) -> PowerCurve {
    let reps = outcomes.len();
    let rate = |pick: fn(&(bool, bool)) -> bool, i: usize| {
        outcomes.iter().filter(|o| pick(&o[i])).count() as f64 / reps as f64
    };
    PowerCurve {
        method: method.into(),
        alpha_grid: alphas.to_vec(),
        fwer: (0..alphas.len()).map(|i| rate(|o| o.0, i)).collect(),
        effective_power: (0..alphas.len()).map(|i| rate(|o| o.1, i)).collect(),
        reps,
    }
}

/// Runs both methods on every replication at every grid level.
pub fn fwer_power_experiment(cfg: &PowerExperiment) -> Result<PowerComparison> {
    if cfg.reps < 1 {
        return Err(Error::config("need at least one replication"));
    }
    if !cfg.model.is_stationary() {
        return Err(Error::NonStationary {
            max_modulus: cfg.model.spectral_radius(),
        });
    }
    cfg.fit.validate()?;
    let windows = WindowRegistry::default();
    let restrict = cfg.restrict.as_deref();
    let outcomes = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let x = cfg
                .model
                .simulate(cfg.n, replication_seed(cfg.seed, rep as u64), None)?;
            let est = estimate(&x, cfg.m, &cfg.window, true, &windows)?;
            let stats = restricted_statistics(&est.field, &est.ctx, restrict)?;
            let mht = mht_missing_for_alphas(&stats, &cfg.mht_alphas)?
                .iter()
                .map(|m| outcome(m, &cfg.true_nulls, &cfg.false_nulls))
                .collect();
            let stepwise = stepwise_missing_for_alphas(&est.field, &est.ctx, &cfg.fit, restrict, &cfg.stepwise_alphas)?
                .iter()
                .map(|m| outcome(m, &cfg.true_nulls, &cfg.false_nulls))
                .collect();
            Ok(RepOutcome {
                mht,
                stepwise,
                z: stats.iter().map(|s| s.z).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mht: Vec<_> = outcomes.iter().map(|o| o.mht.clone()).collect();
    let stepwise: Vec<_> = outcomes.iter().map(|o| o.stepwise.clone()).collect();
    Ok(PowerComparison {
        mht: curve("mht", &cfg.mht_alphas, &mht),
        stepwise: curve("stepwise", &cfg.stepwise_alphas, &stepwise),
        statistics: outcomes.into_iter().map(|o| o.z).collect(),
    })
}

/// Replicated single-pair statistics for a model, one row per replication in
/// ordinal order.
pub fn replicate_statistics(
    model: &VarModel,
    n: usize,
    m: usize,
    reps: usize,
    seed: u64,
    window: &WindowSpec,
) -> Result<Vec<Vec<f64>>> {
    let windows = WindowRegistry::default();
    (0..reps)
        .into_par_iter()
        .map(|rep| {
            let x = model.simulate(n, replication_seed(seed, rep as u64), None)?;
            let est = estimate(&x, m, window, true, &windows)?;
            Ok(restricted_statistics(&est.field, &est.ctx, None)?
                .iter()
                .map(|s| s.z)
                .collect())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub p: usize,
    pub seconds: f64,
    pub statistics_computed: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingExperiment {
    pub p_list: Vec<usize>,
    pub n: usize,
    pub m: usize,
    pub method: String,
    /// Sparsity modulus of the random models.
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
    pub window: WindowSpec,
    pub fit: FitConfig,
}

/// Wall-clock of one full selection per dimension; simulation and smoothing
/// are excluded from the timing.
pub fn timing_experiment(cfg: &TimingExperiment) -> Result<Vec<TimingRow>> {
    let method = MethodRegistry::default().get(&cfg.method)?;
    let windows = WindowRegistry::default();
    cfg.p_list
        .iter()
        .map(|&p| {
            let seed = replication_seed(cfg.seed, p as u64);
            let model = random_var_model(p, cfg.k, seed)?;
            let x = model.simulate(cfg.n, replication_seed(seed, 1), None)?;
            let est = estimate(&x, cfg.m, &cfg.window, true, &windows)?;
            let start = Instant::now();
            let result = method.select(&est.field, &est.ctx, cfg.alpha, &cfg.fit)?;
            let seconds = start.elapsed().as_secs_f64();
            log::info!("p={p}: {seconds:.3}s, {} statistics", result.statistics_computed);
            Ok(TimingRow {
                p,
                seconds,
                statistics_computed: result.statistics_computed,
                missing: result.graph.missing_count(),
            })
        })
        .collect()
}

/// Least-squares slope of `log seconds` on `log p`.
pub fn log_log_slope(rows: &[TimingRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.p as f64).ln(), r.seconds.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Percentages for one replication. `type1_pct`: missing pairs kept as
/// edges, over the number missing. `type2_pct`: present pairs deleted, over
/// the number present. `None` when the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub type1_pct: Option<f64>,
    pub type2_pct: Option<f64>,
}

pub fn error_rates(p: usize, truth_missing: &[Edge], estimated_missing: &[Edge]) -> ErrorRates {
    let missing = truth_missing.len();
    let present = edge_count(p) - missing;
    let kept = truth_missing.iter().filter(|e| !estimated_missing.contains(e)).count();
    let deleted = estimated_missing.iter().filter(|e| !truth_missing.contains(e)).count();
    ErrorRates {
        type1_pct: (missing > 0).then(|| 100.0 * kept as f64 / missing as f64),
        type2_pct: (present > 0).then(|| 100.0 * deleted as f64 / present as f64),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorRateExperiment {
    pub p_list: Vec<usize>,
    pub alphas: Vec<f64>,
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    pub k: usize,
    pub method: String,
    pub seed: u64,
    pub window: WindowSpec,
    pub fit: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRateRow {
    pub p: usize,
    pub alpha: f64,
    /// Mean over replications where the rate is defined.
    pub type1_pct: Option<f64>,
    pub type2_pct: Option<f64>,
    pub reps: usize,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Average error percentages against each random model's true graph. Each
/// replication draws a fresh model and sample.
pub fn error_rate_experiment(cfg: &ErrorRateExperiment) -> Result<Vec<ErrorRateRow>> {
    let method = MethodRegistry::default().get(&cfg.method)?;
    let windows = WindowRegistry::default();
    let mut rows = Vec::new();
    for &p in &cfg.p_list {
        let per_rep = (0..cfg.reps)
            .into_par_iter()
            .map(|rep| {
                let seed = replication_seed(replication_seed(cfg.seed, p as u64), rep as u64);
                let model = random_var_model(p, cfg.k, seed)?;
                let truth = model.true_missing_edges(cfg.n)?;
                let x = model.simulate(cfg.n, replication_seed(seed, 1), None)?;
                let est = estimate(&x, cfg.m, &cfg.window, true, &windows)?;
                let chosen = match method.name() {
                    "mht" => mht_missing_for_alphas(&restricted_statistics(&est.field, &est.ctx, None)?, &cfg.alphas)?,
                    "stepwise" => stepwise_missing_for_alphas(&est.field, &est.ctx, &cfg.fit, None, &cfg.alphas)?,
                    other => cfg
                        .alphas
                        .iter()
                        .map(|&a| {
                            let r = MethodRegistry::default()
                                .get(other)?
                                .select(&est.field, &est.ctx, a, &cfg.fit)?;
                            Ok(r.graph.missing().iter().copied().collect())
                        })
                        .collect::<Result<Vec<Vec<Edge>>>>()?,
                };
                Ok(chosen.iter().map(|m| error_rates(p, &truth, m)).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, &alpha) in cfg.alphas.iter().enumerate() {
            rows.push(ErrorRateRow {
                p,
                alpha,
                type1_pct: mean_defined(per_rep.iter().map(|r| r[i].type1_pct)),
                type2_pct: mean_defined(per_rep.iter().map(|r| r[i].type2_pct)),
                reps: cfg.reps,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub workers: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingResult {
    pub p: usize,
    pub rows: Vec<ScalingRow>,
    /// Same graph at every worker count and statistics within `1e-10`.
    pub identical: bool,
    pub max_z_difference: f64,
}

impl ScalingResult {
    /// `seconds(1 worker) / seconds(w workers)`.
    pub fn speedup(&self, workers: usize) -> Option<f64> {
        let base = self.rows.iter().find(|r| r.workers == 1)?.seconds;
        let other = self.rows.iter().find(|r| r.workers == workers)?.seconds;
        Some(base / other)
    }

    /// Slope of seconds against `1 / workers`.
    pub fn reciprocal_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|r| (1.0 / r.workers as f64, r.seconds)).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingExperiment {
    pub p: usize,
    pub n: usize,
    pub m: usize,
    pub workers: Vec<usize>,
    pub k: usize,
    pub method: String,
    pub alpha: f64,
    pub seed: u64,
    pub window: WindowSpec,
    pub fit: FitConfig,
}

/// Largest statistic difference between two results on the same pairs, or
/// `None` if the graphs or pair lists differ.
pub fn result_difference(a: &SelectionResult, b: &SelectionResult) -> Option<f64> {
    if a.graph != b.graph || a.records.len() != b.records.len() {
        return None;
    }
    let mut worst: f64 = 0.0;
    for (x, y) in a.records.iter().zip(&b.records) {
        if x.edge != y.edge || x.rejected != y.rejected {
            return None;
        }
        if x.z != y.z {
            worst = worst.max((x.z - y.z).abs());
        }
    }
    Some(worst)
}

/// Times one selection on a fixed random problem at each worker count and
/// checks the results agree.
pub fn parallel_scaling_experiment(cfg: &ScalingExperiment) -> Result<ScalingResult> {
    let method = MethodRegistry::default().get(&cfg.method)?;
    let model = random_var_model(cfg.p, cfg.k, cfg.seed)?;
    let x = model.simulate(cfg.n, replication_seed(cfg.seed, 1), None)?;
    let est = estimate(&x, cfg.m, &cfg.window, true, &WindowRegistry::default())?;
    let mut rows = Vec::new();
    let mut reference: Option<SelectionResult> = None;
    let mut identical = true;
    let mut max_diff: f64 = 0.0;
    for &w in &cfg.workers {
        let (result, seconds) = with_workers(Some(w), || {
            let start = Instant::now();
            let r = method.select(&est.field, &est.ctx, cfg.alpha, &cfg.fit);
            (r, start.elapsed().as_secs_f64())
        })?;
        let result = result?;
        match &reference {
            None => reference = Some(result),
            Some(r0) => match result_difference(r0, &result) {
                Some(d) => {
                    max_diff = max_diff.max(d);
                    identical &= d <= 1e-10;
                }
                None => identical = false,
            },
        }
        rows.push(ScalingRow { workers: w, seconds });
    }
    Ok(ScalingResult {
        p: cfg.p,
        rows,
        identical,
        max_z_difference: max_diff,
    })
}
