//! Sample to estimated graph: smoothing, statistic context, selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitConfig;
use crate::kl::KlContext;
use crate::sample::SampleMatrix;
use crate::selection::{MethodRegistry, SelectionResult};
use crate::spectral::{periodogram_with, smooth, SpectralField, WindowRegistry, WindowSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Smoothing half-width; `None` means `N/32`.
    pub m: Option<usize>,
    pub window: WindowSpec,
    pub alpha: f64,
    pub method: String,
    pub fit: FitConfig,
    /// Subtract channel means before the periodogram.
    pub demean: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            m: None,
            window: WindowSpec::default(),
            alpha: 0.05,
            method: "mht".into(),
            fit: FitConfig::default(),
            demean: true,
        }
    }
}

/// `N/32`, at least one.
pub fn default_m(n: usize) -> usize {
    (n / 32).max(1)
}

impl PipelineConfig {
    pub fn resolve_m(&self, n: usize) -> usize {
        self.m.unwrap_or_else(|| default_m(n))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if self.m == Some(0) {
            return Err(Error::config("M must be >= 1"));
        }
        self.fit.validate()
    }
}

/// Smoothed estimate with the matching statistic context.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub field: SpectralField,
    pub ctx: KlContext,
}

/// Smoothed periodogram of `x`. Refuses `2M+1 < p`, and windows with fewer
/// than `p` non-zero weights, where every smoothed matrix is singular.
pub fn estimate(
    x: &SampleMatrix,
    m: usize,
    window: &WindowSpec,
    demean: bool,
    windows: &WindowRegistry,
) -> Result<Estimate> {
    let p = x.p();
    if m < 1 {
        return Err(Error::config("M must be >= 1"));
    }
    if 2 * m + 1 < p {
        return Err(Error::config(format!(
            "2M+1 = {} is below p = {}: the smoothed spectral estimate would be singular at every frequency",
            2 * m + 1,
            p
        )));
    }
    let constants = window.resolve_constants(windows)?;
    let weights = window.weights(m, windows)?;
    if weights.effective_support() < p {
        return Err(Error::config(format!(
            "the {} window with M = {m} has {} non-zero weights, below p = {p}: the smoothed spectral estimate would be singular",
            window.shape,
            weights.effective_support()
        )));
    }
    let field = smooth(&periodogram_with(x, demean), &weights)?.field;
    let ctx = KlContext::new(x.n(), m, p, constants)?;
    Ok(Estimate { field, ctx })
}

/// Full run with the default registries.
pub fn run_selection(x: &SampleMatrix, cfg: &PipelineConfig) -> Result<SelectionResult> {
    run_selection_with(x, cfg, &MethodRegistry::default(), &WindowRegistry::default())
}

pub fn run_selection_with(
    x: &SampleMatrix,
    cfg: &PipelineConfig,
    methods: &MethodRegistry,
    windows: &WindowRegistry,
) -> Result<SelectionResult> {
    cfg.validate()?;
    let method = methods.get(&cfg.method)?;
    let est = estimate(x, cfg.resolve_m(x.n()), &cfg.window, cfg.demean, windows)?;
    method.select(&est.field, &est.ctx, cfg.alpha, &cfg.fit)
}
