//! Graph selection procedures behind a common trait, looked up by name.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitConfig;
use crate::graph::{Edge, Graph};
use crate::kl::KlContext;
use crate::spectral::SpectralField;

pub mod mht;
pub mod stepwise;

pub use mht::{mht_select, HolmMht};
pub use stepwise::{matsuda_select, stepwise_trace, MatsudaStepwise, StepwiseTrace};

/// Outcome of one hypothesis `H: pair is missing`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub edge: Edge,
    pub ordinal: usize,
    pub z: f64,
    pub critical: f64,
    /// `true` when the hypothesis was rejected, i.e. the edge is kept.
    pub rejected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub edge: Edge,
    pub ordinal: usize,
    pub z: f64,
}

/// One step of the backward search: every candidate graph with one more
/// missing pair and its statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTable {
    pub step: usize,
    pub missing_before: Vec<Edge>,
    /// Number of present pairs at this step.
    pub l_k: usize,
    pub level: Option<f64>,
    pub entries: Vec<StepEntry>,
    pub removed: Option<Edge>,
    /// Largest per-frequency cycle count among this step's fits.
    pub max_cycles: usize,
}

impl StepTable {
    /// Entry with the smallest statistic, ties broken by ordinal.
    pub fn smallest(&self) -> Option<&StepEntry> {
        self.entries
            .iter()
            .min_by(|a, b| a.z.total_cmp(&b.z).then(a.ordinal.cmp(&b.ordinal)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: String,
    pub alpha: f64,
    pub graph: Graph,
    /// Ordered by edge ordinal.
    pub records: Vec<TestRecord>,
    pub steps: Vec<StepTable>,
    pub statistics_computed: usize,
}

impl SelectionResult {
    /// Plain-text table: one row per hypothesis sorted by decreasing
    /// statistic, followed by per-step tables for the stepwise search.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let mut rows: Vec<&TestRecord> = self.records.iter().collect();
        rows.sort_by(|a, b| b.z.total_cmp(&a.z).then(b.ordinal.cmp(&a.ordinal)));
        let _ = writeln!(out, "method: {}  alpha: {}", self.method, self.alpha);
        let _ = writeln!(
            out,
            "{:>4}  {:>8}  {:>10}  {:>8}  {}",
            "rank", "edge", "Z", "C", "decision"
        );
        let total = rows.len();
        for (pos, r) in rows.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>4}  {:>8}  {:>10.2}  {:>8.2}  {}",
                total - pos,
                r.edge.to_string(),
                r.z,
                r.critical,
                if r.rejected { "present" } else { "missing" }
            );
        }
        for step in &self.steps {
            let _ = writeln!(
                out,
                "step k={}  L_k={}  C_k={}  removed={}",
                step.step,
                step.l_k,
                step.level.map_or("-".to_string(), |c| format!("{c:.2}")),
                step.removed.map_or("-".to_string(), |e| e.to_string())
            );
            for e in &step.entries {
                let _ = writeln!(out, "    {:>8}  {:>10.2}", e.edge.to_string(), e.z);
            }
        }
        let missing: Vec<String> = self.graph.missing().iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "missing edges: {{{}}}", missing.join(","));
        let _ = writeln!(out, "statistics computed: {}", self.statistics_computed);
        out
    }

    /// CSV with columns `edge_i,edge_j,Z`, ordered by ordinal.
    pub fn statistics_csv(&self) -> String {
        let mut out = String::from("edge_i,edge_j,Z\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{}", r.edge.j(), r.edge.k(), r.z);
        }
        out
    }
}

/// A graph selection procedure driven by the smoothed spectral estimate.
pub trait SelectionMethod: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    fn select(&self, s_hat: &SpectralField, ctx: &KlContext, alpha: f64, fit: &FitConfig) -> Result<SelectionResult>;
}

/// Selection methods by name, with aliases.
#[derive(Clone)]
pub struct MethodRegistry {
    methods: BTreeMap<String, Arc<dyn SelectionMethod>>,
    aliases: BTreeMap<String, String>,
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut r = MethodRegistry {
            methods: BTreeMap::new(),
            aliases: BTreeMap::new(),
        };
        r.register(Arc::new(HolmMht));
        r.register(Arc::new(MatsudaStepwise));
        r.alias("holm", "mht");
        r.alias("matsuda", "stepwise");
        r
    }
}

impl MethodRegistry {
    pub fn register(&mut self, method: Arc<dyn SelectionMethod>) {
        self.methods.insert(method.name().to_string(), method);
    }

    pub fn alias(&mut self, alias: &str, target: &str) {
        self.aliases.insert(alias.to_string(), target.to_string());
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SelectionMethod>> {
        let key = self.aliases.get(name).map(String::as_str).unwrap_or(name);
        self.methods.get(key).cloned().ok_or_else(|| {
            Error::config(format!(
                "unknown selection method '{name}' (known: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.methods.keys().cloned().collect()
    }
}
