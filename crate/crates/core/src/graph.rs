//! Undirected simple graphs on `p` labelled vertices.
//!
//! A [`Graph`] is stored by its *missing* edges: every unordered pair that is
//! not listed is present. Vertices are 1-based throughout the public API, and
//! unordered pairs are enumerated row-major, `(1,2), (1,3), …, (1,p), (2,3),
//! …, (p-1,p)`, which gives each pair an ordinal in `1..=p(p-1)/2`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Unordered vertex pair `(j, k)` with `1 <= j < k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct Edge {
    j: usize,
    k: usize,
}

impl Edge {
    /// Builds the pair, normalising the order. Loops and vertex 0 are rejected.
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::domain(format!("vertices are 1-based, got ({a},{b})")));
        }
        if a == b {
            return Err(Error::domain(format!("loop ({a},{a}) is not an edge")));
        }
        Ok(Edge {
            j: a.min(b),
            k: a.max(b),
        })
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Zero-based matrix indices.
    pub fn indices(&self) -> (usize, usize) {
        (self.j - 1, self.k - 1)
    }

    /// Ordinal of this pair among the `p(p-1)/2` pairs.
    pub fn ordinal(&self, p: usize) -> Result<usize> {
        pair_to_edge_index(self.j, self.k, p)
    }
}

impl TryFrom<[usize; 2]> for Edge {
    type Error = Error;

    fn try_from(v: [usize; 2]) -> Result<Self> {
        Edge::new(v[0], v[1])
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.j, e.k]
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

/// Number of unordered pairs on `p` vertices.
pub fn edge_count(p: usize) -> usize {
    p * p.saturating_sub(1) / 2
}

/// Maps ordinal `i` (1-based) to its pair.
pub fn edge_index_to_pair(i: usize, p: usize) -> Result<Edge> {
    let total = edge_count(p);
    if p < 2 || i == 0 || i > total {
        return Err(Error::domain(format!("edge ordinal {i} outside 1..={total} for p={p}")));
    }
    let mut remaining = i;
    for j in 1..p {
        let row = p - j;
        if remaining <= row {
            return Edge::new(j, j + remaining);
        }
        remaining -= row;
    }
    unreachable!("ordinal bounds were checked")
}

/// Inverse of [`edge_index_to_pair`].
pub fn pair_to_edge_index(j: usize, k: usize, p: usize) -> Result<usize> {
    let e = Edge::new(j, k)?;
    if e.k > p {
        return Err(Error::domain(format!("pair {e} exceeds p={p}")));
    }
    Ok((e.j - 1) * (2 * p - e.j) / 2 + (e.k - e.j))
}

/// All pairs in ordinal order.
pub fn all_edges(p: usize) -> Vec<Edge> {
    let mut out = Vec::with_capacity(edge_count(p));
    for j in 1..p {
        for k in (j + 1)..=p {
            out.push(Edge { j, k });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    p: usize,
    missing: BTreeSet<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    p: usize,
    missing: Vec<Edge>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        Graph::with_missing(r.p, r.missing)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            p: g.p,
            missing: g.missing.into_iter().collect(),
        }
    }
}

impl Graph {
    /// The saturated graph: every pair present.
    pub fn saturated(p: usize) -> Result<Self> {
        Self::with_missing(p, std::iter::empty())
    }

    /// The empty graph: every pair missing.
    pub fn empty(p: usize) -> Result<Self> {
        Self::with_missing(p, all_edges(p))
    }

    pub fn with_missing(p: usize, missing: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if p < 2 {
            return Err(Error::domain(format!("graph needs p >= 2, got {p}")));
        }
        let missing: BTreeSet<Edge> = missing.into_iter().collect();
        if let Some(e) = missing.iter().find(|e| e.k > p) {
            return Err(Error::domain(format!("missing pair {e} exceeds p={p}")));
        }
        Ok(Graph { p, missing })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn missing(&self) -> &BTreeSet<Edge> {
        &self.missing
    }

    pub fn missing_count(&self) -> usize {
        self.missing.len()
    }

    pub fn is_saturated(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn has_edge(&self, e: &Edge) -> bool {
        e.k <= self.p && !self.missing.contains(e)
    }

    /// Present edges in ordinal order.
    pub fn present(&self) -> Vec<Edge> {
        all_edges(self.p)
            .into_iter()
            .filter(|e| !self.missing.contains(e))
            .collect()
    }

    /// Copy of this graph with one more pair removed.
    pub fn without(&self, e: Edge) -> Result<Self> {
        if e.k > self.p {
            return Err(Error::domain(format!("pair {e} exceeds p={}", self.p)));
        }
        let mut g = self.clone();
        g.missing.insert(e);
        Ok(g)
    }

    /// Graphviz rendering of the present edges.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for v in 1..=self.p {
            s.push_str(&format!("  {v};\n"));
        }
        for e in self.present() {
            s.push_str(&format!("  {} -- {};\n", e.j, e.k));
        }
        s.push_str("}\n");
        s
    }
}

/// The `p(p-1)/2` graphs with exactly one missing pair, in ordinal order.
pub fn single_missing_graphs(p: usize) -> Result<Vec<Graph>> {
    if p < 2 {
        return Err(Error::domain(format!("need p >= 2, got {p}")));
    }
    all_edges(p).into_iter().map(|e| Graph::with_missing(p, [e])).collect()
}

/// Whether every missing pair of `candidate` has an inverse-spectrum entry
/// no larger than `tol` in magnitude across the whole frequency grid.
pub fn is_correct_for(candidate: &Graph, inverse_spectrum: &SpectralField, tol: f64) -> Result<bool> {
    if inverse_spectrum.p() != candidate.p {
        return Err(Error::domain(format!(
            "inverse spectrum has p={}, candidate has p={}",
            inverse_spectrum.p(),
            candidate.p
        )));
    }
    if !(tol >= 0.0) {
        return Err(Error::domain(format!("tolerance must be >= 0, got {tol}")));
    }
    for e in &candidate.missing {
        let (a, b) = e.indices();
        let worst = inverse_spectrum
            .half()
            .iter()
            .map(|m| m[(a, b)].norm())
            .fold(0.0_f64, f64::max);
        if worst > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
