//! Estimated Kullback-Leibler divergence between fitted spectral fields and
//! the standardised test statistic built from it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{all_edges, Edge};
use crate::linalg::{self, CMatrix};
use crate::spectral::{SpectralField, WindowConstants};

/// Sample size, smoothing half-width and window constants for one analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlContext {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub constants: WindowConstants,
}

impl KlContext {
    pub fn new(n: usize, m: usize, p: usize, constants: WindowConstants) -> Result<Self> {
        if n == 0 || n % 2 != 0 {
            return Err(Error::domain(format!("N must be even and positive, got {n}")));
        }
        if m < 1 {
            return Err(Error::domain("M must be >= 1"));
        }
        if !(constants.d_u > 0.0) {
            return Err(Error::domain("D_u must be positive"));
        }
        Ok(KlContext { n, m, p, constants })
    }

    fn check_field(&self, f: &SpectralField) -> Result<()> {
        if f.n() != self.n || f.p() != self.p {
            return Err(Error::domain(format!(
                "field is p={}, N={} but context is p={}, N={}",
                f.p(),
                f.n(),
                self.p,
                self.n
            )));
        }
        Ok(())
    }
}

/// `tr(T1 T2^{-1}) - log det(T1 T2^{-1}) - p` at a single frequency, using
/// Cholesky factors of both matrices.
pub fn ekl_term(t1: &CMatrix, t2: &CMatrix) -> Result<f64> {
    let p = t1.nrows();
    let c1 = linalg::hermitian_cholesky(t1)?;
    let c2 = linalg::hermitian_cholesky(t2)?;
    let trace = c2.solve(t1).trace().re;
    let logdet = linalg::cholesky_logdet(&c1) - linalg::cholesky_logdet(&c2);
    Ok(trace - logdet - p as f64)
}

/// `(1/N) sum_{j=1}^{N/2} [tr(T1 T2^{-1}) - log det(T1 T2^{-1}) - p]`.
pub fn ekl(t1: &SpectralField, t2: &SpectralField) -> Result<f64> {
    if t1.p() != t2.p() || t1.n() != t2.n() {
        return Err(Error::domain("fields differ in dimension or grid size"));
    }
    let n = t1.n();
    let terms = (1..=n / 2)
        .into_par_iter()
        .map(|j| ekl_term(&t1.half()[j], &t2.half()[j]).map_err(|e| e.at_frequency(j)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().sum::<f64>() / n as f64)
}

/// Standardised divergence
/// `sqrt(2MN / (D_u dm)) * (eKL - C_u dm / (2M))` with `dm = m2 - m1`.
pub fn z_from_ekl(ekl: f64, m1: usize, m2: usize, ctx: &KlContext) -> Result<f64> {
    if m2 <= m1 {
        return Err(Error::domain(format!("need m2 > m1, got m1={m1}, m2={m2}")));
    }
    let dm = (m2 - m1) as f64;
    let (n, m) = (ctx.n as f64, ctx.m as f64);
    let scale = (2.0 * m * n / (ctx.constants.d_u * dm)).sqrt();
    Ok(scale * (ekl - ctx.constants.c_u * dm / (2.0 * m)))
}

pub fn z_statistic(t1: &SpectralField, t2: &SpectralField, m1: usize, m2: usize, ctx: &KlContext) -> Result<f64> {
    ctx.check_field(t1)?;
    ctx.check_field(t2)?;
    if m2 <= m1 {
        return Err(Error::domain(format!("need m2 > m1, got m1={m1}, m2={m2}")));
    }
    z_from_ekl(ekl(t1, t2)?, m1, m2, ctx)
}

/// Statistic for one single-missing-edge hypothesis against the saturated
/// graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStatistic {
    pub edge: Edge,
    pub ordinal: usize,
    pub ekl: f64,
    pub z: f64,
}

/// Per-frequency inverse of the saturated estimate, `j = 1..=N/2`.
struct Precomputed {
    inverse: Vec<CMatrix>,
}

fn precompute(s_hat: &SpectralField) -> Result<Precomputed> {
    let n = s_hat.n();
    let inverse = (1..=n / 2)
        .into_par_iter()
        .map(|j| linalg::hermitian_inverse(&s_hat.half()[j]).map_err(|e| e.at_frequency(j)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Precomputed { inverse })
}

/// eKL term between `S` and its single-pair fit `T` at one frequency, given
/// `A = S^{-1}`. `T^{-1}` comes from a rank-two update of `A`; the log-det
/// ratio reduces to the 2x2 block of `A`.
fn single_edge_term(s: &CMatrix, inv: &CMatrix, a: usize, b: usize) -> f64 {
    let p = s.nrows();
    let (aa, bb, ab) = (inv[(a, a)].re, inv[(b, b)].re, inv[(a, b)]);
    let det_k = aa * bb - ab.norm_sqr();
    let delta = ab / det_k;
    let zero = Complex64::new(0.0, 0.0);
    let k = [[inv[(a, a)], ab], [inv[(b, a)], inv[(b, b)]]];
    let e = [[zero, delta], [delta.conj(), zero]];
    let g = crate::fit::rank_two_gain(&k, &e);

    // tr(S T^{-1}) with T^{-1}[c][r] = A[c][r] - sum_uv A[c][u] G[u][v] A[v][r].
    let mut trace = Complex64::new(0.0, 0.0);
    for r in 0..p {
        let ga = g[0][0] * inv[(a, r)] + g[0][1] * inv[(b, r)];
        let gb = g[1][0] * inv[(a, r)] + g[1][1] * inv[(b, r)];
        for c in 0..p {
            let t_inv = inv[(c, r)] - inv[(c, a)] * ga - inv[(c, b)] * gb;
            trace += s[(r, c)] * t_inv;
        }
    }
    // log det(S T^{-1}) = log(1 - |A_ab|^2 / (A_aa A_bb)).
    let log_ratio = (-ab.norm_sqr() / (aa * bb)).ln_1p();
    trace.re - log_ratio - p as f64
}

/// The `L = p(p-1)/2` statistics `Z(T_0, T_1^i)`, where `T_0` is the
/// saturated estimate itself and `T_1^i` its fit with only pair `i` missing.
/// Edges are processed in parallel; each sum over frequencies runs in a fixed
/// order, so results do not depend on the worker count.
pub fn all_single_edge_statistics(s_hat: &SpectralField, ctx: &KlContext) -> Result<Vec<EdgeStatistic>> {
    single_edge_statistics(s_hat, ctx, &all_edges(s_hat.p()))
}

/// As [`all_single_edge_statistics`] for a chosen subset of edges.
pub fn single_edge_statistics(s_hat: &SpectralField, ctx: &KlContext, edges: &[Edge]) -> Result<Vec<EdgeStatistic>> {
    ctx.check_field(s_hat)?;
    let p = s_hat.p();
    let pre = precompute(s_hat)?;
    let n = s_hat.n();
    edges
        .par_iter()
        .map(|&edge| {
            let (a, b) = edge.indices();
            if b >= p {
                return Err(Error::domain(format!("pair {edge} exceeds p={p}")));
            }
            let sum: f64 = (1..=n / 2)
                .map(|j| single_edge_term(&s_hat.half()[j], &pre.inverse[j - 1], a, b))
                .sum();
            let ekl = sum / n as f64;
            let z = z_from_ekl(ekl, 0, 1, ctx)?;
            Ok(EdgeStatistic {
                edge,
                ordinal: edge.ordinal(p)?,
                ekl,
                z,
            })
        })
        .collect()
}
