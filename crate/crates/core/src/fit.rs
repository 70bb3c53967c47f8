//! Constrained spectral matrices.
//!
//! For a graph with missing pairs `E^c`, the fitted matrix `T` keeps every
//! diagonal entry and every present-pair entry of `S`, and has
//! `(T^{-1})_{jk} = 0` for each missing pair. One missing pair has a closed
//! form; several are handled by cycling the single-pair update a few times
//! and finishing with Newton steps on the free entries.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::linalg::{self, CMatrix};
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Convergence threshold on `max |T^{jk}| / mean |diag T^{-1}|` over
    /// the missing pairs.
    pub tol: f64,
    /// Maximum number of full cycles over the missing pairs.
    pub max_iter: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter < 1 {
            return Err(Error::config(format!(
                "fit tolerance must be > 0 and max_iter >= 1, got {} and {}",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

/// Change `delta` to add at `(a, b)` so that the inverse entry vanishes,
/// given the current inverse `inv`.
fn single_pair_delta(inv: &CMatrix, a: usize, b: usize) -> Complex64 {
    let (aa, bb, ab) = (inv[(a, a)].re, inv[(b, b)].re, inv[(a, b)]);
    ab / (aa * bb - ab.norm_sqr())
}

/// Applies `T[(a,b)] += delta` (and the conjugate entry) to `t` and updates
/// its inverse in place via the rank-two Woodbury identity.
fn apply_pair_update(t: &mut CMatrix, inv: &mut CMatrix, a: usize, b: usize, delta: Complex64) {
    if delta == Complex64::new(0.0, 0.0) {
        return;
    }
    t[(a, b)] += delta;
    t[(b, a)] = t[(a, b)].conj();

    // T' = T + U E U^T with U = [e_a e_b], E = [[0, d], [conj d, 0]].
    // T'^{-1} = A - A U G U^T A, G = (I + E K)^{-1} E, K = U^T A U.
    let k = [[inv[(a, a)], inv[(a, b)]], [inv[(b, a)], inv[(b, b)]]];
    let e = [
        [Complex64::new(0.0, 0.0), delta],
        [delta.conj(), Complex64::new(0.0, 0.0)],
    ];
    let g = rank_two_gain(&k, &e);
    let n = t.nrows();
    let col_a: Vec<Complex64> = (0..n).map(|r| inv[(r, a)]).collect();
    let col_b: Vec<Complex64> = (0..n).map(|r| inv[(r, b)]).collect();
    for c in 0..n {
        let row_a = inv[(a, c)];
        let row_b = inv[(b, c)];
        let ga = g[0][0] * row_a + g[0][1] * row_b;
        let gb = g[1][0] * row_a + g[1][1] * row_b;
        for r in 0..n {
            inv[(r, c)] -= col_a[r] * ga + col_b[r] * gb;
        }
    }
    linalg::make_hermitian(inv);
}

/// `(I + E K)^{-1} E` for 2x2 complex `E`, `K`.
pub(crate) fn rank_two_gain(k: &[[Complex64; 2]; 2], e: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let one = Complex64::new(1.0, 0.0);
    let m = [
        [
            one + e[0][0] * k[0][0] + e[0][1] * k[1][0],
            e[0][0] * k[0][1] + e[0][1] * k[1][1],
        ],
        [
            e[1][0] * k[0][0] + e[1][1] * k[1][0],
            one + e[1][0] * k[0][1] + e[1][1] * k[1][1],
        ],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    [
        [
            inv[0][0] * e[0][0] + inv[0][1] * e[1][0],
            inv[0][0] * e[0][1] + inv[0][1] * e[1][1],
        ],
        [
            inv[1][0] * e[0][0] + inv[1][1] * e[1][0],
            inv[1][0] * e[0][1] + inv[1][1] * e[1][1],
        ],
    ]
}

fn check_pair(s: &CMatrix, e: &Edge) -> Result<(usize, usize)> {
    let (a, b) = e.indices();
    if b >= s.nrows() {
        return Err(Error::domain(format!("pair {e} exceeds matrix size {}", s.nrows())));
    }
    Ok((a, b))
}

/// Closed-form fit for one missing pair: `T` equals `S` except at
/// `(j,k)`/`(k,j)`, where `T_jk = S_jk + A_jk / (A_jj A_kk - |A_jk|^2)`
/// with `A = S^{-1}`.
pub fn fit_single_missing(s: &CMatrix, edge: Edge) -> Result<CMatrix> {
    let (a, b) = check_pair(s, &edge)?;
    let inv = linalg::hermitian_inverse(s)?;
    let delta = single_pair_delta(&inv, a, b);
    let mut t = s.clone();
    if delta != Complex64::new(0.0, 0.0) {
        t[(a, b)] += delta;
        t[(b, a)] = t[(a, b)].conj();
    }
    Ok(t)
}

/// `max |T^{jk}|` over missing pairs relative to the mean diagonal magnitude
/// of `T^{-1}`.
pub fn constraint_residual(inv: &CMatrix, missing: &[Edge]) -> f64 {
    let n = inv.nrows();
    let diag = (0..n).map(|i| inv[(i, i)].norm()).sum::<f64>() / n as f64;
    missing
        .iter()
        .map(|e| {
            let (a, b) = e.indices();
            inv[(a, b)].norm()
        })
        .fold(0.0, f64::max)
        / diag
}

/// Fit for a general set of missing pairs, starting from `s` itself.
/// Returns the fitted matrix and the number of full cycles used.
pub fn fit_constrained(s: &CMatrix, missing: &[Edge], cfg: &FitConfig) -> Result<(CMatrix, usize)> {
    fit_constrained_from(s.clone(), missing, cfg)
}

/// Like [`fit_constrained`] but iterating from `start`, which must already
/// agree with the target on the diagonal and on every present pair (for
/// example the fit for a subset of `missing`).
pub fn fit_constrained_from(start: CMatrix, missing: &[Edge], cfg: &FitConfig) -> Result<(CMatrix, usize)> {
    cfg.validate()?;
    let mut t = start;
    if missing.is_empty() {
        return Ok((t, 0));
    }
    let mut pairs = missing.iter().map(|e| check_pair(&t, e)).collect::<Result<Vec<_>>>()?;
    pairs.sort_unstable();
    pairs.dedup();
    let mut inv = linalg::hermitian_inverse(&t)?;
    let mut residual = constraint_residual(&inv, missing);
    if residual <= cfg.tol {
        return Ok((t, 0));
    }
    for cycle in 1..=cfg.max_iter {
        if cycle <= COORDINATE_CYCLES {
            for &(a, b) in &pairs {
                let delta = single_pair_delta(&inv, a, b);
                apply_pair_update(&mut t, &mut inv, a, b, delta);
            }
            inv = linalg::hermitian_inverse(&t)?;
            residual = constraint_residual(&inv, missing);
        } else {
            (t, inv, residual) = newton_step(t, &inv, &pairs, missing, residual)?;
        }
        if residual <= cfg.tol {
            return Ok((t, cycle));
        }
    }
    Err(Error::NotConverged {
        cycles: cfg.max_iter,
        residual,
    })
}

/// Single-pair sweeps run before switching to Newton steps. One sweep is
/// enough to move a warm start into the region where Newton converges fast.
const COORDINATE_CYCLES: usize = 1;

/// One damped Newton step on the free entries of `T` for the equations
/// `(T^{-1})_{ab} = 0`. `log det T` is concave in those entries, so the
/// step is halved until `T` stays positive definite and the residual drops.
fn newton_step(
    t: CMatrix,
    inv: &CMatrix,
    pairs: &[(usize, usize)],
    missing: &[Edge],
    residual: f64,
) -> Result<(CMatrix, CMatrix, f64)> {
    let m = pairs.len();
    let w = inv;
    let mut jac = DMatrix::<f64>::zeros(2 * m, 2 * m);
    let mut rhs = DVector::<f64>::zeros(2 * m);
    for (q, &(a, b)) in pairs.iter().enumerate() {
        rhs[2 * q] = w[(a, b)].re;
        rhs[2 * q + 1] = w[(a, b)].im;
        for (s, &(c, d)) in pairs.iter().enumerate() {
            let x = w[(a, c)] * w[(d, b)];
            let y = w[(a, d)] * w[(c, b)];
            let (sum, diff) = (x + y, x - y);
            jac[(2 * q, 2 * s)] = sum.re;
            jac[(2 * q, 2 * s + 1)] = -diff.im;
            jac[(2 * q + 1, 2 * s)] = sum.im;
            jac[(2 * q + 1, 2 * s + 1)] = diff.re;
        }
    }
    let step = jac
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NotConverged { cycles: 0, residual })?;
    let mut scale = 1.0;
    for _ in 0..40 {
        let mut trial = t.clone();
        for (q, &(a, b)) in pairs.iter().enumerate() {
            trial[(a, b)] += Complex64::new(step[2 * q], step[2 * q + 1]) * scale;
            trial[(b, a)] = trial[(a, b)].conj();
        }
        if let Ok(trial_inv) = linalg::hermitian_inverse(&trial) {
            let r = constraint_residual(&trial_inv, missing);
            if r < residual {
                return Ok((trial, trial_inv, r));
            }
        }
        scale *= 0.5;
    }
    Err(Error::NotConverged { cycles: 0, residual })
}

/// Per-frequency fit over a whole field. Returns the fitted field and the
/// largest cycle count used at any frequency.
pub fn fit_field(s: &SpectralField, missing: &[Edge], cfg: &FitConfig) -> Result<(SpectralField, usize)> {
    let fitted = s
        .half()
        .par_iter()
        .enumerate()
        .map(|(j, m)| fit_constrained(m, missing, cfg).map_err(|e| e.at_frequency(j)))
        .collect::<Result<Vec<_>>>()?;
    let cycles = fitted.iter().map(|(_, c)| *c).max().unwrap_or(0);
    let half = fitted.into_iter().map(|(m, _)| m).collect();
    Ok((SpectralField::new(s.p(), s.n(), half)?, cycles))
}
