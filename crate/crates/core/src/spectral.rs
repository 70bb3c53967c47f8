//! Matrix periodogram, lag-window weights and the frequency-averaged
//! periodogram.
//!
//! Spectral fields are stored on the nonnegative Fourier frequencies
//! `f_j = j/N`, `j = 0..=N/2`. Values at the remaining frequencies follow
//! from unit periodicity and conjugate symmetry, `S(f_{N-j}) = conj(S(f_j))`,
//! and are produced on demand by [`SpectralField::at`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::sample::SampleMatrix;

/// Hermitian `p x p` matrices on the Fourier grid of size `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    p: usize,
    n: usize,
    half: Vec<CMatrix>,
}

impl SpectralField {
    /// `half` holds the values for `j = 0..=n/2`.
    pub fn new(p: usize, n: usize, half: Vec<CMatrix>) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::domain(format!("grid size must be even and >= 2, got {n}")));
        }
        if half.len() != n / 2 + 1 {
            return Err(Error::domain(format!(
                "expected {} matrices for N={n}, got {}",
                n / 2 + 1,
                half.len()
            )));
        }
        if half.iter().any(|m| m.nrows() != p || m.ncols() != p) {
            return Err(Error::domain(format!("all matrices must be {p}x{p}")));
        }
        Ok(SpectralField { p, n, half })
    }

    /// Evaluates `f(freq)` at each nonnegative Fourier frequency.
    pub fn from_fn<F>(p: usize, n: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<CMatrix> + Sync,
    {
        if n < 2 || n % 2 != 0 {
            return Err(Error::domain(format!("grid size must be even and >= 2, got {n}")));
        }
        let half = (0..=n / 2)
            .into_par_iter()
            .map(|j| f(j as f64 / n as f64).map_err(|e| e.at_frequency(j)))
            .collect::<Result<Vec<_>>>()?;
        SpectralField::new(p, n, half)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Values at `j = 0..=N/2`.
    pub fn half(&self) -> &[CMatrix] {
        &self.half
    }

    pub fn frequency(&self, j: usize) -> f64 {
        j as f64 / self.n as f64
    }

    /// Value at any integer frequency index, with periodic wrapping.
    pub fn at(&self, j: isize) -> CMatrix {
        let r = j.rem_euclid(self.n as isize) as usize;
        if r <= self.n / 2 {
            self.half[r].clone()
        } else {
            self.half[self.n - r].map(|z| z.conj())
        }
    }

    /// Applies `f` to each stored matrix.
    pub fn try_map<F>(&self, f: F) -> Result<SpectralField>
    where
        F: Fn(&CMatrix) -> Result<CMatrix> + Sync,
    {
        let half = self
            .half
            .par_iter()
            .enumerate()
            .map(|(j, m)| f(m).map_err(|e| e.at_frequency(j)))
            .collect::<Result<Vec<_>>>()?;
        SpectralField::new(self.p, self.n, half)
    }

    /// Smallest Hermitian eigenvalue at each stored frequency.
    pub fn min_eigenvalues(&self) -> Vec<f64> {
        self.half.par_iter().map(linalg::min_eigenvalue).collect()
    }

    /// Pointwise inverse.
    pub fn inverse(&self) -> Result<SpectralField> {
        self.try_map(linalg::hermitian_inverse)
    }

    /// Diagonal entry `c` (0-based) at each stored frequency.
    pub fn diagonal(&self, c: usize) -> Vec<f64> {
        self.half.iter().map(|m| m[(c, c)].re).collect()
    }
}

/// Centering and scaling constants of the test statistic for a window shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowConstants {
    pub name: String,
    pub c_u: f64,
    pub d_u: f64,
}

impl WindowConstants {
    pub fn new(name: impl Into<String>, c_u: f64, d_u: f64) -> Result<Self> {
        if !(d_u > 0.0) || !c_u.is_finite() || !d_u.is_finite() {
            return Err(Error::config(format!("invalid window constants C_u={c_u}, D_u={d_u}")));
        }
        Ok(WindowConstants {
            name: name.into(),
            c_u,
            d_u,
        })
    }
}

/// An even lag-window shape `u` on `[-1/2, 1/2]`; weights are `u(k/2M)`.
pub trait WindowShape: Send + Sync {
    fn name(&self) -> &str;

    fn eval(&self, x: f64) -> f64;

    /// Tabulated constants, if known for this shape.
    fn constants(&self) -> Option<WindowConstants>;
}

/// `u(x) = cos(pi x)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CosineWindow;

impl WindowShape for CosineWindow {
    fn name(&self) -> &str {
        "cosine"
    }

    fn eval(&self, x: f64) -> f64 {
        (PI * x).cos()
    }

    fn constants(&self) -> Option<WindowConstants> {
        Some(WindowConstants {
            name: "cosine".into(),
            c_u: 0.617,
            d_u: 0.446,
        })
    }
}

/// Window shapes by name.
#[derive(Clone)]
pub struct WindowRegistry {
    shapes: BTreeMap<String, Arc<dyn WindowShape>>,
}

impl Default for WindowRegistry {
    fn default() -> Self {
        let mut r = WindowRegistry {
            shapes: BTreeMap::new(),
        };
        r.register(Arc::new(CosineWindow));
        r
    }
}

impl WindowRegistry {
    pub fn register(&mut self, shape: Arc<dyn WindowShape>) {
        self.shapes.insert(shape.name().to_string(), shape);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn WindowShape>> {
        self.shapes.get(name).cloned().ok_or_else(|| {
            Error::config(format!(
                "unknown window shape '{name}' (known: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<String> {
        self.shapes.keys().cloned().collect()
    }
}

/// Constants for a built-in shape.
pub fn window_constants(name: &str) -> Result<WindowConstants> {
    WindowSpec::named(name).resolve_constants(&WindowRegistry::default())
}

/// A window shape by name plus optional explicit constants, as it appears in
/// run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub shape: String,
    #[serde(default)]
    pub constants: Option<(f64, f64)>,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::named("cosine")
    }
}

impl WindowSpec {
    pub fn named(name: &str) -> Self {
        WindowSpec {
            shape: name.to_string(),
            constants: None,
        }
    }

    pub fn with_constants(mut self, c_u: f64, d_u: f64) -> Self {
        self.constants = Some((c_u, d_u));
        self
    }

    /// Explicit constants win; otherwise the registered shape's table values.
    pub fn resolve_constants(&self, registry: &WindowRegistry) -> Result<WindowConstants> {
        if let Some((c_u, d_u)) = self.constants {
            return WindowConstants::new(self.shape.clone(), c_u, d_u);
        }
        let shape = registry.get(&self.shape)?;
        shape.constants().ok_or_else(|| {
            Error::config(format!(
                "window '{}' has no tabulated constants; supply C_u and D_u",
                self.shape
            ))
        })
    }

    pub fn weights(&self, m: usize, registry: &WindowRegistry) -> Result<WeightSequence> {
        let shape = registry.get(&self.shape)?;
        WeightSequence::from_shape(m, shape.as_ref())
    }
}

/// Symmetric positive weights `w_{-M} … w_M` summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    m: usize,
    w: Vec<f64>,
}

/// Shape values below this are raised to it before normalising.
pub const WEIGHT_FLOOR: f64 = 1e-12;

impl WeightSequence {
    /// Evaluates `u(k/2M)` for `k = -M..=M`, floors at [`WEIGHT_FLOOR`] and
    /// normalises to unit sum.
    pub fn from_shape(m: usize, shape: &dyn WindowShape) -> Result<Self> {
        if m < 1 {
            return Err(Error::domain("half-width M must be >= 1"));
        }
        let mut w: Vec<f64> = (0..=m)
            .map(|k| shape.eval(k as f64 / (2 * m) as f64).max(WEIGHT_FLOOR))
            .collect();
        let total = w[0] + 2.0 * w[1..].iter().sum::<f64>();
        for x in &mut w {
            *x /= total;
        }
        Ok(WeightSequence { m, w })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of lags whose weight is not a floored zero. The smoothed
    /// estimate of generic data is nonsingular iff this is at least `p`.
    pub fn effective_support(&self) -> usize {
        let max = self.w.iter().copied().fold(0.0, f64::max);
        let count = |x: &f64| *x > 1e3 * WEIGHT_FLOOR * max;
        usize::from(count(&self.w[0])) + 2 * self.w[1..].iter().filter(|x| count(x)).count()
    }

    /// `w_k` for `|k| <= M`.
    pub fn weight(&self, k: isize) -> f64 {
        self.w[k.unsigned_abs()]
    }

    /// All `2M+1` weights, `k = -M..=M`.
    pub fn full(&self) -> Vec<f64> {
        let m = self.m as isize;
        (-m..=m).map(|k| self.weight(k)).collect()
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.full().iter().map(|x| x * x).sum()
    }
}

pub fn cosine_weights(m: usize) -> Result<WeightSequence> {
    WeightSequence::from_shape(m, &CosineWindow)
}

/// `W(f_j) = sum_t X_t exp(-i 2 pi f_j t) / sqrt(N)` for `j = 0..=N/2`,
/// indexed `[j][channel]`.
pub fn dft_vectors(x: &SampleMatrix) -> Vec<Vec<Complex64>> {
    let n = x.n();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let scale = 1.0 / (n as f64).sqrt();
    let per_channel: Vec<Vec<Complex64>> = x
        .channels()
        .iter()
        .map(|c| {
            let mut buf: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.process(&mut buf);
            buf.truncate(n / 2 + 1);
            buf.into_iter().map(|z| z * scale).collect()
        })
        .collect();
    (0..=n / 2)
        .map(|j| per_channel.iter().map(|c| c[j]).collect())
        .collect()
}

/// Matrix periodogram `W(f) W(f)^H` of the demeaned sample.
pub fn periodogram(x: &SampleMatrix) -> SpectralField {
    periodogram_with(x, true)
}

/// Matrix periodogram, optionally without removing channel means.
pub fn periodogram_with(x: &SampleMatrix, demean: bool) -> SpectralField {
    let data = if demean { x.demeaned() } else { x.clone() };
    let p = data.p();
    let half = dft_vectors(&data)
        .into_par_iter()
        .map(|w| {
            let mut m = CMatrix::from_fn(p, p, |a, b| w[a] * w[b].conj());
            for a in 0..p {
                m[(a, a)].im = 0.0;
            }
            m
        })
        .collect();
    SpectralField { p, n: data.n(), half }
}

/// Output of [`smooth`]. `singular_risk` is set when `2M+1 < p`, in which
/// case every smoothed matrix is rank deficient.
#[derive(Debug, Clone)]
pub struct Smoothed {
    pub field: SpectralField,
    pub singular_risk: bool,
}

/// Frequency-averaged periodogram `sum_k w_k P(f_{j-k})` with circular
/// frequency indexing.
pub fn smooth(pdgm: &SpectralField, w: &WeightSequence) -> Result<Smoothed> {
    let n = pdgm.n;
    let m = w.m as isize;
    if 2 * w.m >= n {
        return Err(Error::domain(format!("M={} must be below N/2={}", w.m, n / 2)));
    }
    let singular_risk = 2 * w.m + 1 < pdgm.p;
    if singular_risk {
        log::warn!(
            "2M+1 = {} < p = {}: smoothed spectral matrices are singular",
            2 * w.m + 1,
            pdgm.p
        );
    }
    let p = pdgm.p;
    let half = (0..=n / 2)
        .into_par_iter()
        .map(|j| {
            let mut acc = vec![Complex64::new(0.0, 0.0); p * p];
            for k in -m..=m {
                let wk = w.weight(k);
                let r = (j as isize - k).rem_euclid(n as isize) as usize;
                if r <= n / 2 {
                    for (a, s) in acc.iter_mut().zip(pdgm.half[r].as_slice()) {
                        *a += s * wk;
                    }
                } else {
                    for (a, s) in acc.iter_mut().zip(pdgm.half[n - r].as_slice()) {
                        *a += s.conj() * wk;
                    }
                }
            }
            let mut out = CMatrix::from_vec(p, p, acc);
            linalg::make_hermitian(&mut out);
            out
        })
        .collect();
    Ok(Smoothed {
        field: SpectralField { p, n, half },
        singular_risk,
    })
}

/// Periodogram of the demeaned sample followed by smoothing.
pub fn smoothed_periodogram(x: &SampleMatrix, w: &WeightSequence) -> Result<Smoothed> {
    smooth(&periodogram(x), w)
}

/// Squared partial coherence `|S^{jk}|^2 / (S^{jj} S^{kk})` between
/// vertices `j` and `k` (1-based) at each stored frequency, where `S^{..}`
/// are entries of the inverse spectral matrix.
pub fn partial_coherence(s: &SpectralField, j: usize, k: usize) -> Result<Vec<f64>> {
    if j == k || j == 0 || k == 0 || j > s.p || k > s.p {
        return Err(Error::domain(format!("invalid vertex pair ({j},{k}) for p={}", s.p)));
    }
    let (a, b) = (j - 1, k - 1);
    s.half
        .par_iter()
        .enumerate()
        .map(|(idx, m)| {
            let inv = linalg::hermitian_inverse(m).map_err(|e| e.at_frequency(idx))?;
            let num = inv[(a, b)].norm_sqr();
            let den = inv[(a, a)].re * inv[(b, b)].re;
            Ok((num / den).clamp(0.0, 1.0))
        })
        .collect()
}
