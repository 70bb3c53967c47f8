//! Vector autoregressive models `X_t = sum_u Phi_u X_{t-u} + eps_t`.
//!
//! Covers stationarity, Gaussian simulation, the analytic spectral matrix and
//! its inverse, ground-truth graphs, the three reference five-dimensional
//! models, and a sparse random-model generator.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{all_edges, Edge, Graph};
use crate::linalg::{self, CMatrix};
use crate::sample::SampleMatrix;
use crate::spectral::SpectralField;

/// Eigenvalue moduli must stay below `1 - STABILITY_MARGIN`.
pub const STABILITY_MARGIN: f64 = 1e-8;

/// Relative tolerance for reading zeros off an analytic inverse spectrum.
pub const TRUTH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VarModelRepr", into = "VarModelRepr")]
pub struct VarModel {
    p: usize,
    phi: Vec<DMatrix<f64>>,
    sigma_eps: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct VarModelRepr {
    p: usize,
    ell: usize,
    phi: Vec<Vec<Vec<f64>>>,
    sigma_eps: Vec<Vec<f64>>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], p: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != p || rows.iter().any(|r| r.len() != p) {
        return Err(Error::domain(format!("{what} must be {p}x{p}")));
    }
    Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
}

impl TryFrom<VarModelRepr> for VarModel {
    type Error = Error;

    fn try_from(r: VarModelRepr) -> Result<Self> {
        if r.phi.len() != r.ell {
            return Err(Error::domain(format!(
                "ell={} but {} coefficient matrices given",
                r.ell,
                r.phi.len()
            )));
        }
        let phi = r
            .phi
            .iter()
            .map(|m| matrix_from_rows(m, r.p, "phi"))
            .collect::<Result<Vec<_>>>()?;
        let sigma = matrix_from_rows(&r.sigma_eps, r.p, "sigma_eps")?;
        VarModel::new(phi, sigma)
    }
}

impl From<VarModel> for VarModelRepr {
    fn from(m: VarModel) -> Self {
        VarModelRepr {
            p: m.p,
            ell: m.phi.len(),
            phi: m.phi.iter().map(rows_of).collect(),
            sigma_eps: rows_of(&m.sigma_eps),
        }
    }
}

impl VarModel {
    /// Checks shapes, symmetry and positive definiteness of `sigma_eps`.
    /// Stationarity is checked separately by [`VarModel::is_stationary`].
    pub fn new(phi: Vec<DMatrix<f64>>, sigma_eps: DMatrix<f64>) -> Result<Self> {
        let p = sigma_eps.nrows();
        if p == 0 || !sigma_eps.is_square() {
            return Err(Error::domain("sigma_eps must be square and non-empty"));
        }
        if phi.is_empty() {
            return Err(Error::domain("a VAR model needs order >= 1"));
        }
        if phi.iter().any(|m| m.nrows() != p || m.ncols() != p) {
            return Err(Error::domain(format!("coefficient matrices must be {p}x{p}")));
        }
        if phi
            .iter()
            .chain(std::iter::once(&sigma_eps))
            .flatten()
            .any(|x| !x.is_finite())
        {
            return Err(Error::domain("model contains non-finite entries"));
        }
        let scale = sigma_eps.amax().max(f64::MIN_POSITIVE);
        if (&sigma_eps - sigma_eps.transpose()).amax() > 1e-12 * scale {
            return Err(Error::domain("sigma_eps must be symmetric"));
        }
        if sigma_eps.clone().cholesky().is_none() {
            return Err(Error::domain("sigma_eps must be positive definite"));
        }
        Ok(VarModel { p, phi, sigma_eps })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn order(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &[DMatrix<f64>] {
        &self.phi
    }

    pub fn sigma_eps(&self) -> &DMatrix<f64> {
        &self.sigma_eps
    }

    /// `p*ell` square companion matrix.
    pub fn companion(&self) -> DMatrix<f64> {
        let (p, ell) = (self.p, self.order());
        let mut c = DMatrix::zeros(p * ell, p * ell);
        for (u, m) in self.phi.iter().enumerate() {
            c.view_mut((0, u * p), (p, p)).copy_from(m);
        }
        for i in 0..p * (ell - 1) {
            c[(p + i, i)] = 1.0;
        }
        c
    }

    /// Largest eigenvalue modulus of the companion matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.companion()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_stationary(&self) -> bool {
        self.spectral_radius() < 1.0 - STABILITY_MARGIN
    }

    fn require_stationary(&self) -> Result<()> {
        let max_modulus = self.spectral_radius();
        if max_modulus < 1.0 - STABILITY_MARGIN {
            Ok(())
        } else {
            Err(Error::NonStationary { max_modulus })
        }
    }

    /// `Phi(f) = I - sum_u Phi_u exp(-i 2 pi f u)`.
    pub fn transfer(&self, f: f64) -> CMatrix {
        let mut out = CMatrix::identity(self.p, self.p);
        for (u, m) in self.phi.iter().enumerate() {
            let z = Complex64::from_polar(1.0, -2.0 * PI * f * (u + 1) as f64);
            for (o, &x) in out.iter_mut().zip(m.iter()) {
                *o -= z * x;
            }
        }
        out
    }

    /// `S(f) = Phi(f)^{-1} Sigma [Phi(f)^{-1}]^H`.
    pub fn spectral_matrix(&self, f: f64) -> Result<CMatrix> {
        let t = self.transfer(f);
        let lu = t.clone().lu();
        let inv = lu.try_inverse().ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
        })?;
        let condition = t.norm() * inv.norm();
        if condition > linalg::MAX_CONDITION {
            return Err(Error::IllConditioned { condition });
        }
        let mut s = &inv * linalg::complexify(&self.sigma_eps) * inv.adjoint();
        linalg::make_hermitian(&mut s);
        Ok(s)
    }

    /// `S^{-1}(f) = Phi(f)^H Sigma^{-1} Phi(f)`, evaluated as a product.
    pub fn inverse_spectral_matrix(&self, f: f64) -> CMatrix {
        let t = self.transfer(f);
        let sigma_inv = self
            .sigma_eps
            .clone()
            .cholesky()
            .expect("sigma_eps is positive definite by construction")
            .inverse();
        let mut s = t.adjoint() * linalg::complexify(&sigma_inv) * t;
        linalg::make_hermitian(&mut s);
        s
    }

    /// Analytic spectral field on the Fourier grid of size `n`.
    pub fn spectral_field(&self, n: usize) -> Result<SpectralField> {
        self.require_stationary()?;
        SpectralField::from_fn(self.p, n, |f| self.spectral_matrix(f))
    }

    /// Analytic inverse spectral field on the Fourier grid of size `n`.
    pub fn inverse_spectral_field(&self, n: usize) -> Result<SpectralField> {
        SpectralField::from_fn(self.p, n, |f| Ok(self.inverse_spectral_matrix(f)))
    }

    /// Pairs whose inverse-spectrum entry stays within `tol` of zero over
    /// the Fourier grid of size `n`.
    pub fn true_missing_edges_on(&self, n: usize, tol: f64) -> Result<Vec<Edge>> {
        let inv = self.inverse_spectral_field(n)?;
        Ok(all_edges(self.p)
            .into_iter()
            .filter(|e| {
                let (a, b) = e.indices();
                inv.half().iter().all(|m| m[(a, b)].norm() <= tol)
            })
            .collect())
    }

    /// Ground-truth missing pairs with the default relative tolerance
    /// (`TRUTH_TOL` times the mean diagonal magnitude of `S^{-1}`).
    pub fn true_missing_edges(&self, n: usize) -> Result<Vec<Edge>> {
        let inv = self.inverse_spectral_field(n)?;
        let diag_mean = inv
            .half()
            .iter()
            .map(|m| (0..self.p).map(|i| m[(i, i)].norm()).sum::<f64>())
            .sum::<f64>()
            / (inv.half().len() * self.p) as f64;
        self.true_missing_edges_on(n, TRUTH_TOL * diag_mean)
    }

    pub fn true_graph(&self, n: usize) -> Result<Graph> {
        Graph::with_missing(self.p, self.true_missing_edges(n)?)
    }

    /// Default burn-in: `max(10 * ell * p, 500)`.
    pub fn default_burn_in(&self) -> usize {
        (10 * self.order() * self.p).max(500)
    }

    /// Gaussian realisation of length `n`, discarding `burn_in` initial
    /// values (the default when `None`). Deterministic in `seed`.
    pub fn simulate(&self, n: usize, seed: u64, burn_in: Option<usize>) -> Result<SampleMatrix> {
        self.require_stationary()?;
        if n == 0 || n % 2 != 0 {
            return Err(Error::domain(format!(
                "sample length must be even and positive, got {n}"
            )));
        }
        let burn_in = burn_in.unwrap_or_else(|| self.default_burn_in());
        let chol = self
            .sigma_eps
            .clone()
            .cholesky()
            .expect("sigma_eps is positive definite by construction");
        let l = chol.l();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, ell) = (self.p, self.order());
        let total = burn_in + n;
        let mut history: Vec<DVector<f64>> = vec![DVector::zeros(p); ell];
        let mut channels = vec![Vec::with_capacity(n); p];
        for t in 0..total {
            let z = DVector::from_fn(p, |_, _| StandardNormal.sample(&mut rng));
            let mut x = &l * z;
            for (u, m) in self.phi.iter().enumerate() {
                x += m * &history[(t + ell - 1 - u) % ell];
            }
            if t >= burn_in {
                for (c, v) in channels.iter_mut().zip(x.iter()) {
                    c.push(*v);
                }
            }
            history[t % ell] = x;
        }
        SampleMatrix::new(channels)
    }
}

/// Reference model A: `Sigma = I_5` and a fixed sparse `Phi_1`; missing
/// pairs `{(2,3), (2,5), (3,4)}`.
pub fn model_a() -> VarModel {
    #[rustfmt::skip]
    let phi = DMatrix::from_row_slice(5, 5, &[
        0.2, 0.0, -0.1, 0.0, -0.5,
        0.4, -0.2, 0.0, 0.2, 0.0,
        -0.2, 0.0, 0.3, 0.0, 0.1,
        0.3, 0.1, 0.0, 0.3, 0.0,
        0.0, 0.0, 0.0, 0.5, 0.2,
    ]);
    VarModel::new(vec![phi], DMatrix::identity(5, 5)).expect("model A is well formed")
}

fn model_b_phi(x: f64) -> DMatrix<f64> {
    #[rustfmt::skip]
    let phi = DMatrix::from_row_slice(5, 5, &[
        0.2, 0.0, 0.3, 0.0, 0.3,
        0.3, -0.2, x, 0.0, 0.0,
        0.2, x, 0.3, 0.0, 0.0,
        0.2, 0.3, 0.0, 0.3, 0.0,
        0.2, 0.0, 0.2, 0.2, 0.2,
    ]);
    phi
}

/// Reference model B with coupling parameter `x`, `Sigma = I_5`.
/// Missing pairs `{(2,3), (2,5)}` at `x = 0` and `{(2,5)}` at `x = 0.1`.
pub fn model_b(x: f64) -> VarModel {
    VarModel::new(vec![model_b_phi(x)], DMatrix::identity(5, 5)).expect("model B is well formed")
}

/// Reference model C: model B at `x = 0` with `Sigma^{-1} = I_5` except
/// entries (1,2) and (2,1), which are 0.5. Only `(2,3)` is missing.
pub fn model_c() -> VarModel {
    let mut precision = DMatrix::<f64>::identity(5, 5);
    precision[(0, 1)] = 0.5;
    precision[(1, 0)] = 0.5;
    let mut sigma = precision
        .cholesky()
        .expect("precision matrix is positive definite")
        .inverse();
    sigma = (&sigma + sigma.transpose()) * 0.5;
    VarModel::new(vec![model_b_phi(0.0)], sigma).expect("model C is well formed")
}

/// Whether `(i, j)` (1-based) is populated in the random-model pattern.
pub fn random_pattern_entry(i: usize, j: usize, k: usize) -> bool {
    i == j || (i + j) % k == 1
}

/// Groups vertices into the connected components of the populated pattern.
/// Reconstruction acts on each block independently, so entries linking
/// different blocks stay exactly zero.
pub fn random_pattern_blocks(p: usize, k: usize) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..p).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for i in 1..=p {
        for j in 1..=p {
            if i != j && random_pattern_entry(i, j, k) {
                let (a, b) = (find(&mut parent, i - 1), find(&mut parent, j - 1));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut root_to_block = vec![usize::MAX; p];
    for v in 0..p {
        let r = find(&mut parent, v);
        if root_to_block[r] == usize::MAX {
            root_to_block[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[root_to_block[r]].push(v);
    }
    blocks
}

/// Random sparse stationary VAR(1) with `Sigma = I_p`.
///
/// The diagonal and every `(i, j)` with `(i + j) mod k = 1` are drawn from
/// N(0,1); the rest are zero. Eigenvalues of modulus above one are then
/// replaced by their reciprocals and the matrix rebuilt from its
/// eigendecomposition.
pub fn random_var_model(p: usize, k: usize, seed: u64) -> Result<VarModel> {
    if p < 2 || k < 1 {
        return Err(Error::domain(format!("need p >= 2 and k >= 1, got p={p}, k={k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi = DMatrix::<f64>::zeros(p, p);
    for i in 1..=p {
        for j in 1..=p {
            if random_pattern_entry(i, j, k) {
                phi[(i - 1, j - 1)] = StandardNormal.sample(&mut rng);
            }
        }
    }
    for block in random_pattern_blocks(p, k) {
        let sub = DMatrix::from_fn(block.len(), block.len(), |a, b| phi[(block[a], block[b])]);
        let rebuilt = reflect_unstable_eigenvalues(&sub)?;
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                phi[(i, j)] = rebuilt[(a, b)];
            }
        }
    }
    let model = VarModel::new(vec![phi], DMatrix::identity(p, p))?;
    model.require_stationary()?;
    Ok(model)
}

fn reflect_eigenvalue(z: Complex64) -> Complex64 {
    let r = z.norm();
    if (r - 1.0).abs() <= 1e-12 {
        z / (1.0 + 1e-6)
    } else if r > 1.0 {
        z.inv()
    } else {
        z
    }
}

/// Rebuilds `m = V D V^{-1}` with `D` passed through [`reflect_eigenvalue`].
/// Matrices with no eigenvalue on or outside the unit circle are returned
/// unchanged.
pub fn reflect_unstable_eigenvalues(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let eig: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    let mapped: Vec<Complex64> = eig.iter().map(|&z| reflect_eigenvalue(z)).collect();
    if eig.iter().zip(&mapped).all(|(a, b)| a == b) {
        return Ok(m.clone());
    }
    let cm = linalg::complexify(m);
    let scale = m.amax().max(1.0);
    let mut v = CMatrix::zeros(n, n);
    for (c, &lambda) in eig.iter().enumerate() {
        let vec = eigenvector(&cm, lambda, scale)?;
        v.set_column(c, &vec);
    }
    let v_inv = v
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Reconstruction("eigenvector matrix is singular".into()))?;
    let check = &v * CMatrix::from_diagonal(&DVector::from_vec(eig.clone())) * &v_inv;
    let fidelity = (&check - &cm).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    if fidelity > 1e-8 {
        return Err(Error::Reconstruction(format!(
            "eigendecomposition reproduces the matrix only to {fidelity:.3e}"
        )));
    }
    let rebuilt = &v * CMatrix::from_diagonal(&DVector::from_vec(mapped)) * &v_inv;
    let real_scale = rebuilt.iter().map(|z| z.re.abs()).fold(0.0, f64::max).max(1e-300);
    let imag = rebuilt.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > 1e-8 * real_scale {
        return Err(Error::Reconstruction(format!(
            "imaginary residue {imag:.3e} after rebuilding"
        )));
    }
    Ok(rebuilt.map(|z| z.re))
}

/// Inverse iteration for the eigenvector of `m` belonging to `lambda`.
fn eigenvector(m: &CMatrix, lambda: Complex64, scale: f64) -> Result<DVector<Complex64>> {
    let n = m.nrows();
    let shift = lambda + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let shifted = m - CMatrix::identity(n, n) * shift;
    let lu = shifted.lu();
    let mut x = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64));
    for _ in 0..4 {
        x = lu
            .solve(&x)
            .ok_or_else(|| Error::Reconstruction("inverse iteration hit a singular system".into()))?;
        let norm = x.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Reconstruction("inverse iteration diverged".into()));
        }
        x /= Complex64::new(norm, 0.0);
    }
    let residual = (m * &x - &x * lambda).norm();
    if residual > 1e-8 * scale {
        return Err(Error::Reconstruction(format!(
            "eigenvector residual {residual:.3e} for eigenvalue {lambda}"
        )));
    }
    Ok(x)
}
