//! Small Hermitian-matrix helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Matrices whose Cholesky-based condition estimate exceeds this are refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Cholesky factorisation of a Hermitian positive-definite matrix, refusing
/// anything whose condition estimate exceeds [`MAX_CONDITION`].
pub fn hermitian_cholesky(m: &CMatrix) -> Result<Cholesky<Complex64, Dyn>> {
    if !m.is_square() {
        return Err(Error::domain(format!("matrix is {}x{}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NotPositiveDefinite("non-finite entries".into()));
    }
    let chol =
        Cholesky::new(m.clone()).ok_or_else(|| Error::NotPositiveDefinite("Cholesky factorisation failed".into()))?;
    let l = chol.l_dirty();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..m.nrows() {
        let pivot = l[(i, i)];
        let d = pivot.re;
        // nalgebra takes complex square roots, so a negative pivot shows up
        // as an imaginary diagonal entry rather than a failure.
        if !(d > 0.0) || pivot.im.abs() > 1e-8 * d {
            return Err(Error::NotPositiveDefinite("non-positive pivot".into()));
        }
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let condition = (hi / lo).powi(2);
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition });
    }
    Ok(chol)
}

/// `log det` from the Cholesky diagonal.
pub fn cholesky_logdet(chol: &Cholesky<Complex64, Dyn>) -> f64 {
    let l = chol.l_dirty();
    2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>()
}

/// Inverse and log-determinant of a Hermitian PD matrix. The inverse is
/// returned exactly Hermitian.
pub fn hermitian_inverse_logdet(m: &CMatrix) -> Result<(CMatrix, f64)> {
    let chol = hermitian_cholesky(m)?;
    let logdet = cholesky_logdet(&chol);
    let mut inv = chol.inverse();
    make_hermitian(&mut inv);
    Ok((inv, logdet))
}

pub fn hermitian_inverse(m: &CMatrix) -> Result<CMatrix> {
    hermitian_inverse_logdet(m).map(|(inv, _)| inv)
}

pub fn hermitian_logdet(m: &CMatrix) -> Result<f64> {
    hermitian_cholesky(m).map(|c| cholesky_logdet(&c))
}

/// Averages `m` with its conjugate transpose in place.
pub fn make_hermitian(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// `max |A - A^H| / max |A|`, zero for an exactly Hermitian matrix.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut h = m.clone();
    make_hermitian(&mut h);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Promotes a real matrix to complex.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}
