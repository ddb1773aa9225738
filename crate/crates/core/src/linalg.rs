//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Hermitian eigendecompositions
//! go through nalgebra's tridiagonal QR solver; matrix exponentials of
//! Hermitian generators are always assembled from that decomposition.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Hermiticity tolerance, relative to `max(1, max |M_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> CMatrix {
    CMatrix::zeros(dim, dim)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Entrywise distance `max |a_ij - b_ij|`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn ensure_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Kronecker product with `a` as the major (slow) index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { Complex64::new(0.0, 0.0) })
}

/// `<a|b>` with the bra conjugated.
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

/// `<v|M|v>`, real part (callers pass Hermitian `M`).
pub fn expectation(m: &CMatrix, v: &CVector) -> f64 {
    v.dotc(&(m * v)).re
}

/// Hermitian eigendecomposition: ascending eigenvalues and the matching
/// orthonormal eigenvectors as columns.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    ensure_hermitian(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0)));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// `V diag(f(E_k)) V^H` for a Hermitian decomposition.
pub fn spectral_map<F>(values: &[f64], vectors: &CMatrix, f: F) -> CMatrix
where
    F: Fn(f64) -> Complex64,
{
    let n = values.len();
    let mut scaled = vectors.clone();
    for k in 0..n {
        let fk = f(values[k]);
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    scaled * vectors.adjoint()
}

/// `exp(-i H t)` for Hermitian `H`. Returns the exact identity at `t = 0`.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let (values, vectors) = eigh(h)?;
    Ok(expm_from_eigen(&values, &vectors, t))
}

pub(crate) fn expm_from_eigen(values: &[f64], vectors: &CMatrix, t: f64) -> CMatrix {
    if t == 0.0 {
        return identity(values.len());
    }
    spectral_map(values, vectors, |e| Complex64::from_polar(1.0, -e * t))
}

/// Operator 2-norm (largest singular value).
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    // the Gram matrix is Hermitian by construction up to rounding
    let sym = (&gram + gram.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0_f64, |acc, &v| acc.max(v)).max(0.0).sqrt()
}

/// Largest `|E|` of a Hermitian matrix; equals its operator norm.
pub fn hermitian_norm(m: &CMatrix) -> Result<f64> {
    let (values, _) = eigh(m)?;
    Ok(values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())))
}

pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}
