//! Small dense complex linear algebra helpers shared by every module.
//!
//! Matrices here are at most a few dozen rows, so everything is done with
//! dense `nalgebra` types and exact Hermitian eigendecompositions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(A + A†)/2`.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigendecomposition of the Hermitian part of `a`, eigenvalues ascending.
pub fn eigh(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitize(a);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigenvalues(a: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = hermitize(a)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    eigenvalues(a)[0]
}

pub fn max_eigenvalue(a: &CMatrix) -> f64 {
    *eigenvalues(a).last().expect("non-empty matrix")
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_map(a: &CMatrix, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let (values, vectors) = eigh(a);
    let diag = CVector::from_iterator(values.len(), values.iter().map(|&x| f(x)));
    &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint()
}

/// `exp(-i G)` for Hermitian `G`, by spectral decomposition.
pub fn expm_neg_i(g: &CMatrix) -> CMatrix {
    hermitian_map(g, |x| (-I * x).exp())
}

/// Square root of a positive semidefinite matrix (negative eigenvalues clipped).
pub fn sqrtm_psd(a: &CMatrix) -> CMatrix {
    hermitian_map(a, |x| c(x.max(0.0).sqrt()))
}

/// Largest absolute entry.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Largest entrywise deviation of `a` from the identity.
pub fn identity_deviation(a: &CMatrix) -> f64 {
    max_abs(&(a - identity(a.nrows())))
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn projector(v: &CVector) -> CMatrix {
    outer(v, v)
}

/// `⟨a|M|b⟩`.
pub fn sandwich(a: &CVector, m: &CMatrix, b: &CVector) -> Complex64 {
    a.dotc(&(m * b))
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn check_square(a: &CMatrix, dim: usize) -> Result<()> {
    if a.nrows() != dim || a.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: if a.nrows() != dim {
                a.nrows()
            } else {
                a.ncols()
            },
        });
    }
    Ok(())
}

/// Trace norm `‖A‖₁` of a Hermitian matrix.
pub fn trace_norm(a: &CMatrix) -> f64 {
    eigenvalues(a).iter().map(|x| x.abs()).sum()
}
