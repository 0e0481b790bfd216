//! Validated density matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, eigenvalues, hermitize, max_abs, projector, sqrtm_psd, trace_norm, CMatrix, CVector,
};

/// Tolerance for accepting a matrix as a density matrix.
pub const DENSITY_TOL: f64 = 1e-8;

/// A trace-one positive semidefinite matrix on the system space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity to [`DENSITY_TOL`],
    /// then stores the Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidDensity(format!(
                "shape {}x{} is not square",
                m.nrows(),
                m.ncols()
            )));
        }
        let asym = max_abs(&(&m - m.adjoint()));
        if asym > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (asymmetry {asym:.3e})"
            )));
        }
        let tr = m.trace();
        if (tr - c(1.0)).norm() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let h = hermitize(&m);
        let lmin = eigenvalues(&h)[0];
        if lmin < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {lmin:.3e}"
            )));
        }
        Ok(DensityMatrix(h))
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm2 = psi.norm_squared();
        if !(norm2 > 0.0) {
            return Err(Error::InvalidDensity("zero ket".into()));
        }
        Ok(DensityMatrix(projector(psi).unscale(norm2)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix(CMatrix::identity(dim, dim).unscale(dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Projects a Hermitian matrix onto the density matrices by clipping
    /// negative eigenvalues and renormalizing the trace. Returns the
    /// projected state and the clipped eigenvalue mass.
    pub fn project(m: &CMatrix) -> Result<(Self, f64)> {
        let (values, vectors) = crate::linalg::eigh(m);
        let clipped = values
            .iter()
            .filter(|&&x| x < 0.0)
            .fold(0.0, |acc, x| acc - x);
        let kept: Vec<f64> = values.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = kept.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDensity(
                "no positive spectrum to project onto".into(),
            ));
        }
        let diag = CVector::from_iterator(kept.len(), kept.iter().map(|&x| c(x / total)));
        let rho = &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint();
        Ok((DensityMatrix(hermitize(&rho)), clipped))
    }

    /// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_dim(other)?;
        let root = sqrtm_psd(&self.0);
        let inner = &root * &other.0 * &root;
        let tr: f64 = eigenvalues(&inner).iter().map(|x| x.max(0.0).sqrt()).sum();
        Ok(tr * tr)
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.check_dim(other)?;
        Ok(0.5 * trace_norm(&(&self.0 - &other.0)))
    }

    fn check_dim(&self, other: &DensityMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

/// Row-major real/imaginary parts, used by the JSON state files.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityMatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DensityMatrix> for DensityMatrixFile {
    fn from(rho: &DensityMatrix) -> Self {
        let d = rho.dim();
        let m = rho.matrix();
        DensityMatrixFile {
            dim: d,
            re: (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)].re).collect())
                .collect(),
            im: (0..d)
                .map(|i| (0..d).map(|j| m[(i, j)].im).collect())
                .collect(),
        }
    }
}

impl TryFrom<DensityMatrixFile> for DensityMatrix {
    type Error = Error;

    fn try_from(f: DensityMatrixFile) -> Result<Self> {
        let d = f.dim;
        let rows_ok = f.re.len() == d
            && f.im.len() == d
            && f.re.iter().chain(f.im.iter()).all(|r| r.len() == d);
        if !rows_ok {
            return Err(Error::Schema(format!("density matrix file is not {d}x{d}")));
        }
        let m = CMatrix::from_fn(d, d, |i, j| {
            num_complex::Complex64::new(f.re[i][j], f.im[i][j])
        });
        DensityMatrix::new(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid() {
        let mut m = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 1)] = c(0.0);
        assert!(DensityMatrix::new(m.clone()).is_ok());
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(DensityMatrix::new(m).is_err());
        let mut a = CMatrix::identity(2, 2).scale(0.5);
        a[(0, 1)] = c(0.1);
        assert!(DensityMatrix::new(a).is_err());
    }

    #[test]
    fn diagnostics_examples() {
        let up = DensityMatrix::pure(&CVector::from_vec(vec![c(1.0), c(0.0)])).unwrap();
        let down = DensityMatrix::pure(&CVector::from_vec(vec![c(0.0), c(1.0)])).unwrap();
        assert!((up.fidelity(&up).unwrap() - 1.0).abs() < 1e-12);
        assert!(up.trace_distance(&up).unwrap().abs() < 1e-12);
        assert!(up.fidelity(&down).unwrap().abs() < 1e-12);
        assert!((up.trace_distance(&down).unwrap() - 1.0).abs() < 1e-12);
        // Bloch geometry: ½|r − 0| with |r| = 1.
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((up.trace_distance(&mixed).unwrap() - 0.5).abs() < 1e-12);
        assert!((up.fidelity(&mixed).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn projection_clips() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.2), c(-0.2)]));
        let (rho, clipped) = DensityMatrix::project(&m).unwrap();
        assert!((clipped - 0.2).abs() < 1e-12);
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
    }
}
