//! A spin system paired with a sphere grid and the coherent states `|n_k⟩`
//! at every node. Most operations in the crate work against one of these.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{projector, CMatrix, CVector};
use crate::quadrature::{KernelEvaluator, SphereGrid};
use crate::spin::{Spin, SpinSystem, UnitVector};

#[derive(Debug)]
pub struct CoherentGrid {
    sys: SpinSystem,
    grid: Arc<SphereGrid>,
    kets: Vec<CVector>,
    kernel: KernelEvaluator,
    symbol_inverse: OnceLock<Result<CMatrix, f64>>,
}

impl CoherentGrid {
    pub fn new(sys: SpinSystem, grid: Arc<SphereGrid>) -> Self {
        let kets = grid.nodes().iter().map(|n| sys.coherent(n)).collect();
        let kernel = KernelEvaluator::new(sys.spin());
        CoherentGrid {
            sys,
            grid,
            kets,
            kernel,
            symbol_inverse: OnceLock::new(),
        }
    }

    /// Spin `s` on the default grid of exactness `4s + 2`.
    pub fn for_spin(spin: Spin) -> Arc<Self> {
        Arc::new(Self::new(
            SpinSystem::new(spin),
            Arc::new(SphereGrid::for_spin(spin)),
        ))
    }

    pub fn with_degree(spin: Spin, exactness: usize) -> Arc<Self> {
        Arc::new(Self::new(
            SpinSystem::new(spin),
            Arc::new(SphereGrid::new(exactness)),
        ))
    }

    pub fn sys(&self) -> &SpinSystem {
        &self.sys
    }

    pub fn s(&self) -> f64 {
        self.sys.s()
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn node(&self, k: usize) -> &UnitVector {
        self.grid.node(k)
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.grid.weight(k)
    }

    /// `|n_k⟩`.
    pub fn ket(&self, k: usize) -> &CVector {
        &self.kets[k]
    }

    pub fn kets(&self) -> &[CVector] {
        &self.kets
    }

    pub fn kernel(&self) -> &KernelEvaluator {
        &self.kernel
    }

    /// `(2s+1)/(4π)`.
    pub fn scale(&self) -> f64 {
        self.dim() as f64 / (4.0 * PI)
    }

    /// `(2s+1)/(4π) Σ_k w_k f_k |n_k⟩⟨n_k|`.
    pub fn synthesize(&self, values: &[Complex64]) -> Result<CMatrix> {
        self.grid.check_len(values.len())?;
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (k, f) in values.iter().enumerate() {
            out += projector(&self.kets[k]) * (f * (self.scale() * self.weight(k)));
        }
        Ok(out)
    }

    pub(crate) fn check_operator(&self, a: &CMatrix) -> Result<()> {
        crate::linalg::check_square(a, self.dim())
    }

    /// Pseudo-inverse of the Gram map `B ↦ synthesize(c·⟨n|B|n⟩)` acting on
    /// row-major vectorized operators. Cached per grid.
    pub(crate) fn symbol_inverse(&self) -> Result<&CMatrix> {
        let cached = self.symbol_inverse.get_or_init(|| {
            let d = self.dim();
            let d2 = d * d;
            let scale = self.scale();
            let mut gram = CMatrix::zeros(d2, d2);
            for (k, ket) in self.kets.iter().enumerate() {
                // v = vec(|n⟩⟨n|), row-major.
                let v = CVector::from_fn(d2, |idx, _| ket[idx / d] * ket[idx % d].conj());
                gram += (&v * v.adjoint()) * Complex64::new(scale * scale * self.weight(k), 0.0);
            }
            let svd = gram.svd(true, true);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            if !(smin > 1e-10 * smax) {
                return Err(smin);
            }
            svd.pseudo_inverse(0.0).map_err(|_| smin)
        });
        match cached {
            Ok(m) => Ok(m),
            Err(smin) => Err(Error::IllPosed(*smin)),
        }
    }
}

pub(crate) fn vec_row_major(a: &CMatrix) -> CVector {
    let d = a.nrows();
    CVector::from_fn(d * a.ncols(), |idx, _| a[(idx / d, idx % d)])
}

pub(crate) fn unvec_row_major(v: &CVector, d: usize) -> CMatrix {
    DMatrix::from_fn(d, d, |i, j| v[i * d + j])
}
