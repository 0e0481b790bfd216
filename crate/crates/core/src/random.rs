//! Seeded random states, operators and isometries.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitize, CMatrix, CVector};
use crate::spin::UnitVector;
use crate::state::DensityMatrix;

/// The generator used throughout: ChaCha8 seeded from a 64-bit value.
pub type SeedRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeedRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit ket.
pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    DensityMatrix::pure(&random_ket(rng, dim)).expect("nonzero ket")
}

/// Hilbert-Schmidt random density matrix, `G G†/Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = ginibre(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(hermitize(&m.unscale(tr))).expect("positive by construction")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    hermitize(&ginibre(rng, dim, dim))
}

/// Random isometry `rows × cols` (`rows ≥ cols`) from the QR factor of a
/// Ginibre matrix.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = ginibre(rng, rows, cols).qr();
    qr.q()
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    random_isometry(rng, dim, dim)
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> UnitVector {
    loop {
        let v = [
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        ];
        if let Ok(u) = UnitVector::new(v) {
            return u;
        }
    }
}
