//! Spin operator algebra and SU(2) coherent states.
//!
//! Basis convention: the standard basis of the `2s+1` dimensional space is
//! ordered by `S₃` eigenvalue from the top, so basis index `i` carries
//! `m = s - i`. Every matrix in this crate uses that ordering. Units have
//! `ħ = 1`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, check_square, expm_neg_i, sandwich, trace_product, CMatrix, CVector, I};

/// A half-integer spin quantum number, stored as `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Spin(u32);

impl Spin {
    /// Accepts `s ∈ {1/2, 1, 3/2, …}`.
    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !s.is_finite() || s <= 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidSpin(s));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSpin(0.0));
        }
        Ok(Spin(twice))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Default quadrature exactness `4s + 2`.
    pub fn default_grid_degree(self) -> usize {
        2 * self.0 as usize + 2
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// A direction on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitVector([f64; 3]);

impl UnitVector {
    pub const Z: UnitVector = UnitVector([0.0, 0.0, 1.0]);
    pub const X: UnitVector = UnitVector([1.0, 0.0, 0.0]);
    pub const Y: UnitVector = UnitVector([0.0, 1.0, 0.0]);

    /// Normalizes `v`; rejects the zero vector and non-finite input.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::Domain(format!("cannot normalize {v:?}")));
        }
        Ok(UnitVector([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x.
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        UnitVector([st * cp, st * sp, ct])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn theta(&self) -> f64 {
        self.0[2].clamp(-1.0, 1.0).acos()
    }

    pub fn phi(&self) -> f64 {
        let p = self.0[1].atan2(self.0[0]);
        if p < 0.0 {
            p + 2.0 * PI
        } else {
            p
        }
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn neg(&self) -> UnitVector {
        UnitVector([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// Applies a real 3×3 matrix (assumed orthogonal) and renormalizes.
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> UnitVector {
        let v = self.0;
        let w = [
            r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
            r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
            r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
        ];
        UnitVector::new(w).expect("rotation of a unit vector")
    }
}

/// Rotation vector `θ_n` with `exp(-iθ_n·S) S₃ exp(iθ_n·S) = n·S`.
///
/// Rotates ẑ onto `n` about `ẑ × n`. At the poles the axis is undefined and
/// the section is fixed to `0` at +ẑ and `π ŷ` at −ẑ.
pub fn rotation_vector(n: &UnitVector) -> [f64; 3] {
    let [x, y, z] = n.components();
    let axis_norm = (x * x + y * y).sqrt();
    if axis_norm == 0.0 {
        return if z > 0.0 {
            [0.0, 0.0, 0.0]
        } else {
            [0.0, PI, 0.0]
        };
    }
    let angle = z.clamp(-1.0, 1.0).acos();
    [-y / axis_norm * angle, x / axis_norm * angle, 0.0]
}

/// The spin-`s` representation: `S₁, S₂, S₃` in the `|m⟩` basis.
#[derive(Clone, Debug)]
pub struct SpinSystem {
    spin: Spin,
    ops: [CMatrix; 3],
}

impl SpinSystem {
    /// Builds the spin matrices with the ladder formula
    /// `⟨m+1|S₊|m⟩ = √(s(s+1) − m(m+1))`.
    pub fn new(spin: Spin) -> Self {
        let d = spin.dim();
        let s = spin.value();
        let mut sz = CMatrix::zeros(d, d);
        let mut splus = CMatrix::zeros(d, d);
        for i in 0..d {
            let m = s - i as f64;
            sz[(i, i)] = c(m);
            if i > 0 {
                splus[(i - 1, i)] = c((s * (s + 1.0) - m * (m + 1.0)).sqrt());
            }
        }
        let sminus = splus.adjoint();
        let sx = (&splus + &sminus).scale(0.5);
        let sy = (&splus - &sminus) * (-I * 0.5);
        SpinSystem {
            spin,
            ops: [sx, sy, sz],
        }
    }

    pub fn from_value(s: f64) -> Result<Self> {
        Ok(Self::new(Spin::new(s)?))
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn s(&self) -> f64 {
        self.spin.value()
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// `S_a` for `a ∈ {0, 1, 2}`.
    pub fn op(&self, a: usize) -> &CMatrix {
        &self.ops[a]
    }

    pub fn ops(&self) -> &[CMatrix; 3] {
        &self.ops
    }

    /// `v·S` for an arbitrary real vector.
    pub fn dot(&self, v: [f64; 3]) -> CMatrix {
        self.ops[0].scale(v[0]) + self.ops[1].scale(v[1]) + self.ops[2].scale(v[2])
    }

    pub fn along(&self, n: &UnitVector) -> CMatrix {
        self.dot(n.components())
    }

    /// `S₁² + S₂² + S₃²`.
    pub fn casimir(&self) -> CMatrix {
        self.ops
            .iter()
            .map(|s| s * s)
            .fold(CMatrix::zeros(self.dim(), self.dim()), |a, b| a + b)
    }

    /// The `S₃` eigenvalues in basis order, `s, s-1, …, -s`.
    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.s() - i as f64).collect()
    }

    /// Basis index of eigenvalue `m`.
    pub fn m_index(&self, m: f64) -> Result<usize> {
        let idx = self.s() - m;
        if idx < -1e-9 || idx > self.dim() as f64 - 1.0 + 1e-9 || (idx - idx.round()).abs() > 1e-9 {
            return Err(Error::NotInSpectrum { m, s: self.s() });
        }
        Ok(idx.round() as usize)
    }

    /// `exp(-i θ·S)`.
    pub fn rotation(&self, theta: [f64; 3]) -> CMatrix {
        if theta == [0.0; 3] {
            return CMatrix::identity(self.dim(), self.dim());
        }
        expm_neg_i(&self.dot(theta))
    }

    /// `|n, m⟩ = exp(-i θ_n·S)|m⟩`.
    pub fn coherent_ket(&self, n: &UnitVector, m: f64) -> Result<CoherentKet> {
        let idx = self.m_index(m)?;
        let amplitudes = if rotation_vector(n) == [0.0; 3] {
            let mut v = CVector::zeros(self.dim());
            v[idx] = c(1.0);
            v
        } else {
            self.rotation(rotation_vector(n)).column(idx).into_owned()
        };
        Ok(CoherentKet {
            direction: *n,
            m,
            amplitudes,
        })
    }

    /// The highest-weight coherent state `|n⟩ = |n, s⟩`.
    pub fn coherent(&self, n: &UnitVector) -> CVector {
        self.coherent_ket(n, self.s())
            .expect("m = s is always in the spectrum")
            .amplitudes
    }

    /// `Σ_a Var(S_a)` in the pure state `ket`.
    pub fn variance_sum(&self, ket: &CVector) -> Result<f64> {
        if ket.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: ket.len(),
            });
        }
        let norm2 = ket.norm_squared();
        let mut total = 0.0;
        for s in &self.ops {
            let mean = sandwich(ket, s, ket).re / norm2;
            let second = (s * ket).norm_squared() / norm2;
            total += second - mean * mean;
        }
        Ok(total)
    }

    /// `(⟨S₁⟩, ⟨S₂⟩, ⟨S₃⟩)` in the state `rho`.
    pub fn mean_spin(&self, rho: &CMatrix) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (a, s) in self.ops.iter().enumerate() {
            out[a] = expectation(rho, s)?.re;
        }
        Ok(out)
    }
}

/// An eigenvector of `n·S` with eigenvalue `m`.
#[derive(Clone, Debug)]
pub struct CoherentKet {
    pub direction: UnitVector,
    pub m: f64,
    pub amplitudes: CVector,
}

/// `Tr(ρ A)`.
pub fn expectation(rho: &CMatrix, a: &CMatrix) -> Result<Complex64> {
    check_square(a, rho.nrows())?;
    check_square(rho, a.nrows())?;
    Ok(trace_product(rho, a))
}

/// `⟨ψ|A|ψ⟩` for a normalized ket.
pub fn ket_expectation(psi: &CVector, a: &CMatrix) -> Result<Complex64> {
    check_square(a, psi.len())?;
    Ok(sandwich(psi, a, psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs};
    use std::f64::consts::FRAC_1_SQRT_2;

    const SPINS: [u32; 6] = [1, 2, 3, 4, 5, 8];

    #[test]
    fn rejects_bad_spins() {
        assert!(Spin::new(0.0).is_err());
        assert!(Spin::new(-0.5).is_err());
        assert!(Spin::new(0.3).is_err());
        assert!(Spin::new(f64::NAN).is_err());
        assert_eq!(Spin::new(1.5).unwrap().dim(), 4);
        assert_eq!(Spin::new(2.5).unwrap().to_string(), "5/2");
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let sys = SpinSystem::from_value(0.5).unwrap();
        assert_eq!(sys.op(2)[(0, 0)], c(0.5));
        assert_eq!(sys.op(2)[(1, 1)], c(-0.5));
        assert!((sys.op(0)[(0, 1)] - c(0.5)).norm() < 1e-15);
        assert!((sys.op(0)[(1, 0)] - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn spin_one_ladder_element() {
        let sys = SpinSystem::from_value(1.0).unwrap();
        assert_eq!(sys.m_values(), vec![1.0, 0.0, -1.0]);
        assert!((sys.op(0)[(0, 1)].re - FRAC_1_SQRT_2).abs() < 1e-15);

        // Hand-written S₂ for spin 1, exponentiated by Taylor series: the
        // π/2 rotation about ŷ must carry S₃ onto S₁.
        let h = FRAC_1_SQRT_2;
        let sy = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.0),
                -I * h,
                c(0.0),
                I * h,
                c(0.0),
                -I * h,
                c(0.0),
                I * h,
                c(0.0),
            ],
        );
        let sz = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(0.0), c(-1.0)]));
        let gen = sy * (-I * (PI / 2.0));
        let mut term = identity(3);
        let mut r = identity(3);
        for k in 1..60 {
            term = &term * &gen / c(k as f64);
            r += &term;
        }
        let rotated = &r * sz * r.adjoint();
        assert!((rotated[(0, 1)].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(max_abs(&(rotated - sys.op(0))) < 1e-12);
    }

    #[test]
    fn algebra_holds() {
        for twice in SPINS {
            let sys = SpinSystem::new(Spin::from_twice(twice).unwrap());
            let s = sys.s();
            for (a, b, cc) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let comm = sys.op(a) * sys.op(b) - sys.op(b) * sys.op(a);
                assert!(max_abs(&(comm - sys.op(cc) * I)) < 1e-12);
            }
            let cas = sys.casimir() - identity(sys.dim()).scale(s * (s + 1.0));
            assert!(max_abs(&cas) < 1e-12);
            for op in sys.ops() {
                assert_eq!(op, &op.adjoint());
            }
        }
    }

    #[test]
    fn rotation_vector_conventions() {
        assert_eq!(rotation_vector(&UnitVector::Z), [0.0; 3]);
        let x = rotation_vector(&UnitVector::X);
        assert!((x[1] - PI / 2.0).abs() < 1e-15 && x[0] == 0.0 && x[2] == 0.0);
        assert_eq!(rotation_vector(&UnitVector::Z.neg()), [0.0, PI, 0.0]);
        for twice in SPINS {
            let sys = SpinSystem::new(Spin::from_twice(twice).unwrap());
            for n in [
                UnitVector::X,
                UnitVector::Z.neg(),
                UnitVector::from_polar(1.1, 4.0),
            ] {
                let r = sys.rotation(rotation_vector(&n));
                let lhs = &r * sys.op(2) * r.adjoint();
                assert!(max_abs(&(lhs - sys.along(&n))) < 1e-10);
            }
        }
    }

    #[test]
    fn coherent_ket_examples() {
        let sys = SpinSystem::from_value(0.5).unwrap();
        let up = sys.coherent_ket(&UnitVector::Z, 0.5).unwrap().amplitudes;
        assert_eq!(up, CVector::from_vec(vec![c(1.0), c(0.0)]));
        let px = sys.coherent(&UnitVector::X);
        let expected = CVector::from_vec(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]);
        assert!((px.dotc(&expected).norm() - 1.0).abs() < 1e-12);
        assert!(sys.coherent_ket(&UnitVector::X, 0.0).is_err());
        assert!(sys.coherent_ket(&UnitVector::X, 1.5).is_err());
    }

    #[test]
    fn basis_kets_at_north_pole() {
        let sys = SpinSystem::from_value(2.0).unwrap();
        for (i, m) in sys.m_values().into_iter().enumerate() {
            let k = sys.coherent_ket(&UnitVector::Z, m).unwrap().amplitudes;
            for j in 0..sys.dim() {
                assert_eq!(k[j], c(if i == j { 1.0 } else { 0.0 }));
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let sys = SpinSystem::from_value(1.5).unwrap();
        let d = sys.dim();
        let mixed = identity(d).scale(1.0 / d as f64);
        assert!(expectation(&mixed, sys.op(2)).unwrap().norm() < 1e-15);
        let n = UnitVector::from_polar(0.7, 2.2);
        let k = sys.coherent(&n);
        let along = ket_expectation(&k, &sys.along(&n)).unwrap();
        assert!((along.re - 1.5).abs() < 1e-12 && along.im.abs() < 1e-12);
        let rho = crate::linalg::projector(&k);
        let mean = sys.mean_spin(&rho).unwrap();
        for (m, c) in mean.iter().zip(n.components()) {
            assert!((m - 1.5 * c).abs() < 1e-12);
        }
        assert!((sys.variance_sum(&k).unwrap() - 1.5).abs() < 1e-12);
        assert!(expectation(&identity(2), sys.op(0)).is_err());
    }
}
