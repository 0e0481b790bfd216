//! Constructors for retrodictively, predictively and completely optimal
//! measurement models.

use std::sync::Arc;

use num_complex::Complex64;

use super::MeasurementModel;
use crate::error::{Error, Result};
use crate::frame::CoherentGrid;
use crate::linalg::{identity_deviation, outer, projector, CMatrix, CVector};
use crate::quadrature::legendre;
use crate::spin::UnitVector;

/// Kets indexed by grid node, then by the auxiliary label `ξ`.
pub type KetFamily = Vec<Vec<CVector>>;

const NORM_TOL: f64 = 1e-10;
const KERNEL_TOL: f64 = 1e-8;

/// Largest nodewise deviation of `Σ_l w_l Π₂ₛ(n_k, n_l) g_l` from 1.
pub fn kernel_condition_deviation(frame: &CoherentGrid, g: &[f64]) -> Result<f64> {
    let projected = frame.kernel().project(frame.grid(), g)?;
    Ok(projected
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max))
}

/// `1 + ε P_{2s+1}(n·axis)`: differs from the constant only in the band
/// the projection kernel annihilates. Nonnegative for `|ε| ≤ 1`.
pub fn null_band_g(frame: &CoherentGrid, epsilon: f64, axis: &UnitVector) -> Vec<f64> {
    let degree = frame.sys().spin().twice() as usize + 1;
    frame
        .grid()
        .nodes()
        .iter()
        .map(|n| 1.0 + epsilon * legendre(degree, n.dot(axis)).expect("unit vectors"))
        .collect()
}

fn check_family(frame: &CoherentGrid, family: &KetFamily) -> Result<()> {
    frame.grid().check_len(family.len())?;
    for ket in family.iter().flatten() {
        if ket.len() != frame.dim() {
            return Err(Error::DimensionMismatch {
                expected: frame.dim(),
                found: ket.len(),
            });
        }
    }
    Ok(())
}

/// `T(n, ξ) = √((2s+1)/4π) √g(n) |r(n, ξ)⟩⟨n|`.
///
/// `g` defaults to 1; otherwise it must be nonnegative and satisfy the
/// kernel condition `∫ Π₂ₛ(n, n') g(n') dn' = 1` at every node. The
/// re-preparation family `r` defaults to `|n⟩` and must have unit total
/// norm over `ξ` at every node.
pub fn make_retrodictively_optimal(
    frame: Arc<CoherentGrid>,
    g: Option<&[f64]>,
    reprep: Option<&KetFamily>,
) -> Result<MeasurementModel> {
    if let Some(g) = g {
        let deviation = kernel_condition_deviation(&frame, g)?;
        if !(deviation < KERNEL_TOL) {
            return Err(Error::KernelCondition { deviation });
        }
        if let Some(min) = g.iter().copied().reduce(f64::min) {
            if min < 0.0 {
                return Err(Error::Domain(format!("g must be nonnegative, found {min}")));
            }
        }
    }
    if let Some(family) = reprep {
        check_family(&frame, family)?;
        for (k, kets) in family.iter().enumerate() {
            let norm: f64 = kets.iter().map(|v| v.norm_squared()).sum();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::Domain(format!(
                    "re-preparation kets at node {k} have total squared norm {norm}"
                )));
            }
        }
    }
    let scale = frame.scale();
    let kraus = (0..frame.len())
        .map(|k| {
            let gk = g.map_or(1.0, |g| g[k]);
            let amp = Complex64::new((scale * frame.weight(k) * gk).sqrt(), 0.0);
            match reprep {
                Some(family) => family[k]
                    .iter()
                    .map(|r| outer(r, frame.ket(k)) * amp)
                    .collect(),
                None => vec![projector(frame.ket(k)) * amp],
            }
        })
        .collect();
    MeasurementModel::new(frame, kraus)
}

/// `T(n, ξ) = √((2s+1)/4π) |n⟩⟨h(n, ξ)|`, with the family `h` required to
/// satisfy `(2s+1)/(4π) Σ w |h⟩⟨h| = 1`.
pub fn make_predictively_optimal(
    frame: Arc<CoherentGrid>,
    h: &KetFamily,
) -> Result<MeasurementModel> {
    check_family(&frame, h)?;
    let scale = frame.scale();
    let d = frame.dim();
    let mut gram = CMatrix::zeros(d, d);
    for (k, kets) in h.iter().enumerate() {
        for v in kets {
            gram += projector(v).scale(scale * frame.weight(k));
        }
    }
    let deviation = identity_deviation(&gram);
    if !(deviation < KERNEL_TOL) {
        return Err(Error::Incomplete { deviation });
    }
    let kraus = h
        .iter()
        .enumerate()
        .map(|(k, kets)| {
            let amp = Complex64::new((scale * frame.weight(k)).sqrt(), 0.0);
            kets.iter().map(|v| outer(frame.ket(k), v) * amp).collect()
        })
        .collect();
    MeasurementModel::new(frame, kraus)
}

/// `T(n, ξ) = √((2s+1)/4π) f(n, ξ) |n⟩⟨n|` with `Σ_ξ |f(n, ξ)|² = 1`.
/// `f` defaults to a single `ξ` value with `f ≡ 1`.
pub fn make_completely_optimal(
    frame: Arc<CoherentGrid>,
    f: Option<&[Vec<Complex64>]>,
) -> Result<MeasurementModel> {
    if let Some(f) = f {
        frame.grid().check_len(f.len())?;
        for (k, profile) in f.iter().enumerate() {
            let norm: f64 = profile.iter().map(|z| z.norm_sqr()).sum();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::Domain(format!(
                    "profile at node {k} has total squared modulus {norm}"
                )));
            }
        }
    }
    let scale = frame.scale();
    let kraus = (0..frame.len())
        .map(|k| {
            let base = projector(frame.ket(k)).scale((scale * frame.weight(k)).sqrt());
            match f {
                Some(f) => f[k].iter().map(|z| &base * *z).collect(),
                None => vec![base],
            }
        })
        .collect();
    MeasurementModel::new(frame, kraus)
}
