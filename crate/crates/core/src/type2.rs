//! Vector-pointer measurements: the pointer reads a vector `μ = r n` with
//! no constraint on its length.
//!
//! Smeared optimal models put a radial amplitude `φ(r)` in front of the
//! completely optimal operators, so as the profile narrows around `r = s`
//! they approach the unit-sphere measurement.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::CoherentGrid;
use crate::linalg::{hermitize, identity, identity_deviation, max_eigenvalue, projector, CMatrix};
use crate::measurement::{Povm, COMPLETENESS_TOL};
use crate::quadrature::gauss_legendre;
use crate::spin::SpinSystem;

/// Nodes used on the truncated radial interval.
pub const RADIAL_NODES: usize = 32;

/// Radial nodes with the `r² dr` measure folded into the weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    radii: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialGrid {
    /// Gauss-Legendre on `[a, b]`, weights multiplied by `r²`.
    pub fn gauss_legendre(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a >= 0.0 && b > a && n > 0) {
            return Err(Error::InvalidProfile(format!(
                "bad radial interval [{a}, {b}]"
            )));
        }
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let radii: Vec<f64> = x.iter().map(|t| mid + half * t).collect();
        let weights = radii
            .iter()
            .zip(&w)
            .map(|(r, w)| half * w * r * r)
            .collect();
        Self::new(radii, weights)
    }

    pub fn new(radii: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if radii.len() != weights.len() || radii.is_empty() {
            return Err(Error::InvalidProfile(
                "radii and weights must match and be nonempty".into(),
            ));
        }
        if radii.iter().any(|r| !(*r > 0.0)) || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidProfile(
                "radii and weights must be positive".into(),
            ));
        }
        Ok(RadialGrid { radii, weights })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Radial amplitude sampled on its own grid, normalized so that
/// `Σ_q u_q φ_q² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    center: f64,
    width: f64,
    grid: RadialGrid,
    amplitude: Vec<f64>,
}

impl RadialProfile {
    /// Amplitude whose radial density `r² φ(r)²` is a Gaussian of standard
    /// deviation `σ` about `center`, truncated to
    /// `[max(0, center − 5σ), center + 5σ]`.
    pub fn gaussian(center: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "width must be positive, got {sigma}"
            )));
        }
        if !(center > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "center must be positive, got {center}"
            )));
        }
        let a = (center - 5.0 * sigma).max(0.0);
        let b = center + 5.0 * sigma;
        let grid = RadialGrid::gauss_legendre(a, b, RADIAL_NODES)?;
        let raw: Vec<f64> = grid
            .radii()
            .iter()
            .map(|r| (-(r - center).powi(2) / (4.0 * sigma * sigma)).exp() / r)
            .collect();
        Self::normalized(center, sigma, grid, raw)
    }

    /// A single radius carrying all the weight; the `σ → 0` limit.
    pub fn sharp(center: f64) -> Result<Self> {
        let grid = RadialGrid::new(vec![center], vec![1.0])?;
        Ok(RadialProfile {
            center,
            width: 0.0,
            grid,
            amplitude: vec![1.0],
        })
    }

    fn normalized(center: f64, width: f64, grid: RadialGrid, raw: Vec<f64>) -> Result<Self> {
        let norm: f64 = raw.iter().zip(grid.weights()).map(|(a, u)| u * a * a).sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidProfile("profile has zero norm".into()));
        }
        let scale = norm.sqrt();
        Ok(RadialProfile {
            center,
            width,
            grid,
            amplitude: raw.into_iter().map(|a| a / scale).collect(),
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    /// Probability `u_q φ_q²` of each radial node.
    pub fn masses(&self) -> Vec<f64> {
        self.amplitude
            .iter()
            .zip(self.grid.weights())
            .map(|(a, u)| u * a * a)
            .collect()
    }

    /// Mass at radii with `|r − r0| < half_width`.
    pub fn mass_within(&self, r0: f64, half_width: f64) -> f64 {
        self.masses()
            .iter()
            .zip(self.grid.radii())
            .filter(|(_, r)| (*r - r0).abs() < half_width)
            .map(|(m, _)| m)
            .sum()
    }

    /// `Σ_q u_q φ_q² (r_q − r0)²`.
    pub fn second_moment_about(&self, r0: f64) -> f64 {
        self.masses()
            .iter()
            .zip(self.grid.radii())
            .map(|(m, r)| m * (r - r0).powi(2))
            .sum()
    }
}

/// Operators `T_{q,k}` indexed by radial node `q` and direction node `k`.
#[derive(Clone, Debug)]
pub struct Type2Model {
    frame: Arc<CoherentGrid>,
    radial: RadialGrid,
    kraus: Vec<Vec<CMatrix>>,
}

impl Type2Model {
    pub fn new(
        frame: Arc<CoherentGrid>,
        radial: RadialGrid,
        kraus: Vec<Vec<CMatrix>>,
    ) -> Result<Self> {
        if kraus.len() != radial.len() {
            return Err(Error::LengthMismatch {
                expected: radial.len(),
                found: kraus.len(),
            });
        }
        for row in &kraus {
            if row.len() != frame.len() {
                return Err(Error::LengthMismatch {
                    expected: frame.len(),
                    found: row.len(),
                });
            }
        }
        let model = Type2Model {
            frame,
            radial,
            kraus,
        };
        let deviation = model.completeness_deviation();
        if !(deviation < COMPLETENESS_TOL) {
            return Err(Error::Incomplete { deviation });
        }
        Ok(model)
    }

    pub fn frame(&self) -> &Arc<CoherentGrid> {
        &self.frame
    }

    pub fn sys(&self) -> &SpinSystem {
        self.frame.sys()
    }

    pub fn radial(&self) -> &RadialGrid {
        &self.radial
    }

    pub fn kraus(&self) -> &[Vec<CMatrix>] {
        &self.kraus
    }

    /// Pointer value `μ = r_q n_k`.
    pub fn pointer(&self, q: usize, k: usize) -> [f64; 3] {
        let r = self.radial.radii()[q];
        let n = self.frame.node(k).components();
        [r * n[0], r * n[1], r * n[2]]
    }

    pub fn completeness_deviation(&self) -> f64 {
        let d = self.frame.dim();
        let mut sum = CMatrix::zeros(d, d);
        for t in self.kraus.iter().flatten() {
            sum += t.adjoint() * t;
        }
        identity_deviation(&sum)
    }

    /// `E_{q,k} = T† T`.
    pub fn effects(&self) -> Vec<Vec<CMatrix>> {
        self.kraus
            .iter()
            .map(|row| row.iter().map(|t| hermitize(&(t.adjoint() * t))).collect())
            .collect()
    }

    /// Effects summed over the radial index.
    pub fn direction_marginal(&self) -> Result<Povm> {
        let d = self.frame.dim();
        let mut marg = vec![CMatrix::zeros(d, d); self.frame.len()];
        for row in self.effects() {
            for (acc, e) in marg.iter_mut().zip(row) {
                *acc += e;
            }
        }
        Povm::new(self.frame.clone(), marg)
    }

    fn shifted(&self, q: usize, k: usize) -> [CMatrix; 3] {
        let mu = self.pointer(q, k);
        let d = self.frame.dim();
        let ops = self.sys().ops();
        std::array::from_fn(|a| identity(d).scale(mu[a]) - &ops[a])
    }

    /// `Σ_{q,k,a} (μ_a − S_a) E_{q,k} (μ_a − S_a)`.
    pub fn retro_error_operator(&self) -> CMatrix {
        let d = self.frame.dim();
        let mut h = CMatrix::zeros(d, d);
        for (q, row) in self.effects().iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                for m in self.shifted(q, k) {
                    h += &m * e * &m;
                }
            }
        }
        hermitize(&h)
    }

    /// `Σ_{q,k} T† |μ − S|² T`.
    pub fn pred_error_operator(&self) -> CMatrix {
        let d = self.frame.dim();
        let mut h = CMatrix::zeros(d, d);
        for (q, row) in self.kraus.iter().enumerate() {
            for (k, t) in row.iter().enumerate() {
                let mut sq = CMatrix::zeros(d, d);
                for m in self.shifted(q, k) {
                    sq += &m * &m;
                }
                h += t.adjoint() * sq * t;
            }
        }
        hermitize(&h)
    }
}

/// `T_{q,k} = √u_q φ(r_q) √(w_k c) |n_k⟩⟨n_k|`.
pub fn make_smeared_optimal(
    frame: Arc<CoherentGrid>,
    profile: &RadialProfile,
) -> Result<Type2Model> {
    let c = frame.scale();
    let kraus = profile
        .grid()
        .weights()
        .iter()
        .zip(profile.amplitude())
        .map(|(u, a)| {
            let radial = u.sqrt() * a;
            (0..frame.len())
                .map(|k| projector(frame.ket(k)).scale(radial * (frame.weight(k) * c).sqrt()))
                .collect()
        })
        .collect();
    Type2Model::new(frame.clone(), profile.grid().clone(), kraus)
}

pub fn retro_error_type2(model: &Type2Model) -> f64 {
    max_eigenvalue(&model.retro_error_operator())
        .max(0.0)
        .sqrt()
}

pub fn pred_error_type2(model: &Type2Model) -> f64 {
    max_eigenvalue(&model.pred_error_operator()).max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub sigma: f64,
    pub delta_ei: f64,
    pub delta_ef: f64,
    /// Radial mass with `|r − s| < σ`.
    pub mass_within_sigma: f64,
    /// Radial mass with `|r − s| < s/2`.
    pub shell_mass: f64,
}

/// Smeared optimal models for each width in `sigmas`.
pub fn convergence_study(frame: Arc<CoherentGrid>, sigmas: &[f64]) -> Result<Vec<ConvergenceRow>> {
    if sigmas.is_empty() {
        return Err(Error::InvalidProfile("empty width list".into()));
    }
    let s = frame.s();
    sigmas
        .iter()
        .map(|&sigma| {
            let profile = RadialProfile::gaussian(s, sigma)?;
            let model = make_smeared_optimal(frame.clone(), &profile)?;
            Ok(ConvergenceRow {
                sigma,
                delta_ei: retro_error_type2(&model),
                delta_ef: pred_error_type2(&model),
                mass_within_sigma: profile.mass_within(s, sigma),
                shell_mass: profile.mass_within(s, 0.5 * s),
            })
        })
        .collect()
}
