//! Quadrature on the unit sphere, Legendre polynomials and the projection
//! kernel onto spherical harmonics of degree `≤ 2s`.
//!
//! Grids are product rules: Gauss-Legendre in `cos θ` times the trapezoid
//! rule in `φ`. A grid with exactness `L` integrates every polynomial in
//! `(n₁, n₂, n₃)` of total degree `≤ L` exactly (up to roundoff), with
//! weights measured in steradians so that they sum to `4π`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spin::{Spin, UnitVector};

/// Quadrature nodes and positive weights on the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereGrid {
    nodes: Vec<UnitVector>,
    weights: Vec<f64>,
    exactness: usize,
}

impl SphereGrid {
    /// Product rule with `(⌊L/2⌋+1)(L+1)` nodes, exact through degree `L`.
    pub fn new(exactness: usize) -> Self {
        let n_theta = exactness / 2 + 1;
        let n_phi = exactness + 1;
        let (x, wx) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for (&ct, &w) in x.iter().zip(&wx) {
            let theta = ct.clamp(-1.0, 1.0).acos();
            for j in 0..n_phi {
                nodes.push(UnitVector::from_polar(theta, j as f64 * dphi));
                weights.push(w * dphi);
            }
        }
        SphereGrid {
            nodes,
            weights,
            exactness,
        }
    }

    /// Grid with the default exactness `4s + 2`.
    pub fn for_spin(spin: Spin) -> Self {
        Self::new(spin.default_grid_degree())
    }

    /// Reassembles a grid from stored parts, validating weights.
    pub fn from_parts(nodes: Vec<UnitVector>, weights: Vec<f64>, exactness: usize) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: nodes.len(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Schema("grid weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 4.0 * PI).abs() > 1e-10 {
            return Err(Error::Schema(format!(
                "grid weights sum to {total}, not 4π"
            )));
        }
        Ok(SphereGrid {
            nodes,
            weights,
            exactness,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[UnitVector] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, k: usize) -> &UnitVector {
        &self.nodes[k]
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    /// `Σ_k w_k f_k`.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        self.check_len(values.len())?;
        Ok(self.weights.iter().zip(values).map(|(w, f)| w * f).sum())
    }

    pub fn integrate_complex(&self, values: &[Complex64]) -> Result<Complex64> {
        self.check_len(values.len())?;
        Ok(self.weights.iter().zip(values).map(|(w, f)| f * *w).sum())
    }

    /// Integrates a closure sampled at the nodes.
    pub fn integrate_fn(&self, f: impl Fn(&UnitVector) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(n, w)| w * f(n))
            .sum()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: len,
            });
        }
        Ok(())
    }

    /// Writes `theta,phi,weight` rows. Debugging aid only.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta,phi,weight")?;
        for (n, w) in self.nodes.iter().zip(&self.weights) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", n.theta(), n.phi(), w)?;
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomial `P_j(x)` by the three-term recurrence.
pub fn legendre(j: usize, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "Legendre argument {x} outside [-1, 1]"
        )));
    }
    Ok(legendre_unchecked(j, x.clamp(-1.0, 1.0)))
}

fn legendre_unchecked(j: usize, x: f64) -> f64 {
    if x == 1.0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    if j == 0 {
        return p0;
    }
    let mut p1 = x;
    for k in 2..=j {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Evaluates `Π₂ₛ(n, n') = Σ_{j=0}^{2s} (2j+1)/(4π) P_j(n·n')`.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    spin: Spin,
    coefficients: Vec<f64>,
}

impl KernelEvaluator {
    pub fn new(spin: Spin) -> Self {
        let coefficients = (0..=spin.twice() as usize)
            .map(|j| (2 * j + 1) as f64 / (4.0 * PI))
            .collect();
        KernelEvaluator { spin, coefficients }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    /// Kernel as a function of `t = n·n'`.
    pub fn at_cosine(&self, t: f64) -> f64 {
        let x = t.clamp(-1.0, 1.0);
        let mut p0 = 1.0;
        let mut p1 = x;
        let mut acc = self.coefficients[0];
        for (j, coef) in self.coefficients.iter().enumerate().skip(1) {
            if j >= 2 {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            acc += coef * p1;
        }
        acc
    }

    pub fn eval(&self, n: &UnitVector, m: &UnitVector) -> f64 {
        self.at_cosine(n.dot(m))
    }

    /// Discrete projection `(Πf)(n_k) = Σ_l w_l Π(n_k, n_l) f_l`.
    pub fn project(&self, grid: &SphereGrid, values: &[f64]) -> Result<Vec<f64>> {
        grid.check_len(values.len())?;
        Ok(grid
            .nodes()
            .iter()
            .map(|n| self.apply_at(grid, n, values))
            .collect())
    }

    /// `∫ Π(n, n') f(n') dn'` by quadrature over the grid, at any `n`.
    pub fn apply_at(&self, grid: &SphereGrid, n: &UnitVector, values: &[f64]) -> f64 {
        grid.nodes()
            .iter()
            .zip(grid.weights())
            .zip(values)
            .map(|((m, w), f)| w * self.eval(n, m) * f)
            .sum()
    }
}

/// `Π₂ₛ(n, n')`.
pub fn projection_kernel(spin: Spin, n: &UnitVector, m: &UnitVector) -> f64 {
    KernelEvaluator::new(spin).eval(n, m)
}
