//! Covariant and contravariant symbols of operators, and the Q- and
//! P-functions of density matrices.
//!
//! The covariant symbol is `A_cv(n) = ⟨n|A|n⟩`. The contravariant symbol is
//! the band-limited (degree `≤ 2s`) function `A_cn` with
//! `A = (2s+1)/(4π) ∫ A_cn(n) |n⟩⟨n| dn`. Q and P are the symbols of `ρ`
//! scaled by `(2s+1)/(4π)` so that both integrate to one.
//!
//! The contravariant symbol is obtained by solving the synthesis equation
//! on the span of covariant symbols, which is exactly the band-limited
//! subspace. No closed-form multipole ratios are used anywhere.

use std::io::{BufRead, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{unvec_row_major, vec_row_major, CoherentGrid};
use crate::linalg::{c, sandwich, CMatrix};
use crate::quadrature::SphereGrid;
use crate::state::DensityMatrix;

/// A function sampled at the nodes of a sphere grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereFunction<T = f64> {
    grid: Arc<SphereGrid>,
    values: Vec<T>,
}

impl<T: Copy> SphereFunction<T> {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<T>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(SphereFunction { grid, values })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl SphereFunction<f64> {
    pub fn integral(&self) -> f64 {
        self.grid
            .integrate(&self.values)
            .expect("length checked at construction")
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(other)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// CSV rows `theta,phi,value`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta,phi,value")?;
        for (n, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", n.theta(), n.phi(), v)?;
        }
        Ok(())
    }

    /// Reads the value column of [`Self::write_csv`] output back onto `grid`.
    /// Lines starting with `#` are skipped.
    pub fn read_csv<R: BufRead>(grid: Arc<SphereGrid>, input: R) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        let mut header = false;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            if !header {
                header = true;
                continue;
            }
            let v = line
                .rsplit(',')
                .next()
                .and_then(|x| x.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Schema(format!("bad CSV row {i}: {line}")))?;
            values.push(v);
        }
        SphereFunction::new(grid, values)
    }

    pub fn to_record(&self) -> SphereFunctionRecord {
        SphereFunctionRecord {
            exactness: self.grid.exactness(),
            theta: self.grid.nodes().iter().map(|n| n.theta()).collect(),
            phi: self.grid.nodes().iter().map(|n| n.phi()).collect(),
            weight: self.grid.weights().to_vec(),
            value: self.values.clone(),
        }
    }
}

/// Plot-ready JSON form of a real sphere function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereFunctionRecord {
    pub exactness: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub weight: Vec<f64>,
    pub value: Vec<f64>,
}

/// `A_cv(n_k) = ⟨n_k|A|n_k⟩`.
pub fn covariant_symbol(frame: &CoherentGrid, a: &CMatrix) -> Result<SphereFunction<Complex64>> {
    frame.check_operator(a)?;
    let values = frame.kets().iter().map(|k| sandwich(k, a, k)).collect();
    SphereFunction::new(frame.grid().clone(), values)
}

/// Real part of the covariant symbol of a Hermitian operator.
pub fn covariant_symbol_real(frame: &CoherentGrid, a: &CMatrix) -> Result<SphereFunction> {
    let f = covariant_symbol(frame, a)?;
    let grid = f.grid.clone();
    SphereFunction::new(grid, f.values.iter().map(|z| z.re).collect())
}

/// `(2s+1)/(4π) Σ_k w_k f(n_k) |n_k⟩⟨n_k|`.
///
/// Exact whenever the grid integrates `f` times degree-`2s` polynomials.
pub fn operator_from_contravariant(frame: &CoherentGrid, f: &[f64]) -> Result<CMatrix> {
    let values: Vec<Complex64> = f.iter().map(|&x| c(x)).collect();
    frame.synthesize(&values)
}

pub fn operator_from_contravariant_complex(
    frame: &CoherentGrid,
    f: &[Complex64],
) -> Result<CMatrix> {
    frame.synthesize(f)
}

/// The band-limited contravariant symbol of `A`, sampled at the nodes.
///
/// Requires grid exactness `≥ 4s`.
pub fn contravariant_symbol(
    frame: &CoherentGrid,
    a: &CMatrix,
) -> Result<SphereFunction<Complex64>> {
    frame.check_operator(a)?;
    let needed = 2 * frame.sys().spin().twice() as usize;
    if frame.grid().exactness() < needed {
        return Err(Error::Domain(format!(
            "contravariant symbols need grid exactness >= {needed}, grid has {}",
            frame.grid().exactness()
        )));
    }
    let pinv = frame.symbol_inverse()?;
    let b = unvec_row_major(&(pinv * vec_row_major(a)), frame.dim());
    let scale = frame.scale();
    let values = frame
        .kets()
        .iter()
        .map(|k| sandwich(k, &b, k) * scale)
        .collect();
    SphereFunction::new(frame.grid().clone(), values)
}

pub fn contravariant_symbol_real(frame: &CoherentGrid, a: &CMatrix) -> Result<SphereFunction> {
    let f = contravariant_symbol(frame, a)?;
    let grid = f.grid.clone();
    SphereFunction::new(grid, f.values.iter().map(|z| z.re).collect())
}

/// `Q(n) = (2s+1)/(4π) ⟨n|ρ|n⟩`.
pub fn q_function(frame: &CoherentGrid, rho: &DensityMatrix) -> Result<SphereFunction> {
    frame.check_operator(rho.matrix())?;
    let scale = frame.scale();
    let values = frame
        .kets()
        .iter()
        .map(|k| scale * sandwich(k, rho.matrix(), k).re)
        .collect();
    SphereFunction::new(frame.grid().clone(), values)
}

/// `P(n) = (2s+1)/(4π) ρ_cn(n)`. May be negative.
pub fn p_function(frame: &CoherentGrid, rho: &DensityMatrix) -> Result<SphereFunction> {
    let cn = contravariant_symbol_real(frame, rho.matrix())?;
    let scale = frame.scale();
    let grid = cn.grid.clone();
    SphereFunction::new(grid, cn.values.iter().map(|v| v * scale).collect())
}
