//! The measurement unitary restricted to the apparatus ready state: an
//! isometry from the system into system ⊗ pointer.
//!
//! Apparatus basis states are the `(node, ξ)` pairs of the model in order;
//! the joint index is `block · (2s+1) + m`, so `V` is simply the operators
//! `T_{k,j}` stacked vertically.

use super::MeasurementModel;
use crate::error::{Error, Result};
use crate::linalg::{hermitize, identity_deviation, CMatrix, CVector};

#[derive(Clone, Debug)]
pub struct DilationIsometry {
    dim: usize,
    nodes: usize,
    /// Node index of each apparatus basis state.
    labels: Vec<usize>,
    matrix: CMatrix,
}

impl DilationIsometry {
    pub fn from_model(model: &MeasurementModel) -> Result<Self> {
        let deviation = model.completeness_deviation();
        if !(deviation < super::COMPLETENESS_TOL) {
            return Err(Error::Incomplete { deviation });
        }
        let d = model.sys().dim();
        let labels: Vec<usize> = model.operators().map(|(k, _)| k).collect();
        let mut matrix = CMatrix::zeros(labels.len() * d, d);
        for (b, (_, t)) in model.operators().enumerate() {
            matrix.rows_mut(b * d, d).copy_from(t);
        }
        Ok(DilationIsometry {
            dim: d,
            nodes: model.kraus().len(),
            labels,
            matrix,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apparatus_dim(&self) -> usize {
        self.labels.len()
    }

    /// `max |V†V − 1|`.
    pub fn isometry_deviation(&self) -> f64 {
        identity_deviation(&(self.matrix.adjoint() * &self.matrix))
    }

    pub fn apply(&self, psi: &CVector) -> CVector {
        &self.matrix * psi
    }

    /// `V ρ V†`.
    pub fn evolve(&self, rho: &CMatrix) -> CMatrix {
        &self.matrix * rho * self.matrix.adjoint()
    }

    /// Partial trace over the apparatus, keeping only pointer nodes in
    /// `region` when given. The result is not renormalized.
    pub fn reduce(&self, joint: &CMatrix, region: Option<&[usize]>) -> CMatrix {
        let d = self.dim;
        let mut keep = vec![region.is_none(); self.nodes];
        if let Some(region) = region {
            for &k in region {
                if k < self.nodes {
                    keep[k] = true;
                }
            }
        }
        let mut out = CMatrix::zeros(d, d);
        for (b, &k) in self.labels.iter().enumerate() {
            if keep[k] {
                out += joint.view((b * d, b * d), (d, d));
            }
        }
        hermitize(&out)
    }

    /// Probability of each pointer node, summed over `ξ`.
    pub fn pointer_marginal(&self, joint: &CMatrix) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; self.nodes];
        for (b, &k) in self.labels.iter().enumerate() {
            out[k] += joint.view((b * d, b * d), (d, d)).trace().re;
        }
        out
    }

    /// Pointer-node probabilities of the pure state `V|ψ⟩`.
    pub fn pointer_marginal_pure(&self, psi: &CVector) -> Vec<f64> {
        let d = self.dim;
        let out_state = self.apply(psi);
        let mut out = vec![0.0; self.nodes];
        for (b, &k) in self.labels.iter().enumerate() {
            out[k] += out_state.rows(b * d, d).norm_squared();
        }
        out
    }
}
