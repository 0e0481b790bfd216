//! Retrodictive, predictive and disturbance fidelities.
//!
//! Each fidelity is an infimum of `⟨ψ|H|ψ⟩` over unit kets for a Hermitian
//! operator `H` built from the model, so it equals the smallest eigenvalue
//! of `H`.

use serde::{Deserialize, Serialize};

use super::{MeasurementModel, Povm};
use crate::linalg::{hermitize, min_eigenvalue, CMatrix};

/// `Σ_k ½(E_k n_k·S + n_k·S E_k)`.
pub fn retrodictive_operator(povm: &Povm) -> CMatrix {
    let frame = povm.frame();
    let d = frame.dim();
    let mut h = CMatrix::zeros(d, d);
    for (k, e) in povm.effects().iter().enumerate() {
        let a = frame.sys().along(frame.node(k));
        h += e * &a + &a * e;
    }
    hermitize(&h.scale(0.5))
}

/// `Σ_{k,j} T† (n_k·S) T`.
pub fn predictive_operator(model: &MeasurementModel) -> CMatrix {
    let frame = model.frame();
    let d = frame.dim();
    let mut h = CMatrix::zeros(d, d);
    for (k, ts) in model.kraus().iter().enumerate() {
        if ts.is_empty() {
            continue;
        }
        let a = frame.sys().along(frame.node(k));
        for t in ts {
            h += t.adjoint() * &a * t;
        }
    }
    hermitize(&h)
}

/// `Σ_{k,j,a} ½(T† S_a T S_a + S_a T† S_a T)`.
pub fn disturbance_operator(model: &MeasurementModel) -> CMatrix {
    let sys = model.sys();
    let d = sys.dim();
    let mut h = CMatrix::zeros(d, d);
    for (_, t) in model.operators() {
        for s in sys.ops() {
            let heis = t.adjoint() * s * t;
            h += &heis * s + s * &heis;
        }
    }
    hermitize(&h.scale(0.5))
}

pub fn retrodictive_fidelity(povm: &Povm) -> f64 {
    min_eigenvalue(&retrodictive_operator(povm))
}

pub fn predictive_fidelity(model: &MeasurementModel) -> f64 {
    min_eigenvalue(&predictive_operator(model))
}

pub fn disturbance_fidelity(model: &MeasurementModel) -> f64 {
    min_eigenvalue(&disturbance_operator(model))
}

/// Fidelities and the maximal rms errors and disturbance derived from them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub s: f64,
    pub eta_i: f64,
    pub eta_f: f64,
    pub eta_d: f64,
    pub delta_ei: f64,
    pub delta_ef: f64,
    pub delta_d: f64,
}

impl FidelityReport {
    /// The radicands are suprema of squared norms; roundoff below zero is
    /// clipped.
    pub fn from_fidelities(s: f64, eta_i: f64, eta_f: f64, eta_d: f64) -> Self {
        let casimir = s + s * s;
        FidelityReport {
            s,
            eta_i,
            eta_f,
            eta_d,
            delta_ei: (casimir - eta_i * eta_i).max(0.0).sqrt(),
            delta_ef: (casimir - eta_f * eta_f).max(0.0).sqrt(),
            delta_d: std::f64::consts::SQRT_2 * (casimir - eta_d).max(0.0).sqrt(),
        }
    }

    /// `Δ_ei ≥ √s` and `Δ_ef ≥ √s`, each to `tol`.
    pub fn error_relations_hold(&self, tol: f64) -> bool {
        let floor = self.s.sqrt() - tol;
        self.delta_ei >= floor && self.delta_ef >= floor
    }
}

pub fn fidelity_report(model: &MeasurementModel) -> FidelityReport {
    FidelityReport::from_fidelities(
        model.sys().s(),
        retrodictive_fidelity(&model.povm()),
        predictive_fidelity(model),
        disturbance_fidelity(model),
    )
}
