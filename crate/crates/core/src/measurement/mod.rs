//! Type 1 measurements: the pointer records a direction on the unit sphere.
//!
//! A [`MeasurementModel`] is a discretized family of operators `T(n, ξ)`,
//! one list per grid node. Node weights are absorbed into the operators
//! (`T_k ∝ √w_k`), so completeness is the plain matrix identity
//! `Σ_{k,j} T†_{kj} T_{kj} = 1`, and densities on the sphere are recovered
//! by dividing by `w_k`. The auxiliary apparatus label `ξ` is a finite
//! index; every observable quantity depends on it only through sums of
//! squared moduli.

mod dilation;
mod fidelity;
mod optimal;
mod serialize;

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::frame::CoherentGrid;
use crate::linalg::{
    eigenvalues, hermitize, identity, identity_deviation, projector, trace_product, CMatrix,
};
use crate::random::random_isometry;
use crate::spin::SpinSystem;
use crate::state::DensityMatrix;
use crate::symbols::SphereFunction;

pub use dilation::DilationIsometry;
pub use fidelity::{
    disturbance_fidelity, disturbance_operator, fidelity_report, predictive_fidelity,
    predictive_operator, retrodictive_fidelity, retrodictive_operator, FidelityReport,
};
pub use optimal::{
    kernel_condition_deviation, make_completely_optimal, make_predictively_optimal,
    make_retrodictively_optimal, null_band_g, KetFamily,
};
pub use serialize::{GridRecord, PovmDocument, SCHEMA_TAG};

/// Tolerance on `Σ T†T = 1` and `Σ E = 1`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Eigenvalue floor for effects to count as positive.
pub const PSD_FLOOR: f64 = -1e-10;

#[derive(Clone, Debug)]
pub struct MeasurementModel {
    frame: Arc<CoherentGrid>,
    kraus: Vec<Vec<CMatrix>>,
}

impl MeasurementModel {
    /// `kraus[k]` lists the operators `T_{k,j}` at node `k` (possibly none).
    pub fn new(frame: Arc<CoherentGrid>, kraus: Vec<Vec<CMatrix>>) -> Result<Self> {
        frame.grid().check_len(kraus.len())?;
        for t in kraus.iter().flatten() {
            frame.check_operator(t)?;
        }
        let model = MeasurementModel { frame, kraus };
        let deviation = model.completeness_deviation();
        if !(deviation < COMPLETENESS_TOL) {
            return Err(Error::Incomplete { deviation });
        }
        Ok(model)
    }

    /// A single operator `t` at node `k`, nothing elsewhere. `t` must be an
    /// isometry for the model to be complete.
    pub fn single_node(frame: Arc<CoherentGrid>, k: usize, t: CMatrix) -> Result<Self> {
        if k >= frame.len() {
            return Err(Error::NodeOutOfRange {
                index: k,
                len: frame.len(),
            });
        }
        let mut kraus = vec![Vec::new(); frame.len()];
        kraus[k].push(t);
        Self::new(frame, kraus)
    }

    /// Stacks the blocks of a Haar-random isometry, `xi` operators per node.
    pub fn random_isometric<R: Rng + ?Sized>(
        frame: Arc<CoherentGrid>,
        xi: usize,
        rng: &mut R,
    ) -> Self {
        let d = frame.dim();
        let v = random_isometry(rng, d * xi * frame.len(), d);
        let kraus = (0..frame.len())
            .map(|k| {
                (0..xi)
                    .map(|j| v.rows((k * xi + j) * d, d).into_owned())
                    .collect()
            })
            .collect();
        Self::new(frame, kraus).expect("isometry blocks are complete")
    }

    pub fn frame(&self) -> &Arc<CoherentGrid> {
        &self.frame
    }

    pub fn sys(&self) -> &SpinSystem {
        self.frame.sys()
    }

    pub fn kraus(&self) -> &[Vec<CMatrix>] {
        &self.kraus
    }

    /// Iterates `(node, T)` over all operators.
    pub fn operators(&self) -> impl Iterator<Item = (usize, &CMatrix)> {
        self.kraus
            .iter()
            .enumerate()
            .flat_map(|(k, ts)| ts.iter().map(move |t| (k, t)))
    }

    pub fn completeness_deviation(&self) -> f64 {
        let d = self.frame.dim();
        let sum = self
            .operators()
            .fold(CMatrix::zeros(d, d), |acc, (_, t)| acc + t.adjoint() * t);
        identity_deviation(&sum)
    }

    /// `E_k = Σ_j T†_{kj} T_{kj}`.
    pub fn povm(&self) -> Povm {
        let d = self.frame.dim();
        let effects = self
            .kraus
            .iter()
            .map(|ts| {
                hermitize(
                    &ts.iter()
                        .fold(CMatrix::zeros(d, d), |acc, t| acc + t.adjoint() * t),
                )
            })
            .collect();
        Povm::new(self.frame.clone(), effects).expect("complete models give valid POVMs")
    }

    pub fn outcome_distribution(&self, rho: &DensityMatrix) -> Result<SphereFunction> {
        self.povm().outcome_distribution(rho)
    }

    /// Post-measurement state conditioned on the pointer landing in
    /// `region`, and the probability of that event. Repeated node indices
    /// count once.
    pub fn selective_update(
        &self,
        rho: &DensityMatrix,
        region: &[usize],
    ) -> Result<(DensityMatrix, f64)> {
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        self.frame.check_operator(rho.matrix())?;
        let d = self.frame.dim();
        let mut acc = CMatrix::zeros(d, d);
        let nodes: std::collections::BTreeSet<usize> = region.iter().copied().collect();
        for k in nodes {
            let ts = self.kraus.get(k).ok_or(Error::NodeOutOfRange {
                index: k,
                len: self.kraus.len(),
            })?;
            for t in ts {
                acc += t * rho.matrix() * t.adjoint();
            }
        }
        let p = acc.trace().re;
        if !(p > 1e-14) {
            return Err(Error::ZeroProbability(p));
        }
        let state = DensityMatrix::new(hermitize(&acc.unscale(p)))?;
        Ok((state, p))
    }

    /// `Σ_{k,j} T ρ T†`.
    pub fn nonselective_update(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.frame.check_operator(rho.matrix())?;
        let d = self.frame.dim();
        let acc = self.operators().fold(CMatrix::zeros(d, d), |acc, (_, t)| {
            acc + t * rho.matrix() * t.adjoint()
        });
        DensityMatrix::new(hermitize(&acc))
    }

    /// Initial spin, final spin and pointer means in the state `rho`.
    pub fn mean_relations(&self, rho: &DensityMatrix) -> Result<MeanValues> {
        let sys = self.sys();
        let initial_spin = sys.mean_spin(rho.matrix())?;
        let final_spin = sys.mean_spin(self.nonselective_update(rho)?.matrix())?;
        let probs = self.povm().probabilities(rho)?;
        let mut pointer = [0.0; 3];
        for (k, p) in probs.iter().enumerate() {
            let n = self.frame.node(k).components();
            for a in 0..3 {
                pointer[a] += p * n[a];
            }
        }
        Ok(MeanValues {
            initial_spin,
            final_spin,
            pointer,
        })
    }

    pub fn dilation(&self) -> Result<DilationIsometry> {
        DilationIsometry::from_model(self)
    }

    pub fn fidelity_report(&self) -> FidelityReport {
        fidelity_report(self)
    }
}

/// `⟨S_i⟩`, `⟨S_f⟩` and `⟨n_f⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanValues {
    pub initial_spin: [f64; 3],
    pub final_spin: [f64; 3],
    pub pointer: [f64; 3],
}

/// Discretized POVM: `E_k` already carries the node weight.
#[derive(Clone, Debug)]
pub struct Povm {
    frame: Arc<CoherentGrid>,
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(frame: Arc<CoherentGrid>, effects: Vec<CMatrix>) -> Result<Self> {
        frame.grid().check_len(effects.len())?;
        let d = frame.dim();
        let mut sum = CMatrix::zeros(d, d);
        for (index, e) in effects.iter().enumerate() {
            frame.check_operator(e)?;
            let min_eigenvalue = eigenvalues(e)[0];
            if min_eigenvalue < PSD_FLOOR {
                return Err(Error::NotPositive {
                    index,
                    min_eigenvalue,
                });
            }
            sum += e;
        }
        let deviation = identity_deviation(&sum);
        if !(deviation < COMPLETENESS_TOL) {
            return Err(Error::Incomplete { deviation });
        }
        Ok(Povm { frame, effects })
    }

    /// `E_k = w_k (2s+1)/(4π) |n_k⟩⟨n_k|`.
    pub fn optimal(frame: Arc<CoherentGrid>) -> Self {
        let scale = frame.scale();
        let effects = (0..frame.len())
            .map(|k| projector(frame.ket(k)).scale(scale * frame.weight(k)))
            .collect();
        Povm::new(frame, effects).expect("coherent-state resolution of identity")
    }

    /// The identity at node `k`, zero elsewhere.
    pub fn single_node(frame: Arc<CoherentGrid>, k: usize) -> Result<Self> {
        let d = frame.dim();
        let mut effects = vec![CMatrix::zeros(d, d); frame.len()];
        *effects.get_mut(k).ok_or(Error::NodeOutOfRange {
            index: k,
            len: frame.len(),
        })? = identity(d);
        Povm::new(frame, effects)
    }

    pub fn frame(&self) -> &Arc<CoherentGrid> {
        &self.frame
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn effect(&self, k: usize) -> &CMatrix {
        &self.effects[k]
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// `p_k = Tr(E_k ρ)`.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        self.frame.check_operator(rho.matrix())?;
        Ok(self
            .effects
            .iter()
            .map(|e| trace_product(e, rho.matrix()).re)
            .collect())
    }

    /// Outcome density `ρ_val(n_k) = Tr(E_k ρ)/w_k`.
    pub fn outcome_distribution(&self, rho: &DensityMatrix) -> Result<SphereFunction> {
        let probs = self.probabilities(rho)?;
        let values = probs
            .iter()
            .enumerate()
            .map(|(k, p)| p / self.frame.weight(k))
            .collect();
        SphereFunction::new(self.frame.grid().clone(), values)
    }

    /// Whether the maximally mixed state yields the uniform density `1/4π`.
    pub fn isotropy(&self) -> Isotropy {
        let d = self.frame.dim() as f64;
        let uniform = 1.0 / (4.0 * std::f64::consts::PI);
        let max_deviation = self
            .effects
            .iter()
            .enumerate()
            .map(|(k, e)| (e.trace().re / (d * self.frame.weight(k)) - uniform).abs())
            .fold(0.0, f64::max);
        Isotropy {
            isotropic: max_deviation < 1e-9,
            max_deviation,
        }
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropy().isotropic
    }

    /// Largest entrywise distance of any effect from `w_k (2s+1)/(4π)|n_k⟩⟨n_k|`.
    pub fn distance_from_optimal(&self) -> f64 {
        let scale = self.frame.scale();
        self.effects
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let target = projector(self.frame.ket(k)).scale(scale * self.frame.weight(k));
                crate::linalg::max_abs(&(e - target))
            })
            .fold(0.0, f64::max)
    }

    pub fn retrodictive_fidelity(&self) -> f64 {
        retrodictive_fidelity(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isotropy {
    pub isotropic: bool,
    pub max_deviation: f64,
}
