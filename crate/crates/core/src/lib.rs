//! Optimal measurements of spin direction for arbitrary spin `s`.
//!
//! The crate builds SU(2) coherent states on a spherical quadrature grid,
//! the covariant and contravariant symbol calculus on that grid, measurement
//! models whose pointer reads out a direction, their retrodictive,
//! predictive and disturbance fidelities, unconstrained vector-pointer
//! ("type 2") models, and Q-function tomography.
//!
//! ```
//! use spinmeter::{make_completely_optimal, CoherentGrid, Spin};
//!
//! let frame = CoherentGrid::for_spin(Spin::new(1.5).unwrap());
//! let model = make_completely_optimal(frame, None).unwrap();
//! let report = model.fidelity_report();
//! assert!((report.delta_ei - 1.5f64.sqrt()).abs() < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod frame;
pub mod linalg;
pub mod measurement;
pub mod quadrature;
pub mod random;
pub mod spin;
pub mod state;
pub mod symbols;
pub mod tomography;
pub mod type2;

pub use error::{Error, Result};
pub use frame::CoherentGrid;
pub use linalg::{CMatrix, CVector};
pub use measurement::{
    fidelity_report, make_completely_optimal, make_predictively_optimal,
    make_retrodictively_optimal, DilationIsometry, FidelityReport, MeasurementModel, Povm,
    PovmDocument,
};
pub use quadrature::{KernelEvaluator, SphereGrid};
pub use spin::{CoherentKet, Spin, SpinSystem, UnitVector};
pub use state::{DensityMatrix, DensityMatrixFile};
pub use symbols::{p_function, q_function, SphereFunction};
pub use tomography::{reconstruct, sample_outcomes, OutcomeCounts, ReconstructionResult};
pub use type2::{make_smeared_optimal, RadialGrid, RadialProfile, Type2Model};
