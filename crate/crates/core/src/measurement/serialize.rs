//! JSON form of POVMs and measurement models.
//!
//! Matrices are flattened row-major with real and imaginary parts
//! interleaved: `[re(0,0), im(0,0), re(0,1), im(0,1), …]`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{MeasurementModel, Povm};
use crate::error::{Error, Result};
use crate::frame::CoherentGrid;
use crate::linalg::CMatrix;
use crate::quadrature::SphereGrid;
use crate::spin::{Spin, SpinSystem, UnitVector};

pub const SCHEMA_TAG: &str = "spinmeter-povm-v1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    #[serde(rename = "L")]
    pub exactness: usize,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl From<&SphereGrid> for GridRecord {
    fn from(grid: &SphereGrid) -> Self {
        GridRecord {
            exactness: grid.exactness(),
            nodes: grid.nodes().iter().map(|n| n.components()).collect(),
            weights: grid.weights().to_vec(),
        }
    }
}

impl GridRecord {
    pub fn to_grid(&self) -> Result<SphereGrid> {
        let nodes = self
            .nodes
            .iter()
            .map(|&v| UnitVector::new(v))
            .collect::<Result<Vec<_>>>()?;
        SphereGrid::from_parts(nodes, self.weights.clone(), self.exactness)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmDocument {
    pub schema: String,
    pub s: f64,
    pub grid: GridRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effects: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<Vec<Vec<f64>>>>,
}

fn flatten(m: &CMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
    out
}

fn unflatten(v: &[f64], d: usize) -> Result<CMatrix> {
    if v.len() != 2 * d * d {
        return Err(Error::Schema(format!(
            "flattened matrix has {} entries, expected {}",
            v.len(),
            2 * d * d
        )));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| {
        let idx = 2 * (i * d + j);
        Complex64::new(v[idx], v[idx + 1])
    }))
}

impl PovmDocument {
    pub fn from_povm(povm: &Povm) -> Self {
        PovmDocument {
            schema: SCHEMA_TAG.to_string(),
            s: povm.frame().s(),
            grid: GridRecord::from(povm.frame().grid().as_ref()),
            effects: Some(povm.effects().iter().map(flatten).collect()),
            kraus: None,
        }
    }

    /// Stores both the operators and the effects they induce.
    pub fn from_model(model: &MeasurementModel) -> Self {
        let mut doc = Self::from_povm(&model.povm());
        doc.kraus = Some(
            model
                .kraus()
                .iter()
                .map(|ts| ts.iter().map(flatten).collect())
                .collect(),
        );
        doc
    }

    fn frame(&self) -> Result<Arc<CoherentGrid>> {
        if self.schema != SCHEMA_TAG {
            return Err(Error::Schema(format!(
                "unknown schema tag {:?}",
                self.schema
            )));
        }
        let sys = SpinSystem::new(Spin::new(self.s)?);
        Ok(Arc::new(CoherentGrid::new(
            sys,
            Arc::new(self.grid.to_grid()?),
        )))
    }

    pub fn to_povm(&self) -> Result<Povm> {
        let frame = self.frame()?;
        let d = frame.dim();
        let effects = self
            .effects
            .as_ref()
            .ok_or_else(|| Error::Schema("document has no effects".into()))?
            .iter()
            .map(|v| unflatten(v, d))
            .collect::<Result<Vec<_>>>()?;
        Povm::new(frame, effects)
    }

    pub fn to_model(&self) -> Result<MeasurementModel> {
        let frame = self.frame()?;
        let d = frame.dim();
        let kraus = self
            .kraus
            .as_ref()
            .ok_or_else(|| Error::Schema("document has no kraus operators".into()))?
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|v| unflatten(v, d))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MeasurementModel::new(frame, kraus)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
