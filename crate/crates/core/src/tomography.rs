//! Sampling pointer outcomes and reconstructing the state by linear
//! inversion.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, identity, trace_product, CMatrix, I};
use crate::measurement::Povm;
use crate::state::DensityMatrix;
use crate::symbols::q_function;

/// Draws per independent RNG stream.
pub const STREAM_CHUNK: u64 = 1 << 16;

/// Outcome counts per grid node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub counts: Vec<u64>,
    pub total: u64,
    pub seed: u64,
}

/// Metadata written next to a counts CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountsSidecar {
    pub s: f64,
    #[serde(rename = "L")]
    pub exactness: usize,
    #[serde(rename = "N")]
    pub total: u64,
    pub seed: u64,
}

impl OutcomeCounts {
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&k| k as f64 / n).collect()
    }

    pub fn sidecar(&self, povm: &Povm) -> CountsSidecar {
        CountsSidecar {
            s: povm.frame().s(),
            exactness: povm.frame().grid().exactness(),
            total: self.total,
            seed: self.seed,
        }
    }

    pub fn write_csv<W: Write>(&self, povm: &Povm, mut out: W) -> Result<()> {
        writeln!(out, "node_index,theta,phi,weight,count")?;
        let frame = povm.frame();
        for (k, count) in self.counts.iter().enumerate() {
            let n = frame.node(k);
            writeln!(
                out,
                "{k},{:.16e},{:.16e},{:.16e},{count}",
                n.theta(),
                n.phi(),
                frame.weight(k)
            )?;
        }
        Ok(())
    }

    /// Reads the `count` column back; the seed is taken from the sidecar.
    /// Lines starting with `#` are skipped.
    pub fn read_csv<R: BufRead>(input: R, seed: u64) -> Result<Self> {
        let mut counts = Vec::new();
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
            let field = line
                .rsplit(',')
                .next()
                .ok_or_else(|| Error::Schema(format!("line {}: missing count", i + 1)))?;
            let count = field
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::Schema(format!("line {}: {e}", i + 1)))?;
            counts.push(count);
        }
        let total = counts.iter().sum();
        Ok(OutcomeCounts {
            counts,
            total,
            seed,
        })
    }
}

/// Draws `n` outcomes from `p_k = Tr(E_k ρ)`.
///
/// The draws are split into chunks of [`STREAM_CHUNK`], chunk `j` using
/// ChaCha8 stream `j` of `seed`, so the result depends only on `seed`.
pub fn sample_outcomes(
    povm: &Povm,
    rho: &DensityMatrix,
    n: u64,
    seed: u64,
) -> Result<OutcomeCounts> {
    if n == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let probs = povm.probabilities(rho)?;
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p.max(0.0);
        cumulative.push(acc);
    }
    let mut counts = vec![0u64; probs.len()];
    let chunks = n.div_ceil(STREAM_CHUNK);
    for j in 0..chunks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j);
        let draws = STREAM_CHUNK.min(n - j * STREAM_CHUNK);
        for _ in 0..draws {
            let u: f64 = rng.random::<f64>() * acc;
            let k = cumulative.partition_point(|&c| c <= u).min(probs.len() - 1);
            counts[k] += 1;
        }
    }
    Ok(OutcomeCounts {
        counts,
        total: n,
        seed,
    })
}

/// Orthonormal Hermitian basis of `d × d` matrices under `Tr(A B)`:
/// `1/√d` first, then symmetric, antisymmetric and diagonal Gell-Mann
/// matrices.
pub fn gell_mann_basis(d: usize) -> Vec<CMatrix> {
    let mut out = vec![identity(d).unscale((d as f64).sqrt())];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = c(r);
            sym[(k, j)] = c(r);
            out.push(sym);
            let mut anti = CMatrix::zeros(d, d);
            anti[(j, k)] = -I * r;
            anti[(k, j)] = I * r;
            out.push(anti);
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = c(1.0 / norm);
        }
        diag[(l, l)] = c(-(l as f64) / norm);
        out.push(diag);
    }
    out
}

/// Linear map from basis coefficients to outcome probabilities.
#[derive(Clone, Debug)]
pub struct DesignMap {
    basis: Vec<CMatrix>,
    matrix: DMatrix<f64>,
    singular_values: Vec<f64>,
}

impl DesignMap {
    pub fn new(povm: &Povm) -> Self {
        let d = povm.frame().dim();
        let basis = gell_mann_basis(d);
        let matrix = DMatrix::from_fn(povm.len(), basis.len(), |k, mu| {
            trace_product(povm.effect(k), &basis[mu]).re
        });
        let mut singular_values: Vec<f64> = matrix.singular_values().iter().copied().collect();
        singular_values.sort_by(|a, b| b.total_cmp(a));
        DesignMap {
            basis,
            matrix,
            singular_values,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Numerical rank with relative cutoff `1e-10`.
    pub fn rank(&self) -> usize {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s > 1e-10 * top)
            .count()
    }

    pub fn required_rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_complete(&self) -> bool {
        self.rank() == self.required_rank()
    }

    pub fn condition_number(&self) -> f64 {
        let top = self.singular_values.first().copied().unwrap_or(0.0);
        let bottom = self
            .singular_values
            .get(self.basis.len() - 1)
            .copied()
            .unwrap_or(0.0);
        top / bottom
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructionResult {
    pub estimate: DensityMatrix,
    /// Least-squares estimate before positivity projection.
    pub raw: CMatrix,
    /// `‖A x − p‖₂` of the unprojected estimate.
    pub residual: f64,
    /// `‖A x − p‖₂` after projection.
    pub projected_residual: f64,
    pub clipped_mass: f64,
    pub condition_number: f64,
}

/// Least-squares solve of `p_k = Tr(E_k ρ)` with `Tr ρ = 1`, then
/// eigenvalue clipping and trace renormalization.
pub fn reconstruct(povm: &Povm, probabilities: &[f64]) -> Result<ReconstructionResult> {
    if probabilities.len() != povm.len() {
        return Err(Error::LengthMismatch {
            expected: povm.len(),
            found: probabilities.len(),
        });
    }
    let design = DesignMap::new(povm);
    if !design.is_complete() {
        return Err(Error::NotInformationallyComplete {
            rank: design.rank(),
            required: design.required_rank(),
        });
    }
    let d = povm.frame().dim();
    let a = design.matrix();
    let x0 = 1.0 / (d as f64).sqrt();
    let b = DVector::from_fn(a.nrows(), |k, _| probabilities[k] - a[(k, 0)] * x0);
    let a_rest = a.columns(1, a.ncols() - 1).into_owned();
    let x_rest = a_rest
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::Domain(e.to_string()))?;

    let mut raw = design.basis[0].scale(x0);
    for (mu, x) in x_rest.iter().enumerate() {
        raw += design.basis[mu + 1].scale(*x);
    }
    let residual = (&a_rest * &x_rest - &b).norm();
    let (estimate, clipped_mass) = DensityMatrix::project(&raw)?;
    let projected_residual = residual_of(povm, estimate.matrix(), probabilities);
    Ok(ReconstructionResult {
        estimate,
        raw,
        residual,
        projected_residual,
        clipped_mass,
        condition_number: design.condition_number(),
    })
}

pub fn reconstruct_counts(povm: &Povm, counts: &OutcomeCounts) -> Result<ReconstructionResult> {
    if counts.total == 0 {
        return Err(Error::Domain("no samples".into()));
    }
    reconstruct(povm, &counts.frequencies())
}

fn residual_of(povm: &Povm, rho: &CMatrix, probabilities: &[f64]) -> f64 {
    povm.effects()
        .iter()
        .zip(probabilities)
        .map(|(e, p)| (trace_product(e, rho).re - p).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub fidelity: f64,
    pub trace_distance: f64,
    pub q_max_deviation: f64,
}

pub fn reconstruction_diagnostics(
    povm: &Povm,
    result: &ReconstructionResult,
    reference: &DensityMatrix,
) -> Result<Diagnostics> {
    let est = &result.estimate;
    let frame = povm.frame();
    let q_est = q_function(frame, est)?;
    let q_ref = q_function(frame, reference)?;
    Ok(Diagnostics {
        fidelity: est.fidelity(reference)?,
        trace_distance: est.trace_distance(reference)?,
        q_max_deviation: q_est.max_abs_diff(q_ref.values()),
    })
}
