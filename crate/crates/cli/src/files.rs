//! State files and report schemas.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sepdec::{CMatrix, DensityMatrix, JointDist};

/// `{"kind": "quantum" | "classical", "dims": [nx, ny], "payload": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateFile {
    /// Row-major `[re, im]` pairs, basis index `x * ny + y`.
    Quantum { dims: [usize; 2], payload: Vec<Vec<[f64; 2]>> },
    /// `payload[x][y] = P(x, y)`.
    Classical { dims: [usize; 2], payload: Vec<Vec<f64>> },
}

impl StateFile {
    pub fn quantum(rho: &DensityMatrix) -> Self {
        StateFile::Quantum {
            dims: [rho.nx(), rho.ny()],
            payload: matrix_pairs(rho.matrix()),
        }
    }

    pub fn classical(p: &JointDist) -> Self {
        StateFile::Classical {
            dims: [p.nx(), p.ny()],
            payload: (0..p.nx()).map(|x| (0..p.ny()).map(|y| p.get(x, y)).collect()).collect(),
        }
    }

    pub fn into_quantum(self) -> Result<DensityMatrix, String> {
        match self {
            StateFile::Quantum { dims: [nx, ny], payload } => {
                let m = pairs_matrix(&payload, nx * ny, nx * ny)?;
                DensityMatrix::new(nx, ny, m).map_err(|e| e.to_string())
            }
            StateFile::Classical { .. } => Err("expected a quantum state file, got kind \"classical\"".into()),
        }
    }

    pub fn into_classical(self) -> Result<JointDist, String> {
        match self {
            StateFile::Classical { dims: [nx, ny], payload } => {
                if payload.len() != nx || payload.iter().any(|row| row.len() != ny) {
                    return Err(format!("payload is not a {nx}x{ny} grid"));
                }
                JointDist::new(nx, ny, payload.concat()).map_err(|e| e.to_string())
            }
            StateFile::Quantum { .. } => Err("expected a classical state file, got kind \"quantum\"".into()),
        }
    }
}

pub fn matrix_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn pairs_matrix(rows: &[Vec<[f64; 2]>], nrows: usize, ncols: usize) -> Result<CMatrix, String> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(format!("payload is not a {nrows}x{ncols} matrix of [re, im] pairs"));
    }
    Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
        let [re, im] = rows[i][j];
        Complex64::new(re, im)
    }))
}

/// Hex SHA-256 of the raw input bytes.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionsRecord {
    pub nalpha: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub tol_objective: f64,
    pub tol_separable: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    pub value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumResiduals {
    /// `max |sum w pi(psi) - rho|` of the returned ensemble.
    pub reconstruction: f64,
    pub product: f64,
    pub corrugation: f64,
    /// Largest `max |T T^dagger - I|` over accepted iterates.
    pub right_unitarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub weights: Vec<f64>,
    pub rho_x: Vec<Vec<Vec<[f64; 2]>>>,
    pub rho_y: Vec<Vec<Vec<[f64; 2]>>>,
    pub reconstruction: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumReport {
    pub kind: String,
    pub input_digest: String,
    pub dims: [usize; 2],
    pub options: OptionsRecord,
    pub seed: u64,
    pub rank: usize,
    pub value: f64,
    pub cmi: f64,
    pub verdict: String,
    pub residuals: QuantumResiduals,
    /// Present only for a separable verdict.
    pub decomposition: Option<DecompositionRecord>,
    pub isometry: Vec<Vec<[f64; 2]>>,
    pub trace: Vec<f64>,
    pub restarts: Vec<RestartRecord>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalResiduals {
    pub marginal: f64,
    pub independence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalReport {
    pub kind: String,
    pub input_digest: String,
    pub dims: [usize; 2],
    pub method: String,
    pub nalpha: usize,
    /// Optimizer settings; absent for the explicit constructions.
    pub options: Option<OptionsRecord>,
    pub seed: Option<u64>,
    pub value: f64,
    pub cmi: f64,
    pub verdict: String,
    pub residuals: ClassicalResiduals,
    /// `pt[alpha][x][y]`.
    pub pt: Vec<Vec<Vec<f64>>>,
    pub trace: Vec<f64>,
    pub restarts: Vec<RestartRecord>,
    pub wall_time_s: f64,
}
