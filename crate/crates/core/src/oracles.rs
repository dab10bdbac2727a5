//! Independent checks: partial transpose, the two-qubit concurrence formula,
//! and grid search for the classical problem on tiny instances.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{herm_eig, CMatrix, DensityMatrix, JointDist};

/// Partial-transpose eigenvalues at or above this count as non-negative.
pub const PPT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    PptSeparable,
    PptEntangled,
    Value,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleVerdict {
    pub kind: OracleKind,
    /// Set exactly when `kind` is [`OracleKind::Value`].
    pub number: Option<f64>,
}

impl OracleVerdict {
    pub fn value(v: f64) -> Self {
        Self {
            kind: OracleKind::Value,
            number: Some(v),
        }
    }
}

impl fmt::Display for OracleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.number) {
            (OracleKind::PptSeparable, _) => f.write_str("ppt-separable"),
            (OracleKind::PptEntangled, _) => f.write_str("ppt-entangled"),
            (OracleKind::Value, Some(v)) => write!(f, "{v}"),
            (OracleKind::Value, None) => f.write_str("value"),
        }
    }
}

/// `rho^{T_Y}`: transpose on the second factor.
pub fn partial_transpose(rho: &DensityMatrix) -> CMatrix {
    let (nx, ny) = (rho.nx(), rho.ny());
    let m = rho.matrix();
    CMatrix::from_fn(nx * ny, nx * ny, |i, j| {
        let (x, y) = (i / ny, i % ny);
        let (xp, yp) = (j / ny, j % ny);
        m[(x * ny + yp, xp * ny + y)]
    })
}

pub fn partial_transpose_min_eigenvalue(rho: &DensityMatrix) -> f64 {
    let eig = herm_eig(&partial_transpose(rho)).expect("partial transpose of a Hermitian matrix is Hermitian");
    *eig.values.last().expect("non-empty spectrum")
}

pub fn ppt_check(rho: &DensityMatrix) -> OracleVerdict {
    let kind = if partial_transpose_min_eigenvalue(rho) >= -PPT_TOL {
        OracleKind::PptSeparable
    } else {
        OracleKind::PptEntangled
    };
    OracleVerdict { kind, number: None }
}

fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&q| q > 0.0).map(|&q| -q * q.log2()).sum()
}

fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    let mut scaled = eig.vectors.clone();
    for (k, mut c) in scaled.column_iter_mut().enumerate() {
        c *= Complex64::new(eig.values[k].max(0.0).sqrt(), 0.0);
    }
    Ok(scaled * eig.vectors.adjoint())
}

/// Concurrence `max(0, l1 - l2 - l3 - l4)` with `l_i` the decreasing square
/// roots of the spectrum of `sqrt(rho) rho~ sqrt(rho)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.nx() != 2 || rho.ny() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs a 2x2 bipartition, got {}x{}",
            rho.nx(),
            rho.ny()
        )));
    }
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    let sy = CMatrix::from_row_slice(2, 2, &[z, -i, i, z]);
    let yy = sy.kronecker(&sy);
    let tilde = &yy * rho.matrix().conjugate() * &yy;
    let s = psd_sqrt(rho.matrix())?;
    let m = &s * tilde * &s;
    let m = (&m + m.adjoint()).unscale(2.0);
    let l: Vec<f64> = herm_eig(&m)?.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Closed-form two-qubit entanglement of formation, in bits.
pub fn two_qubit_eof_oracle(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence(rho)?;
    if ppt_check(rho).kind == OracleKind::PptSeparable {
        return Ok(0.0);
    }
    let x = (1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0;
    Ok(binary_entropy(x).max(0.0))
}

/// `1/2 I(X:Y|alpha)` for `P~(x,y,0) = P q0`, `P~(x,y,1) = P (1 - q0)`,
/// written out on the stack since the grid visits millions of points.
fn half_cmi_two_planes(pxy: &[f64], nx: usize, ny: usize, q0: &[f64; 4]) -> f64 {
    let mut pt = [[0.0; 4]; 2];
    let mut pa = [0.0; 2];
    let mut pxa = [[0.0; 2]; 2];
    let mut pya = [[0.0; 2]; 2];
    for x in 0..nx {
        for y in 0..ny {
            let c = x * ny + y;
            for a in 0..2 {
                let v = pxy[c] * if a == 0 { q0[c] } else { 1.0 - q0[c] };
                pt[a][c] = v;
                pa[a] += v;
                pxa[a][x] += v;
                pya[a][y] += v;
            }
        }
    }
    let mut cmi = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            for a in 0..2 {
                let v = pt[a][x * ny + y];
                if v > 0.0 {
                    cmi += v * ((v * pa[a]) / (pxa[a][x] * pya[a][y])).log2();
                }
            }
        }
    }
    0.5 * cmi
}

/// Minimum of `1/2 I(X:Y|alpha)` over `q(alpha|x,y)` on a grid of spacing
/// `grid`, for `nx, ny <= 2` and `nalpha <= 2`. Only cells with `P > 0` are
/// gridded. An upper bound on the true minimum.
pub fn brute_force_classical_eof(p: &JointDist, nalpha: usize, grid: f64) -> Result<f64> {
    let (nx, ny) = (p.nx(), p.ny());
    if nx > 2 || ny > 2 || nalpha > 2 {
        return Err(Error::TooLarge(format!(
            "grid search limited to 2x2 with nalpha <= 2, got {nx}x{ny} with nalpha {nalpha}"
        )));
    }
    if nalpha == 0 {
        return Err(Error::InvalidOption("nalpha must be at least 1".into()));
    }
    if !(grid > 0.0 && grid <= 1.0) {
        return Err(Error::InvalidOption(format!("grid spacing must lie in (0, 1], got {grid}")));
    }
    let pxy = p.as_slice();
    if nalpha == 1 {
        return Ok(0.5 * p.mutual_information().max(0.0));
    }

    let steps = (1.0 / grid).round() as usize;
    let levels: Vec<f64> = (0..=steps).map(|k| (k as f64 * grid).min(1.0)).collect();
    let free: Vec<usize> = (0..nx * ny).filter(|&c| pxy[c] > 0.0).collect();
    if free.is_empty() {
        return Ok(0.0);
    }
    let total = levels.len().pow(free.len() as u32);
    let best = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let mut q0 = [1.0; 4];
            for &cell in &free {
                q0[cell] = levels[code % levels.len()];
                code /= levels.len();
            }
            half_cmi_two_planes(pxy, nx, ny, &q0)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best.max(0.0))
}
