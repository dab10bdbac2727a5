//! Dense complex linear algebra and entropy primitives shared by the
//! classical and quantum tracks.
//!
//! Bipartite basis states are packed as `j = x * ny + y`, which is the
//! ordering produced by `kronecker(rho_x, rho_y)`. All entropies are in bits
//! and use `0 log 0 = 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Tolerance on `max |M - M^dagger|` for Hermitian inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on `|tr(rho) - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero; anything lower is rejected.
pub const PSD_TOL: f64 = 1e-10;
/// Tolerance on the total mass of a probability distribution.
pub const PROB_TOL: f64 = 1e-12;

/// Largest absolute entry of a matrix (zero for an empty matrix).
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |M - M^dagger|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn check_finite(m: &CMatrix) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Checks that `m` is a density matrix on a single space: finite, square,
/// Hermitian, unit trace and positive semidefinite.
pub fn validate_state(m: &CMatrix) -> Result<()> {
    check_square(m)?;
    check_finite(m)?;
    let deviation = hermitian_deviation(m);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = m.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceNotUnit { trace });
    }
    let eig = herm_eig(m)?;
    let min_eigenvalue = eig.values.last().copied().unwrap_or(0.0);
    if min_eigenvalue < -PSD_TOL {
        return Err(Error::NegativeEigenvalue { min_eigenvalue });
    }
    Ok(())
}

/// A validated bipartite density matrix on `H_X (x) H_Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    nx: usize,
    ny: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(nx: usize, ny: usize, mat: CMatrix) -> Result<Self> {
        if nx == 0 || ny == 0 || mat.nrows() != nx * ny || mat.ncols() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "dims ({nx}, {ny}) require a {0}x{0} matrix, got {1}x{2}",
                nx * ny,
                mat.nrows(),
                mat.ncols()
            )));
        }
        validate_state(&mat)?;
        Ok(Self { nx, ny, mat })
    }

    /// The projector `|psi><psi|` for a normalized vector on `H_XY`.
    pub fn pure(nx: usize, ny: usize, psi: &CVector) -> Result<Self> {
        Self::new(nx, ny, psi * psi.adjoint())
    }

    /// `rho_x (x) rho_y`.
    pub fn product(rho_x: &CMatrix, rho_y: &CMatrix) -> Result<Self> {
        Self::new(rho_x.nrows(), rho_y.nrows(), rho_x.kronecker(rho_y))
    }

    pub fn maximally_mixed(nx: usize, ny: usize) -> Self {
        let d = nx * ny;
        let mat = CMatrix::identity(d, d).unscale(d as f64);
        Self { nx, ny, mat }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Joint dimension `nx * ny`.
    pub fn dim(&self) -> usize {
        self.nx * self.ny
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn reduced_x(&self) -> CMatrix {
        trace_out_y(&self.mat, self.nx, self.ny)
    }

    pub fn reduced_y(&self) -> CMatrix {
        trace_out_x(&self.mat, self.nx, self.ny)
    }
}

/// A validated probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist(Vec<f64>);

fn check_probabilities(p: &[f64]) -> Result<()> {
    for (index, &value) in p.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidProbability { index, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::ProbabilitySum { sum });
    }
    Ok(())
}

impl ProbDist {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_probabilities(&p)?;
        Ok(Self(p))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A joint distribution `P(x, y)` stored row-major at `x * ny + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    nx: usize,
    ny: usize,
    p: Vec<f64>,
}

impl JointDist {
    pub fn new(nx: usize, ny: usize, p: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || p.len() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "dims ({nx}, {ny}) require {} entries, got {}",
                nx * ny,
                p.len()
            )));
        }
        check_probabilities(&p)?;
        Ok(Self { nx, ny, p })
    }

    /// `P(x) P(y)`.
    pub fn product(px: &[f64], py: &[f64]) -> Result<Self> {
        let p = px
            .iter()
            .flat_map(|a| py.iter().map(move |b| a * b))
            .collect();
        Self::new(px.len(), py.len(), p)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.ny + y]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn marginal_x(&self) -> Vec<f64> {
        (0..self.nx)
            .map(|x| (0..self.ny).map(|y| self.get(x, y)).sum())
            .collect()
    }

    pub fn marginal_y(&self) -> Vec<f64> {
        (0..self.ny)
            .map(|y| (0..self.nx).map(|x| self.get(x, y)).sum())
            .collect()
    }

    /// Swaps the roles of X and Y.
    pub fn transposed(&self) -> Self {
        let mut p = vec![0.0; self.p.len()];
        for x in 0..self.nx {
            for y in 0..self.ny {
                p[y * self.nx + x] = self.get(x, y);
            }
        }
        Self {
            nx: self.ny,
            ny: self.nx,
            p,
        }
    }

    /// `I(X:Y)` in bits.
    pub fn mutual_information(&self) -> f64 {
        let (px, py) = (self.marginal_x(), self.marginal_y());
        let mut mi = 0.0;
        for x in 0..self.nx {
            for y in 0..self.ny {
                let p = self.get(x, y);
                if p > 0.0 {
                    mi += p * (p / (px[x] * py[y])).log2();
                }
            }
        }
        mi
    }
}

/// An extension `P~(x, y, alpha)` stored at `(x * ny + y) * nalpha + alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriJointDist {
    nx: usize,
    ny: usize,
    nalpha: usize,
    p: Vec<f64>,
}

impl TriJointDist {
    pub fn new(nx: usize, ny: usize, nalpha: usize, p: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || nalpha == 0 || p.len() != nx * ny * nalpha {
            return Err(Error::DimensionMismatch(format!(
                "dims ({nx}, {ny}, {nalpha}) require {} entries, got {}",
                nx * ny * nalpha,
                p.len()
            )));
        }
        check_probabilities(&p)?;
        Ok(Self { nx, ny, nalpha, p })
    }

    /// Builds without re-validating; callers guarantee the invariants.
    pub(crate) fn from_raw(nx: usize, ny: usize, nalpha: usize, p: Vec<f64>) -> Self {
        debug_assert_eq!(p.len(), nx * ny * nalpha);
        Self { nx, ny, nalpha, p }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nalpha(&self) -> usize {
        self.nalpha
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, alpha: usize) -> usize {
        (x * self.ny + y) * self.nalpha + alpha
    }

    pub fn get(&self, x: usize, y: usize, alpha: usize) -> f64 {
        self.p[self.index(x, y, alpha)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.p
    }

    /// `sum_alpha P~(x, y, alpha)`.
    pub fn marginal_xy(&self) -> Vec<f64> {
        self.p
            .chunks(self.nalpha)
            .map(|plane| plane.iter().sum())
            .collect()
    }

    pub fn marginal_alpha(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nalpha];
        for cell in self.p.chunks(self.nalpha) {
            for (o, v) in out.iter_mut().zip(cell) {
                *o += v;
            }
        }
        out
    }

    /// `P~(x, alpha)` stored at `x * nalpha + alpha`.
    pub fn marginal_x_alpha(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nx * self.nalpha];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for a in 0..self.nalpha {
                    out[x * self.nalpha + a] += self.get(x, y, a);
                }
            }
        }
        out
    }

    /// `P~(y, alpha)` stored at `y * nalpha + alpha`.
    pub fn marginal_y_alpha(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ny * self.nalpha];
        for x in 0..self.nx {
            for y in 0..self.ny {
                for a in 0..self.nalpha {
                    out[y * self.nalpha + a] += self.get(x, y, a);
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition with eigenvalues sorted descending.
///
/// Each eigenvector is rotated so that its largest-magnitude entry (the
/// first one on ties) is real and non-negative.
pub fn herm_eig(m: &CMatrix) -> Result<HermEig> {
    check_square(m)?;
    check_finite(m)?;
    let deviation = hermitian_deviation(m);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(HermEig {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let sym = (m + m.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let mut pivot = col[0];
        for z in col.iter() {
            if z.norm() > pivot.norm() {
                pivot = *z;
            }
        }
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        vectors.set_column(dst, &(col * phase));
    }
    Ok(HermEig { values, vectors })
}

fn check_bipartite(m: &CMatrix, nx: usize, ny: usize) -> Result<()> {
    if m.nrows() != nx * ny || m.ncols() != nx * ny {
        return Err(Error::DimensionMismatch(format!(
            "dims ({nx}, {ny}) require a {0}x{0} matrix, got {1}x{2}",
            nx * ny,
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn trace_out_y(m: &CMatrix, nx: usize, ny: usize) -> CMatrix {
    CMatrix::from_fn(nx, nx, |x, xp| {
        (0..ny).map(|y| m[(x * ny + y, xp * ny + y)]).sum()
    })
}

fn trace_out_x(m: &CMatrix, nx: usize, ny: usize) -> CMatrix {
    CMatrix::from_fn(ny, ny, |y, yp| {
        (0..nx).map(|x| m[(x * ny + y, x * ny + yp)]).sum()
    })
}

/// `tr_Y m`, an operator on `H_X`.
pub fn partial_trace_y(m: &CMatrix, nx: usize, ny: usize) -> Result<CMatrix> {
    check_bipartite(m, nx, ny)?;
    Ok(trace_out_y(m, nx, ny))
}

/// `tr_X m`, an operator on `H_Y`.
pub fn partial_trace_x(m: &CMatrix, nx: usize, ny: usize) -> Result<CMatrix> {
    check_bipartite(m, nx, ny)?;
    Ok(trace_out_x(m, nx, ny))
}

/// Partial trace over an arbitrary subset of tensor factors.
///
/// `dims` lists the factor dimensions with the first factor as the slowest
/// index; factors with `keep[k] == false` are traced out. The result is
/// ordered like the kept factors.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[bool]) -> Result<CMatrix> {
    if dims.len() != keep.len() {
        return Err(Error::LengthMismatch {
            left: dims.len(),
            right: keep.len(),
        });
    }
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "factor dims {dims:?} require a {total}x{total} matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let kept: usize = dims
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d)
        .product();
    let mut out = CMatrix::zeros(kept, kept);
    let mut digits = vec![0usize; dims.len()];
    let split = |mut index: usize, digits: &mut [usize]| {
        for k in (0..dims.len()).rev() {
            digits[k] = index % dims[k];
            index /= dims[k];
        }
    };
    let kept_index = |digits: &[usize]| {
        digits
            .iter()
            .zip(dims)
            .zip(keep)
            .filter(|(_, &k)| k)
            .fold(0usize, |acc, ((&d, &n), _)| acc * n + d)
    };
    let traced_index = |digits: &[usize]| {
        digits
            .iter()
            .zip(dims)
            .zip(keep)
            .filter(|(_, &k)| !k)
            .fold(0usize, |acc, ((&d, &n), _)| acc * n + d)
    };
    let mut other = vec![0usize; dims.len()];
    for i in 0..total {
        split(i, &mut digits);
        let (ki, ti) = (kept_index(&digits), traced_index(&digits));
        for j in 0..total {
            split(j, &mut other);
            if traced_index(&other) == ti {
                out[(ki, kept_index(&other))] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Shannon entropy in bits of non-negative weights; entries `<= 0` contribute nothing.
pub(crate) fn entropy_bits<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let h: f64 = values
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    h.max(0.0)
}

/// `-sum p log2 p` with `0 log 0 = 0`.
pub fn shannon_entropy(p: &ProbDist) -> f64 {
    entropy_bits(p.as_slice().iter().copied())
}

/// Spectrum of a density matrix, with eigenvalues in `[-PSD_TOL, 0)` clamped to zero.
pub fn state_spectrum(rho: &CMatrix) -> Result<Vec<f64>> {
    let eig = herm_eig(rho)?;
    if let Some(&min_eigenvalue) = eig.values.last() {
        if min_eigenvalue < -PSD_TOL {
            return Err(Error::NegativeEigenvalue { min_eigenvalue });
        }
    }
    Ok(eig.values.into_iter().map(|v| v.max(0.0)).collect())
}

/// Von Neumann entropy `S(rho)` in bits.
pub fn vn_entropy(rho: &CMatrix) -> Result<f64> {
    check_square(rho)?;
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceNotUnit { trace });
    }
    Ok(entropy_bits(state_spectrum(rho)?))
}

/// `S(X:Y) = S(tr_Y rho) + S(tr_X rho) - S(rho)`.
pub fn mutual_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(vn_entropy(&rho.reduced_x())? + vn_entropy(&rho.reduced_y())? - vn_entropy(rho.matrix())?)
}

/// Classical conditional mutual information `H(X:Y|alpha)` in bits.
///
/// Evaluated as `sum P~ log[P~(x,y,a) P~(a) / (P~(x,a) P~(y,a))]`, which is
/// algebraically the four-entropy combination but does not cancel large
/// terms against each other near zero.
pub fn classical_cmi(pt: &TriJointDist) -> f64 {
    let na = pt.nalpha();
    let pa = pt.marginal_alpha();
    let pxa = pt.marginal_x_alpha();
    let pya = pt.marginal_y_alpha();
    let mut cmi = 0.0;
    for x in 0..pt.nx() {
        for y in 0..pt.ny() {
            for a in 0..na {
                let p = pt.get(x, y, a);
                if p > 0.0 {
                    cmi += p * ((p * pa[a]) / (pxa[x * na + a] * pya[y * na + a])).log2();
                }
            }
        }
    }
    cmi
}

/// `sum_alpha w_alpha S_{rho^alpha}(X:Y)`, i.e. `S_sigma(X:Y|alpha)` for
/// the block-diagonal extension of the mixture.
pub fn quantum_cmi_sigma(weights: &ProbDist, components: &[DensityMatrix]) -> Result<f64> {
    if weights.len() != components.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: components.len(),
        });
    }
    check_common_dims(components)?;
    let mut total = 0.0;
    for (&w, rho) in weights.as_slice().iter().zip(components) {
        if w > 0.0 {
            total += w * mutual_entropy(rho)?;
        }
    }
    Ok(total)
}

pub(crate) fn check_common_dims(components: &[DensityMatrix]) -> Result<()> {
    if let Some(first) = components.first() {
        for c in components {
            if (c.nx(), c.ny()) != (first.nx(), first.ny()) {
                return Err(Error::DimensionMismatch(format!(
                    "component dims ({}, {}) differ from ({}, {})",
                    c.nx(),
                    c.ny(),
                    first.nx(),
                    first.ny()
                )));
            }
        }
    }
    Ok(())
}
