//! Pure-state ensembles of a bipartite density matrix.
//!
//! Every ensemble `{(w_alpha, psi^alpha)}` of `rho` is obtained from the
//! eigen-ensemble `{(lambda_j, phi^j)}` by a matrix `T` with orthonormal
//! rows (rows indexed by `j`, columns by `alpha`):
//!
//! ```text
//! sqrt(w_alpha) psi^alpha = sum_j T[j, alpha] sqrt(lambda_j) phi^j
//! ```
//!
//! This module maps between the two, evaluates the product condition on
//! `T` through the K-array contractions, and builds the block-diagonal
//! extension `sigma` whose conditional mutual information is the
//! optimizer's objective.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{
    check_common_dims, herm_eig, max_abs, partial_trace, validate_state, vn_entropy, CMatrix, CVector,
    DensityMatrix, ProbDist,
};

/// Eigenvalues at or below `RANK_TOL * lambda_max` count as zero.
pub const RANK_TOL: f64 = 1e-12;
/// Ensemble members with weight at or below this are dropped.
pub const W_TOL: f64 = 1e-12;
/// Tolerance on `max |T T^dagger - I|` for a certified right-unitary matrix.
pub const RIGHT_UNITARY_TOL: f64 = 1e-10;
/// Joint dimension above which K-arrays are never materialized.
pub const K_ARRAY_MATERIALIZE_LIMIT: usize = 16;

/// The eigen-ensemble of a density matrix.
#[derive(Debug, Clone)]
pub struct StandardEnsemble {
    nx: usize,
    ny: usize,
    /// Eigenvalues, descending, clamped at zero.
    pub lambdas: Vec<f64>,
    /// Eigenvectors as columns.
    pub phis: CMatrix,
    /// Number of eigenvalues above `rank_tol * lambda_max`.
    pub rank: usize,
    source: CMatrix,
}

impl StandardEnsemble {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dim(&self) -> usize {
        self.nx * self.ny
    }

    /// The density matrix this ensemble was computed from.
    pub fn source(&self) -> &CMatrix {
        &self.source
    }

    /// `D x d` matrix whose `j`-th column is `sqrt(lambda_j) phi^j`.
    pub fn amplitudes(&self, d: usize) -> CMatrix {
        let mut b = self.phis.columns(0, d).into_owned();
        for (j, mut col) in b.column_iter_mut().enumerate() {
            col *= Complex64::new(self.lambdas[j].sqrt(), 0.0);
        }
        b
    }

    /// `sum_j lambda_j |phi^j><phi^j|`.
    pub fn reconstruct(&self) -> CMatrix {
        let b = self.amplitudes(self.dim());
        &b * b.adjoint()
    }
}

/// Eigen-ensemble of `rho`. `rank_tol` is relative to the largest eigenvalue.
pub fn standard_ensemble(rho: &DensityMatrix, rank_tol: f64) -> Result<StandardEnsemble> {
    let eig = herm_eig(rho.matrix())?;
    let lambdas: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let cutoff = rank_tol * lambdas.first().copied().unwrap_or(0.0);
    let rank = lambdas.iter().filter(|&&l| l > cutoff).count();
    Ok(StandardEnsemble {
        nx: rho.nx(),
        ny: rho.ny(),
        lambdas,
        phis: eig.vectors,
        rank,
        source: rho.matrix().clone(),
    })
}

/// `max |T T^dagger - I|`.
pub fn right_unitary_residual(t: &CMatrix) -> f64 {
    let gram = t * t.adjoint();
    max_abs(&(gram - CMatrix::identity(t.nrows(), t.nrows())))
}

/// A matrix with orthonormal rows: `sum_alpha T[j,alpha] conj(T[j',alpha]) = delta_jj'`.
#[derive(Debug, Clone, PartialEq)]
pub struct RightUnitary {
    t: CMatrix,
}

impl RightUnitary {
    pub fn new(t: CMatrix) -> Result<Self> {
        Self::with_tolerance(t, RIGHT_UNITARY_TOL)
    }

    pub fn with_tolerance(t: CMatrix, tol: f64) -> Result<Self> {
        if t.nrows() > t.ncols() {
            return Err(Error::TooFewMembers {
                nalpha: t.ncols(),
                required: t.nrows(),
            });
        }
        let residual = right_unitary_residual(&t);
        if !(residual <= tol) {
            return Err(Error::NotRightUnitary { residual });
        }
        Ok(Self { t })
    }

    pub(crate) fn from_trusted(t: CMatrix) -> Self {
        Self { t }
    }

    /// `[I_d | 0]`.
    pub fn identity_padded(d: usize, nalpha: usize) -> Self {
        Self {
            t: CMatrix::identity(d, nalpha),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.t
    }

    pub fn into_matrix(self) -> CMatrix {
        self.t
    }

    pub fn rows(&self) -> usize {
        self.t.nrows()
    }

    pub fn nalpha(&self) -> usize {
        self.t.ncols()
    }

    pub fn residual(&self) -> f64 {
        right_unitary_residual(&self.t)
    }
}

/// A weighted set of pure states `{(w_alpha, psi^alpha)}` on `H_XY`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    nx: usize,
    ny: usize,
    pub weights: Vec<f64>,
    /// Normalized states; `None` where the weight is at or below [`W_TOL`].
    pub psis: Vec<Option<CVector>>,
}

impl Ensemble {
    pub fn new(nx: usize, ny: usize, weights: Vec<f64>, psis: Vec<Option<CVector>>) -> Result<Self> {
        if weights.len() != psis.len() {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: psis.len(),
            });
        }
        for psi in psis.iter().flatten() {
            if psi.len() != nx * ny {
                return Err(Error::DimensionMismatch(format!(
                    "member of length {} on a {}x{} space",
                    psi.len(),
                    nx,
                    ny
                )));
            }
        }
        Ok(Self { nx, ny, weights, psis })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Members with a state present.
    pub fn members(&self) -> impl Iterator<Item = (usize, f64, &CVector)> {
        self.weights
            .iter()
            .zip(&self.psis)
            .enumerate()
            .filter_map(|(a, (&w, psi))| psi.as_ref().map(|p| (a, w, p)))
    }

    /// `sum_alpha w_alpha |psi^alpha><psi^alpha|`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.nx * self.ny;
        let mut m = CMatrix::zeros(d, d);
        for (_, w, psi) in self.members() {
            m += (psi * psi.adjoint()).scale(w);
        }
        m
    }
}

/// The ensemble `T E_0`.
///
/// `t` may have between `rank` and `dim` rows; rows past the rank multiply
/// (numerically) vanishing eigenvalues.
pub fn apply_isometry(e0: &StandardEnsemble, t: &RightUnitary) -> Result<Ensemble> {
    let d = t.rows();
    if d < e0.rank || d > e0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "isometry has {d} rows; need between rank {} and dimension {}",
            e0.rank,
            e0.dim()
        )));
    }
    let v = e0.amplitudes(d) * t.matrix();
    let mut weights = Vec::with_capacity(t.nalpha());
    let mut psis = Vec::with_capacity(t.nalpha());
    for col in v.column_iter() {
        let w = col.norm_squared();
        weights.push(w);
        psis.push((w > W_TOL).then(|| col.unscale(w.sqrt())));
    }
    Ensemble::new(e0.nx, e0.ny, weights, psis)
}

/// Symmetric (polar) orthonormalization of the rows of `a`: `(A A^dagger)^{-1/2} A`.
pub(crate) fn polar_rows(a: &CMatrix) -> Result<CMatrix> {
    let gram = a * a.adjoint();
    let gram = (&gram + gram.adjoint()).unscale(2.0);
    let eig = herm_eig(&gram)?;
    let min_gram_eigenvalue = eig.values.last().copied().unwrap_or(0.0);
    let max_gram_eigenvalue = eig.values.first().copied().unwrap_or(0.0);
    if !(min_gram_eigenvalue > 1e-14 * max_gram_eigenvalue.max(1.0)) {
        return Err(Error::RankDeficient { min_gram_eigenvalue });
    }
    let inv_sqrt = CVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&s| Complex64::new(1.0 / s.sqrt(), 0.0)),
    );
    let u = &eig.vectors;
    let mut scaled = u.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= inv_sqrt[k];
    }
    Ok(scaled * u.adjoint() * a)
}

/// Appends rows to `rows` until there are `target` orthonormal ones,
/// orthogonalizing standard basis vectors against what is already there.
fn gram_schmidt_complete(rows: &CMatrix, target: usize) -> CMatrix {
    let n = rows.ncols();
    let mut basis: Vec<CVector> = rows.row_iter().map(|r| r.adjoint()).collect();
    for k in 0..n {
        if basis.len() >= target {
            break;
        }
        let mut v = CVector::zeros(n);
        v[k] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v.unscale(norm));
        }
    }
    CMatrix::from_fn(basis.len(), n, |j, a| basis[j][a].conj())
}

/// The `T` with `T E_0 = ens`, with the rows past the rank completed by
/// Gram-Schmidt up to `min(dim, nalpha)` rows.
pub fn recover_isometry(e0: &StandardEnsemble, ens: &Ensemble) -> Result<RightUnitary> {
    if (ens.nx, ens.ny) != (e0.nx, e0.ny) {
        return Err(Error::DimensionMismatch(format!(
            "ensemble is on {}x{} but the state is on {}x{}",
            ens.nx, ens.ny, e0.nx, e0.ny
        )));
    }
    let nalpha = ens.len();
    if nalpha < e0.rank {
        return Err(Error::TooFewMembers {
            nalpha,
            required: e0.rank,
        });
    }
    let residual = max_abs(&(ens.reconstruct() - e0.source()));
    if residual > 1e-8 {
        return Err(Error::EnsembleMismatch { residual });
    }

    let mut defined = CMatrix::zeros(e0.rank, nalpha);
    for (a, w, psi) in ens.members() {
        for j in 0..e0.rank {
            let overlap = e0.phis.column(j).dotc(psi);
            defined[(j, a)] = overlap * (w / e0.lambdas[j]).sqrt();
        }
    }
    let defined = if e0.rank > 0 { polar_rows(&defined)? } else { defined };
    let t = gram_schmidt_complete(&defined, e0.dim().min(nalpha));
    RightUnitary::new(t)
}

/// The K-array `[K_{xy;x'y'}]_{j,j'} = sqrt(lambda_j) phi^j_xy conj(phi^j'_x'y') sqrt(lambda_j')`.
///
/// Blocks are computed on demand; [`KArray::materialize`] builds the full
/// table only for joint dimensions up to [`K_ARRAY_MATERIALIZE_LIMIT`].
#[derive(Debug, Clone)]
pub struct KArray {
    nx: usize,
    ny: usize,
    amplitudes: CMatrix,
}

pub fn k_array(e0: &StandardEnsemble) -> KArray {
    KArray {
        nx: e0.nx,
        ny: e0.ny,
        amplitudes: e0.amplitudes(e0.rank),
    }
}

impl KArray {
    /// Number of eigen-indices `j` (the rank).
    pub fn depth(&self) -> usize {
        self.amplitudes.ncols()
    }

    /// The `d x d` block at basis pair `(xy, x'y')` (packed indices).
    pub fn block(&self, xy: usize, xpyp: usize) -> CMatrix {
        let d = self.depth();
        CMatrix::from_fn(d, d, |j, jp| {
            self.amplitudes[(xy, j)] * self.amplitudes[(xpyp, jp)].conj()
        })
    }

    /// `K_{x,x'} = sum_y K_{xy;x'y}`.
    pub fn block_x(&self, x: usize, xp: usize) -> CMatrix {
        (0..self.ny).fold(CMatrix::zeros(self.depth(), self.depth()), |acc, y| {
            acc + self.block(x * self.ny + y, xp * self.ny + y)
        })
    }

    /// `K_{y,y'} = sum_x K_{xy;xy'}`.
    pub fn block_y(&self, y: usize, yp: usize) -> CMatrix {
        (0..self.nx).fold(CMatrix::zeros(self.depth(), self.depth()), |acc, x| {
            acc + self.block(x * self.ny + y, x * self.ny + yp)
        })
    }

    /// All blocks indexed `[xy * dim + x'y']`, or `None` above the size limit.
    pub fn materialize(&self) -> Option<Vec<CMatrix>> {
        let n = self.nx * self.ny;
        (n <= K_ARRAY_MATERIALIZE_LIMIT)
            .then(|| (0..n * n).map(|k| self.block(k / n, k % n)).collect())
    }

    /// `Lambda = sum_xy K_{xy;xy}`.
    pub fn lambda_matrix(&self) -> CMatrix {
        (0..self.nx * self.ny).fold(CMatrix::zeros(self.depth(), self.depth()), |acc, k| acc + self.block(k, k))
    }
}

/// `<M>_{alpha alpha} = sum_{j,j'} T[j,alpha] M[j,j'] conj(T[j',alpha])`.
pub fn conjugate_diag(m: &CMatrix, t: &RightUnitary, alpha: usize) -> Result<Complex64> {
    let t = t.matrix();
    if m.nrows() > t.nrows() || m.ncols() > t.nrows() || alpha >= t.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} block against a {}x{} transformation at alpha = {alpha}",
            m.nrows(),
            m.ncols(),
            t.nrows(),
            t.ncols()
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m.nrows() {
        for jp in 0..m.ncols() {
            acc += t[(j, alpha)] * m[(j, jp)] * t[(jp, alpha)].conj();
        }
    }
    Ok(acc)
}

/// The unnormalized member `sqrt(w_alpha) psi^alpha` reshaped to `nx x ny`.
fn reshaped(v: &CVector, nx: usize, ny: usize) -> CMatrix {
    CMatrix::from_fn(nx, ny, |x, y| v[x * ny + y])
}

/// `<K_{x,x'}>_{alpha alpha}` as a matrix over `(x, x')`, computed from the
/// reshaped member `V`: `V V^dagger`.
fn contracted_x(m: &CMatrix) -> CMatrix {
    m * m.adjoint()
}

/// `<K_{y,y'}>_{alpha alpha}` as a matrix over `(y, y')`: `V^T conj(V)`.
fn contracted_y(m: &CMatrix) -> CMatrix {
    m.transpose() * m.conjugate()
}

fn members_of(e0: &StandardEnsemble, t: &RightUnitary) -> Result<CMatrix> {
    let d = t.rows();
    if d < e0.rank || d > e0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "transformation has {d} rows; need between rank {} and dimension {}",
            e0.rank,
            e0.dim()
        )));
    }
    Ok(e0.amplitudes(d) * t.matrix())
}

/// Largest violation of the product condition
/// `<K_{xy;x'y'}> <Lambda> = <K_{x,x'}> <K_{y,y'}>` over all indices and
/// over members with weight above [`W_TOL`].
///
/// Every contraction is taken through the member vectors `T E_0`, which
/// equals the block-by-block `conjugate_diag` evaluation.
pub fn product_condition_residual(e0: &StandardEnsemble, t: &RightUnitary) -> Result<f64> {
    let v = members_of(e0, t)?;
    Ok(member_product_residual(&v, e0.nx, e0.ny))
}

/// The product-condition residual of the `T` implied by an arbitrary
/// ensemble: each `sqrt(w) psi` is first projected onto the support of the
/// state, which is what `T E_0` returns when `T^alpha_j = sqrt(w / lambda_j) <phi^j|psi>`.
/// Unlike [`recover_isometry`] this does not require the ensemble to
/// reconstruct the state.
pub fn projected_product_residual(e0: &StandardEnsemble, ens: &Ensemble) -> Result<f64> {
    if (ens.nx, ens.ny) != (e0.nx, e0.ny) {
        return Err(Error::DimensionMismatch(format!(
            "ensemble is on {}x{} but the state is on {}x{}",
            ens.nx, ens.ny, e0.nx, e0.ny
        )));
    }
    let support = e0.phis.columns(0, e0.rank).into_owned();
    let projector = &support * support.adjoint();
    let mut v = CMatrix::zeros(e0.dim(), ens.len());
    for (a, w, psi) in ens.members() {
        v.set_column(a, &(&projector * psi).scale(w.sqrt()));
    }
    Ok(member_product_residual(&v, e0.nx, e0.ny))
}

fn member_product_residual(v: &CMatrix, nx: usize, ny: usize) -> f64 {
    let mut worst = 0.0_f64;
    for col in v.column_iter() {
        let col = col.into_owned();
        let w = col.norm_squared();
        if w <= W_TOL {
            continue;
        }
        let m = reshaped(&col, nx, ny);
        let kx = contracted_x(&m);
        let ky = contracted_y(&m);
        for x in 0..nx {
            for xp in 0..nx {
                for y in 0..ny {
                    for yp in 0..ny {
                        let kxy = col[x * ny + y] * col[xp * ny + yp].conj();
                        worst = worst.max((kxy * w - kx[(x, xp)] * ky[(y, yp)]).norm());
                    }
                }
            }
        }
    }
    worst
}

/// `max_alpha w_alpha (1 - s_1^2)` where `s_1` is the largest singular value
/// of `psi^alpha` reshaped to `nx x ny`. Zero exactly when every member is a
/// product state.
pub fn corrugation_residual(ens: &Ensemble) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (_, w, psi) in ens.members() {
        let m = reshaped(psi, ens.nx, ens.ny);
        let gram = contracted_x(&m);
        let gram = (&gram + gram.adjoint()).unscale(2.0);
        let eig = herm_eig(&gram)?;
        let tail: f64 = eig.values.iter().skip(1).map(|v| v.max(0.0)).sum();
        worst = worst.max(w * tail);
    }
    Ok(worst)
}

/// A mixture of product states `sum_alpha w_alpha rho_X^alpha (x) rho_Y^alpha`.
#[derive(Debug, Clone)]
pub struct QuantumDecomposition {
    pub weights: Vec<f64>,
    /// Column of `T` each kept member came from.
    pub alphas: Vec<usize>,
    pub rho_x: Vec<CMatrix>,
    pub rho_y: Vec<CMatrix>,
    /// `max |sum w rho_X (x) rho_Y - rho|`.
    pub reconstruction_residual: f64,
    /// Product-condition residual of the transformation it came from.
    pub product_residual: f64,
}

/// `sum_alpha w_alpha rho_x^alpha (x) rho_y^alpha`.
pub fn mixture_of_products(weights: &[f64], rho_x: &[CMatrix], rho_y: &[CMatrix]) -> Result<CMatrix> {
    if weights.len() != rho_x.len() || weights.len() != rho_y.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: rho_x.len().min(rho_y.len()),
        });
    }
    let (Some(ax), Some(ay)) = (rho_x.first(), rho_y.first()) else {
        return Err(Error::DimensionMismatch("empty decomposition".into()));
    };
    let d = ax.nrows() * ay.nrows();
    let mut m = CMatrix::zeros(d, d);
    for ((&w, a), b) in weights.iter().zip(rho_x).zip(rho_y) {
        if a.nrows() * b.nrows() != d || !a.is_square() || !b.is_square() {
            return Err(Error::DimensionMismatch("factor states of differing sizes".into()));
        }
        m += a.kronecker(b).scale(w);
    }
    Ok(m)
}

fn clamp_state(m: CMatrix) -> Result<CMatrix> {
    let sym = (&m + m.adjoint()).unscale(2.0);
    let eig = herm_eig(&sym)?;
    if let Some(&min_eigenvalue) = eig.values.last() {
        if min_eigenvalue >= 0.0 {
            return Ok(sym);
        }
        if min_eigenvalue < -1e-9 {
            return Err(Error::NegativeEigenvalue { min_eigenvalue });
        }
    }
    let mut u = eig.vectors.clone();
    for (k, mut col) in u.column_iter_mut().enumerate() {
        col *= Complex64::new(eig.values[k].max(0.0), 0.0);
    }
    Ok(u * eig.vectors.adjoint())
}

/// Local states `rho_X^alpha = <K_X>_{aa} / w_alpha`, `rho_Y^alpha = <K_Y>_{aa} / w_alpha`
/// with `w_alpha = <Lambda>_{aa}`, for members above `w_tol`.
pub fn extract_local_states(e0: &StandardEnsemble, t: &RightUnitary, w_tol: f64) -> Result<QuantumDecomposition> {
    let v = members_of(e0, t)?;
    let (nx, ny) = (e0.nx, e0.ny);
    let mut weights = Vec::new();
    let mut alphas = Vec::new();
    let mut rho_x = Vec::new();
    let mut rho_y = Vec::new();
    for (alpha, col) in v.column_iter().enumerate() {
        let col = col.into_owned();
        let w = col.norm_squared();
        if w <= w_tol {
            continue;
        }
        let m = reshaped(&col, nx, ny);
        weights.push(w);
        alphas.push(alpha);
        rho_x.push(clamp_state(contracted_x(&m).unscale(w))?);
        rho_y.push(clamp_state(contracted_y(&m).unscale(w))?);
    }
    if weights.is_empty() {
        return Err(Error::DegenerateDecomposition { w_tol });
    }
    let reconstruction_residual = max_abs(&(mixture_of_products(&weights, &rho_x, &rho_y)? - e0.source()));
    let product_residual = product_condition_residual(e0, t)?;
    Ok(QuantumDecomposition {
        weights,
        alphas,
        rho_x,
        rho_y,
        reconstruction_residual,
        product_residual,
    })
}

/// Splits each mixed product component into pure products:
/// `alpha = (mu, a, b)`, `w = P(a|mu) P(b|mu) P(mu)`, `psi = phi_X^{mu a} (x) phi_Y^{mu b}`.
pub fn refine_to_pure_product(weights: &ProbDist, rho_x: &[CMatrix], rho_y: &[CMatrix]) -> Result<Ensemble> {
    if weights.len() != rho_x.len() || weights.len() != rho_y.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: rho_x.len().min(rho_y.len()),
        });
    }
    let (Some(first_x), Some(first_y)) = (rho_x.first(), rho_y.first()) else {
        return Err(Error::DimensionMismatch("empty decomposition".into()));
    };
    let (nx, ny) = (first_x.nrows(), first_y.nrows());
    let mut out_w = Vec::new();
    let mut out_psi = Vec::new();
    for ((&p_mu, a), b) in weights.as_slice().iter().zip(rho_x).zip(rho_y) {
        if a.nrows() != nx || b.nrows() != ny {
            return Err(Error::DimensionMismatch("factor states of differing sizes".into()));
        }
        validate_state(a)?;
        validate_state(b)?;
        let ex = herm_eig(a)?;
        let ey = herm_eig(b)?;
        for (ia, &pa) in ex.values.iter().enumerate() {
            for (ib, &pb) in ey.values.iter().enumerate() {
                let w = pa.max(0.0) * pb.max(0.0) * p_mu;
                if w > W_TOL {
                    out_w.push(w);
                    out_psi.push(Some(ex.vectors.column(ia).kronecker(&ey.vectors.column(ib))));
                }
            }
        }
    }
    Ensemble::new(nx, ny, out_w, out_psi)
}

/// `sigma = sum_alpha w_alpha |alpha><alpha| (x) rho^alpha` on `H_alpha (x) H_X (x) H_Y`,
/// with `alpha` the slowest index.
#[derive(Debug, Clone)]
pub struct Sigma {
    nx: usize,
    ny: usize,
    nalpha: usize,
    state: DensityMatrix,
}

pub fn build_sigma(weights: &ProbDist, components: &[DensityMatrix]) -> Result<Sigma> {
    if weights.len() != components.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: components.len(),
        });
    }
    check_common_dims(components)?;
    let first = components
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no components".into()))?;
    let (nx, ny, nalpha) = (first.nx(), first.ny(), components.len());
    let d = nx * ny;
    let mut mat = CMatrix::zeros(nalpha * d, nalpha * d);
    for (a, (&w, rho)) in weights.as_slice().iter().zip(components).enumerate() {
        mat.view_mut((a * d, a * d), (d, d))
            .copy_from(&rho.matrix().scale(w));
    }
    let state = DensityMatrix::new(nalpha, d, mat)?;
    Ok(Sigma { nx, ny, nalpha, state })
}

impl Sigma {
    pub fn nalpha(&self) -> usize {
        self.nalpha
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    /// `tr_alpha sigma`.
    pub fn trace_alpha(&self) -> CMatrix {
        self.state.reduced_y()
    }

    fn entropy_keeping(&self, keep: [bool; 3]) -> Result<f64> {
        let reduced = partial_trace(self.state.matrix(), &[self.nalpha, self.nx, self.ny], &keep)?;
        vn_entropy(&reduced)
    }

    /// `S(X,alpha) + S(Y,alpha) - S(X,Y,alpha) - S(alpha)` evaluated on the
    /// full matrix, without using its block structure.
    pub fn conditional_mutual_entropy(&self) -> Result<f64> {
        Ok(self.entropy_keeping([true, true, false])? + self.entropy_keeping([true, false, true])?
            - vn_entropy(self.state.matrix())?
            - self.entropy_keeping([true, false, false])?)
    }
}

/// Real matrix helper for tests that need `Lambda` as a complex diagonal.
pub fn diag_matrix(values: &[f64]) -> CMatrix {
    DMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ))
}
