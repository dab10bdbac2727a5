//! Entanglement of formation by descent over right-unitary matrices.
//!
//! The search variable is a `d x nalpha` matrix `T` with orthonormal rows,
//! `d = rank(rho)`. Each step moves along the negative Riemannian gradient
//! (the Euclidean gradient projected onto the tangent space of the
//! row-orthonormal manifold), then retracts with the polar factor. Since
//! every iterate is an exact HJW transformation, every iterate's ensemble
//! reconstructs `rho`; only the average reduced entropy is being lowered.

use std::f64::consts::LN_2;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ensembles::{
    apply_isometry, corrugation_residual, extract_local_states, polar_rows, product_condition_residual,
    recover_isometry, right_unitary_residual, standard_ensemble, Ensemble, QuantumDecomposition, RightUnitary,
    StandardEnsemble, RANK_TOL, W_TOL,
};
use crate::error::{Error, Result};
use crate::states::random_isometry;
use crate::tensor::{herm_eig, CMatrix, CVector, DensityMatrix};

/// Floor applied to reduced-state eigenvalues inside logarithms of the gradient.
pub const LOG_FLOOR: f64 = 1e-14;
/// Reconstruction residual an extracted decomposition must meet to certify separability.
pub const DECOMPOSITION_TOL: f64 = 1e-6;
/// Off-diagonal magnitude below which a state counts as diagonal in the product basis.
const DIAGONAL_TOL: f64 = 1e-12;
/// Iterates must satisfy `T T^dagger = I` to this accuracy when handed to [`objective`].
const OBJECTIVE_UNITARITY_TOL: f64 = 1e-8;
const RETRACTION_TOL: f64 = 1e-12;
const MAX_HALVINGS: usize = 60;
const STALL_WINDOW: usize = 25;
const BB_MAX_STEP: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    /// Ensemble cardinality; `None` means `(nx * ny)^2`.
    pub nalpha: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub tol_objective: f64,
    /// CMI (bits) at or below which a result counts as separable.
    pub tol_separable: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            nalpha: None,
            restarts: 8,
            max_iters: 5_000,
            step_init: 0.1,
            tol_objective: 1e-10,
            tol_separable: 1e-6,
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    /// Defaults for the classical relaxation.
    pub fn classical() -> Self {
        Self {
            max_iters: 10_000,
            step_init: 1.0,
            ..Self::default()
        }
    }

    pub(crate) fn validate_common(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidOption("restarts must be at least 1".into()));
        }
        for (name, v) in [
            ("step_init", self.step_init),
            ("tol_objective", self.tol_objective),
            ("tol_separable", self.tol_separable),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidOption(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartSummary {
    pub index: usize,
    pub value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    SeparableAtTolerance,
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::SeparableAtTolerance => "separable-at-tolerance",
            Verdict::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone)]
pub struct EofResult {
    /// Entanglement-of-formation estimate in bits.
    pub value: f64,
    pub ensemble: Ensemble,
    /// The `rank x nalpha` transformation that produced `ensemble`.
    pub isometry: RightUnitary,
    /// `S_sigma(X:Y|alpha) = 2 * value`.
    pub cmi: f64,
    pub product_residual: f64,
    pub corrugation: f64,
    pub verdict: Verdict,
    /// Accepted objective values of the winning restart.
    pub trace: Vec<f64>,
    pub restarts: Vec<RestartSummary>,
    /// Largest `max |T T^dagger - I|` over every accepted iterate of every restart.
    pub max_right_unitary_residual: f64,
}

/// Objective and Euclidean gradient over `d x nalpha` matrices.
///
/// For a member `v = B t_alpha` reshaped to `V` with `R = V V^dagger` and
/// `w = tr R`, the contribution `w S(R / w)` has differential
/// `Re tr(Gamma^dagger dV)` with `Gamma = 2 (ln w - ln R) V / ln 2`.
#[derive(Debug, Clone)]
pub struct EofObjective {
    nx: usize,
    ny: usize,
    amplitudes: CMatrix,
}

impl EofObjective {
    pub fn new(e0: &StandardEnsemble, d: usize) -> Self {
        Self {
            nx: e0.nx(),
            ny: e0.ny(),
            amplitudes: e0.amplitudes(d),
        }
    }

    pub fn rows(&self) -> usize {
        self.amplitudes.ncols()
    }

    fn reshape(&self, v: &CVector) -> CMatrix {
        CMatrix::from_fn(self.nx, self.ny, |x, y| v[x * self.ny + y])
    }

    /// `sum_alpha w_alpha S(tr_Y pi(psi^alpha))` in bits, for any `d x nalpha` matrix.
    pub fn value(&self, t: &CMatrix) -> f64 {
        let members = &self.amplitudes * t;
        let mut total = 0.0;
        for col in members.column_iter() {
            let v = col.into_owned();
            let w = v.norm_squared();
            if w <= W_TOL {
                continue;
            }
            let m = self.reshape(&v);
            let r = &m * m.adjoint();
            let eig = herm_eig(&((&r + r.adjoint()).unscale(2.0))).expect("Gram matrix is Hermitian");
            total += eig
                .values
                .iter()
                .filter(|&&ri| ri > 0.0)
                .map(|&ri| -ri * (ri / w).log2())
                .sum::<f64>();
        }
        total.max(0.0)
    }

    /// Value and Euclidean gradient `G` with `df = Re tr(G^dagger dT)`.
    pub fn value_and_gradient(&self, t: &CMatrix) -> (f64, CMatrix) {
        let members = &self.amplitudes * t;
        let mut total = 0.0;
        let mut gamma = CMatrix::zeros(members.nrows(), members.ncols());
        for (alpha, col) in members.column_iter().enumerate() {
            let v = col.into_owned();
            let w = v.norm_squared();
            if w <= W_TOL {
                continue;
            }
            let m = self.reshape(&v);
            let r = &m * m.adjoint();
            let eig = herm_eig(&((&r + r.adjoint()).unscale(2.0))).expect("Gram matrix is Hermitian");
            total += eig
                .values
                .iter()
                .filter(|&&ri| ri > 0.0)
                .map(|&ri| -ri * (ri / w).log2())
                .sum::<f64>();

            // (ln w - ln R) with ln R floored, built from the eigenpairs of R.
            let ln_w = w.ln();
            let mut scaled = eig.vectors.clone();
            for (k, mut c) in scaled.column_iter_mut().enumerate() {
                c *= Complex64::new(ln_w - eig.values[k].max(LOG_FLOOR).ln(), 0.0);
            }
            let g = scaled * eig.vectors.adjoint();
            let grad_v = (g * m).scale(2.0 / LN_2);
            for x in 0..self.nx {
                for y in 0..self.ny {
                    gamma[(x * self.ny + y, alpha)] = grad_v[(x, y)];
                }
            }
        }
        (total.max(0.0), self.amplitudes.adjoint() * gamma)
    }
}

/// Projection of an ambient direction onto the tangent space at `t`:
/// `G - sym(G T^dagger) T`.
pub fn project_tangent(t: &CMatrix, g: &CMatrix) -> CMatrix {
    let gt = g * t.adjoint();
    let sym = (&gt + gt.adjoint()).unscale(2.0);
    g - sym * t
}

/// Polar retraction onto the row-orthonormal manifold.
pub fn retract(t_ambient: &CMatrix) -> Result<RightUnitary> {
    if t_ambient.nrows() > t_ambient.ncols() {
        return Err(Error::TooFewMembers {
            nalpha: t_ambient.ncols(),
            required: t_ambient.nrows(),
        });
    }
    let mut t = polar_rows(t_ambient)?;
    if right_unitary_residual(&t) > RETRACTION_TOL {
        t = polar_rows(&t)?;
    }
    RightUnitary::with_tolerance(t, RETRACTION_TOL)
}

/// The average reduced entropy of the ensemble `T E_0`, in bits.
pub fn objective(e0: &StandardEnsemble, t: &RightUnitary) -> Result<f64> {
    let residual = t.residual();
    if residual > OBJECTIVE_UNITARITY_TOL {
        return Err(Error::NotRightUnitary { residual });
    }
    if t.rows() < e0.rank || t.rows() > e0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "transformation has {} rows; need between rank {} and dimension {}",
            t.rows(),
            e0.rank,
            e0.dim()
        )));
    }
    Ok(EofObjective::new(e0, t.rows()).value(t.matrix()))
}

fn is_diagonal(rho: &DensityMatrix) -> bool {
    let m = rho.matrix();
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() <= DIAGONAL_TOL))
}

/// For a state diagonal in the product basis, the lifted line decomposition:
/// one product member per value of the smaller factor.
fn diagonal_witness(rho: &DensityMatrix, e0: &StandardEnsemble, nalpha: usize) -> Option<CMatrix> {
    let (nx, ny) = (rho.nx(), rho.ny());
    if !is_diagonal(rho) || nalpha < nx.min(ny) {
        return None;
    }
    let p: Vec<f64> = (0..nx * ny).map(|k| rho.matrix()[(k, k)].re.max(0.0)).collect();
    let mut weights = vec![0.0; nalpha];
    let mut psis = vec![None; nalpha];
    for alpha in 0..nx.min(ny) {
        let mut v = CVector::zeros(nx * ny);
        for x in 0..nx {
            for y in 0..ny {
                let on_line = if nx >= ny { y == alpha } else { x == alpha };
                if on_line {
                    v[x * ny + y] = Complex64::new(p[x * ny + y].sqrt(), 0.0);
                }
            }
        }
        let w = v.norm_squared();
        if w > 0.0 {
            weights[alpha] = w;
            psis[alpha] = Some(v.unscale(w.sqrt()));
        }
    }
    let ens = Ensemble::new(nx, ny, weights, psis).ok()?;
    let t = recover_isometry(e0, &ens).ok()?;
    Some(t.matrix().rows(0, e0.rank).into_owned())
}

struct RestartRun {
    t: CMatrix,
    trace: Vec<f64>,
    iterations: usize,
    max_residual: f64,
}

/// Barzilai-Borwein step `<s, s> / |<s, y>|` from the last displacement and
/// change in Riemannian gradient, or `None` when undefined.
fn bb_step(s: &CMatrix, y: &CMatrix) -> Option<f64> {
    let ss = s.norm_squared();
    let sy = s.zip_fold(y, 0.0, |acc, a, b| acc + (a.conj() * b).re).abs();
    let eta = ss / sy;
    (eta.is_finite() && eta > 0.0).then_some(eta.min(BB_MAX_STEP))
}

fn descend(objective: &EofObjective, t0: CMatrix, opts: &OptimizerOptions) -> RestartRun {
    let mut t = t0;
    let mut max_residual = right_unitary_residual(&t);
    let (mut f, g) = objective.value_and_gradient(&t);
    let mut direction = project_tangent(&t, &g);
    let mut trace = vec![f];
    let mut stalled = 0;
    let mut iterations = 0;
    let mut eta_init = opts.step_init;
    while iterations < opts.max_iters {
        iterations += 1;
        let mut eta = eta_init;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            if let Ok(candidate) = retract(&(&t - direction.scale(eta))) {
                let fc = objective.value(candidate.matrix());
                if fc < f {
                    accepted = Some((candidate.into_matrix(), fc));
                    break;
                }
            }
            eta *= 0.5;
        }
        let Some((next, fc)) = accepted else {
            break;
        };
        let improvement = (f - fc) / f.abs().max(f64::MIN_POSITIVE);
        let (fn_, gn) = objective.value_and_gradient(&next);
        let next_direction = project_tangent(&next, &gn);
        eta_init = bb_step(&(&next - &t), &(&next_direction - &direction)).unwrap_or(opts.step_init);
        t = next;
        direction = next_direction;
        max_residual = max_residual.max(right_unitary_residual(&t));
        f = fn_;
        trace.push(f);
        if improvement < opts.tol_objective {
            stalled += 1;
            if stalled >= STALL_WINDOW {
                break;
            }
        } else {
            stalled = 0;
        }
    }
    RestartRun {
        t,
        trace,
        iterations,
        max_residual,
    }
}

/// Minimizes the average reduced entropy over `rank x nalpha` right-unitary
/// matrices, best of `opts.restarts` independent restarts.
///
/// Restart 0 starts from the lifted line decomposition when `rho` is
/// diagonal in the product basis, the next from `[I | 0]`, the rest from
/// random orthonormal rows.
pub fn minimize_eof(rho: &DensityMatrix, opts: &OptimizerOptions) -> Result<EofResult> {
    opts.validate_common()?;
    let e0 = standard_ensemble(rho, RANK_TOL)?;
    let d = e0.rank;
    let nalpha = opts.nalpha.unwrap_or(e0.dim() * e0.dim());
    if nalpha < d {
        return Err(Error::TooFewMembers { nalpha, required: d });
    }
    let objective = EofObjective::new(&e0, d);
    let witness = diagonal_witness(rho, &e0, nalpha);
    let offset = usize::from(witness.is_some());

    let runs: Vec<RestartRun> = (0..opts.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(restart as u64);
            let t0 = match (restart, &witness) {
                (0, Some(w)) => w.clone(),
                (r, _) if r == offset => CMatrix::identity(d, nalpha),
                _ => random_isometry(d, nalpha, &mut rng),
            };
            descend(&objective, t0, opts)
        })
        .collect();

    let restarts: Vec<RestartSummary> = runs
        .iter()
        .enumerate()
        .map(|(index, run)| RestartSummary {
            index,
            value: *run.trace.last().expect("trace holds the initial value"),
            iterations: run.iterations,
        })
        .collect();
    let max_right_unitary_residual = runs.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let best = restarts
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value).then(a.index.cmp(&b.index)))
        .map(|r| r.index)
        .expect("at least one restart");
    let run = runs.into_iter().nth(best).expect("index in range");

    let value = *run.trace.last().expect("trace holds the initial value");
    let isometry = RightUnitary::from_trusted(run.t);
    let ensemble = apply_isometry(&e0, &isometry)?;
    let cmi = 2.0 * value;
    Ok(EofResult {
        value,
        product_residual: product_condition_residual(&e0, &isometry)?,
        corrugation: corrugation_residual(&ensemble)?,
        ensemble,
        isometry,
        cmi,
        verdict: if cmi <= opts.tol_separable {
            Verdict::SeparableAtTolerance
        } else {
            Verdict::Undetermined
        },
        trace: run.trace,
        restarts,
        max_right_unitary_residual,
    })
}

#[derive(Debug, Clone)]
pub struct SeparabilityOutcome {
    pub verdict: Verdict,
    /// Present only for a separable verdict.
    pub decomposition: Option<QuantumDecomposition>,
    pub eof: EofResult,
}

/// Runs [`minimize_eof`] and, when the CMI is within tolerance, extracts
/// the product decomposition and checks that it reconstructs `rho`.
///
/// Never reports entanglement: failing to reach zero proves nothing.
pub fn separability_test(rho: &DensityMatrix, opts: &OptimizerOptions) -> Result<SeparabilityOutcome> {
    let mut eof = minimize_eof(rho, opts)?;
    let mut decomposition = None;
    if eof.cmi <= opts.tol_separable {
        let e0 = standard_ensemble(rho, RANK_TOL)?;
        let dec = extract_local_states(&e0, &eof.isometry, W_TOL)?;
        if dec.reconstruction_residual <= DECOMPOSITION_TOL {
            decomposition = Some(dec);
        }
    }
    eof.verdict = if decomposition.is_some() {
        Verdict::SeparableAtTolerance
    } else {
        Verdict::Undetermined
    };
    Ok(SeparabilityOutcome {
        verdict: eof.verdict,
        decomposition,
        eof,
    })
}
