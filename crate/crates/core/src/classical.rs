//! Classical separability of joint distributions.
//!
//! A distribution `P(x, y)` is N-separable when it admits an extension
//! `P~(x, y, alpha)` with `N` values of `alpha` that reproduces `P` on
//! summing out `alpha` and is conditionally independent given `alpha`.
//! Two explicit extensions always exist (one lattice point per plane, and
//! one lattice line per plane); for smaller `N` the best extension is found
//! by minimizing `H(X:Y|alpha)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimizer::{OptimizerOptions, RestartSummary};
use crate::states::random_simplex;
use crate::tensor::{classical_cmi, JointDist, TriJointDist, PROB_TOL};

/// An extension of a joint distribution together with its residuals
/// against the source distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDecomposition {
    pub pt: TriJointDist,
    /// `max |sum_alpha P~(x,y,alpha) - P(x,y)|`.
    pub marginal_residual: f64,
    /// `max |P~(x,y,alpha) P~(alpha) - P~(x,alpha) P~(y,alpha)|`.
    pub independence_residual: f64,
}

impl ClassicalDecomposition {
    /// Whether this is a valid N-separable decomposition at `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.marginal_residual <= tol && self.independence_residual <= tol
    }
}

/// Conditional distributions `q(alpha | x, y)`, one simplex per cell,
/// stored with the same layout as [`TriJointDist`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalModel {
    nx: usize,
    ny: usize,
    nalpha: usize,
    q: Vec<f64>,
}

impl ConditionalModel {
    pub fn new(nx: usize, ny: usize, nalpha: usize, q: Vec<f64>) -> Result<Self> {
        if nalpha == 0 || q.len() != nx * ny * nalpha {
            return Err(Error::DimensionMismatch(format!(
                "dims ({nx}, {ny}, {nalpha}) require {} entries, got {}",
                nx * ny * nalpha,
                q.len()
            )));
        }
        for (cell, row) in q.chunks(nalpha).enumerate() {
            if let Some((k, &value)) = row.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::InvalidProbability {
                    index: cell * nalpha + k,
                    value,
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_TOL {
                return Err(Error::ProbabilitySum { sum });
            }
        }
        Ok(Self { nx, ny, nalpha, q })
    }

    pub fn uniform(nx: usize, ny: usize, nalpha: usize) -> Self {
        Self {
            nx,
            ny,
            nalpha,
            q: vec![1.0 / nalpha as f64; nx * ny * nalpha],
        }
    }

    pub fn nalpha(&self) -> usize {
        self.nalpha
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// `P~(x, y, alpha) = P(x, y) q(alpha | x, y)`.
    pub fn extension(&self, p: &JointDist) -> TriJointDist {
        let pt = p
            .as_slice()
            .iter()
            .zip(self.q.chunks(self.nalpha))
            .flat_map(|(&pxy, row)| row.iter().map(move |&q| pxy * q))
            .collect();
        TriJointDist::from_raw(self.nx, self.ny, self.nalpha, pt)
    }
}

fn marginal_residual(p: &JointDist, pt: &TriJointDist) -> f64 {
    pt.marginal_xy()
        .iter()
        .zip(p.as_slice())
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
}

/// `max |P~(x,y,alpha) P~(alpha) - P~(x,alpha) P~(y,alpha)|`.
pub fn independence_residual(pt: &TriJointDist) -> f64 {
    let na = pt.nalpha();
    let pa = pt.marginal_alpha();
    let pxa = pt.marginal_x_alpha();
    let pya = pt.marginal_y_alpha();
    let mut worst = 0.0_f64;
    for x in 0..pt.nx() {
        for y in 0..pt.ny() {
            for a in 0..na {
                let lhs = pt.get(x, y, a) * pa[a];
                let rhs = pxa[x * na + a] * pya[y * na + a];
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    worst
}

fn decomposition(p: &JointDist, pt: TriJointDist) -> ClassicalDecomposition {
    ClassicalDecomposition {
        marginal_residual: marginal_residual(p, &pt),
        independence_residual: independence_residual(&pt),
        pt,
    }
}

/// One `alpha` plane per lattice point: `P~(x,y,alpha) = P(x,y) delta(alpha, x*ny + y)`.
pub fn construct_point_decomposition(p: &JointDist) -> ClassicalDecomposition {
    let n = p.nx() * p.ny();
    let mut pt = vec![0.0; n * n];
    for (cell, &v) in p.as_slice().iter().enumerate() {
        pt[cell * n + cell] = v;
    }
    decomposition(p, TriJointDist::from_raw(p.nx(), p.ny(), n, pt))
}

/// One `alpha` plane per lattice line. Lines run along the larger factor,
/// so `nalpha = min(nx, ny)`.
pub fn construct_line_decomposition(p: &JointDist) -> ClassicalDecomposition {
    let (nx, ny) = (p.nx(), p.ny());
    let nalpha = nx.min(ny);
    let mut pt = vec![0.0; nx * ny * nalpha];
    for x in 0..nx {
        for y in 0..ny {
            let alpha = if nx >= ny { y } else { x };
            pt[(x * ny + y) * nalpha + alpha] = p.get(x, y);
        }
    }
    decomposition(p, TriJointDist::from_raw(nx, ny, nalpha, pt))
}

/// Residuals of a candidate extension against `p`.
pub fn check_classical_decomposition(p: &JointDist, pt: &TriJointDist) -> Result<ClassicalDecomposition> {
    if (p.nx(), p.ny()) != (pt.nx(), pt.ny()) {
        return Err(Error::DimensionMismatch(format!(
            "distribution is {}x{} but extension is {}x{}x{}",
            p.nx(),
            p.ny(),
            pt.nx(),
            pt.ny(),
            pt.nalpha()
        )));
    }
    Ok(decomposition(p, pt.clone()))
}

/// Result of minimizing `H(X:Y|alpha)` over extensions of `P`.
#[derive(Debug, Clone)]
pub struct ClassicalEof {
    /// `E_F^(N)(P) = 1/2 min H(X:Y|alpha)` in bits.
    pub value: f64,
    pub best: ClassicalDecomposition,
    /// Accepted objective values of the winning restart.
    pub trace: Vec<f64>,
    pub restarts: Vec<RestartSummary>,
}

/// Line-decomposition witness as a conditional model padded to `nalpha` planes.
fn witness_model(p: &JointDist, nalpha: usize) -> Option<ConditionalModel> {
    let (nx, ny) = (p.nx(), p.ny());
    if nalpha < nx.min(ny) {
        return None;
    }
    let mut q = vec![0.0; nx * ny * nalpha];
    for x in 0..nx {
        for y in 0..ny {
            let alpha = if nx >= ny { y } else { x };
            q[(x * ny + y) * nalpha + alpha] = 1.0;
        }
    }
    Some(ConditionalModel { nx, ny, nalpha, q })
}

fn initial_model(p: &JointDist, nalpha: usize, restart: usize, rng: &mut ChaCha8Rng) -> ConditionalModel {
    let witness = witness_model(p, nalpha);
    let offset = usize::from(witness.is_some());
    match (restart, witness) {
        (0, Some(w)) => w,
        (r, _) if r == offset => ConditionalModel::uniform(p.nx(), p.ny(), nalpha),
        _ => {
            let q = (0..p.nx() * p.ny()).flat_map(|_| random_simplex(nalpha, rng)).collect();
            ConditionalModel {
                nx: p.nx(),
                ny: p.ny(),
                nalpha,
                q,
            }
        }
    }
}

/// Half the CMI in bits, and `d/dq(alpha|x,y)` divided by `P(x,y)`.
fn objective_and_direction(p: &JointDist, model: &ConditionalModel) -> (f64, Vec<f64>) {
    let pt = model.extension(p);
    let na = model.nalpha;
    let pa = pt.marginal_alpha();
    let pxa = pt.marginal_x_alpha();
    let pya = pt.marginal_y_alpha();
    let mut g = vec![0.0; pt.as_slice().len()];
    let mut cmi = 0.0;
    for x in 0..p.nx() {
        for y in 0..p.ny() {
            for a in 0..na {
                let v = pt.get(x, y, a);
                if v > 0.0 {
                    let ratio = ((v * pa[a]) / (pxa[x * na + a] * pya[y * na + a])).log2();
                    cmi += v * ratio;
                    g[pt.index(x, y, a)] = 0.5 * ratio;
                }
            }
        }
    }
    (0.5 * cmi, g)
}

/// Multiplicative (softmax-coordinate) step on every cell with `P(x,y) > 0`.
fn step_model(p: &JointDist, model: &ConditionalModel, g: &[f64], eta: f64) -> ConditionalModel {
    let na = model.nalpha;
    let mut q = model.q.clone();
    for (cell, &pxy) in p.as_slice().iter().enumerate() {
        if pxy <= 0.0 {
            continue;
        }
        let row = &mut q[cell * na..(cell + 1) * na];
        let grow = &g[cell * na..(cell + 1) * na];
        let shift = grow
            .iter()
            .zip(row.iter())
            .filter(|(_, &qa)| qa > 0.0)
            .fold(f64::INFINITY, |m, (&ga, _)| m.min(ga));
        for (qa, &ga) in row.iter_mut().zip(grow) {
            if *qa > 0.0 {
                *qa *= (-eta * (ga - shift)).exp();
            }
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|qa| *qa /= total);
    }
    ConditionalModel { q, ..model.clone() }
}

const MAX_HALVINGS: usize = 60;
const STALL_WINDOW: usize = 25;

fn relax(p: &JointDist, mut model: ConditionalModel, opts: &OptimizerOptions) -> (ConditionalModel, Vec<f64>, usize) {
    let (mut f, mut g) = objective_and_direction(p, &model);
    let mut trace = vec![f];
    let mut iterations = 0;
    while iterations < opts.max_iters {
        iterations += 1;
        let mut eta = opts.step_init;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate = step_model(p, &model, &g, eta);
            let (fc, gc) = objective_and_direction(p, &candidate);
            if fc < f {
                accepted = Some((candidate, fc, gc));
                break;
            }
            eta *= 0.5;
        }
        let Some((candidate, fc, gc)) = accepted else {
            break;
        };
        model = candidate;
        f = fc;
        g = gc;
        trace.push(f);
        if trace.len() > STALL_WINDOW && trace[trace.len() - 1 - STALL_WINDOW] - f < opts.tol_objective {
            break;
        }
    }
    (model, trace, iterations)
}

/// Minimizes `1/2 H(X:Y|alpha)` over extensions of `p` with `nalpha` planes.
///
/// Extensions are parametrized as `P(x,y) q(alpha|x,y)`, so every iterate
/// reproduces `p` exactly up to rounding. Restarts are independent and run
/// on the rayon pool; the lowest value wins, ties going to the lower index.
pub fn classical_eof(p: &JointDist, nalpha: usize, opts: &OptimizerOptions) -> Result<ClassicalEof> {
    if nalpha == 0 {
        return Err(Error::InvalidOption("nalpha must be at least 1".into()));
    }
    opts.validate_common()?;

    let runs: Vec<(ConditionalModel, Vec<f64>, usize)> = (0..opts.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(restart as u64);
            let init = initial_model(p, nalpha, restart, &mut rng);
            relax(p, init, opts)
        })
        .collect();

    let restarts: Vec<RestartSummary> = runs
        .iter()
        .enumerate()
        .map(|(index, (_, trace, iterations))| RestartSummary {
            index,
            value: *trace.last().expect("trace starts with the initial value"),
            iterations: *iterations,
        })
        .collect();
    let best_index = restarts
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value).then(a.index.cmp(&b.index)))
        .map(|r| r.index)
        .expect("at least one restart");
    let (model, trace, _) = runs.into_iter().nth(best_index).expect("index in range");
    let best = decomposition(p, model.extension(p));
    Ok(ClassicalEof {
        value: 0.5 * classical_cmi(&best.pt),
        best,
        trace,
        restarts,
    })
}
