//! Named states and random generators used by tests, benchmarks and the CLI.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::tensor::{CMatrix, CVector, DensityMatrix, JointDist};

/// `|Phi+> = (|00> + |11>)/sqrt(2)`.
pub fn bell_vector() -> CVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_vec(vec![
        Complex64::new(h, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(h, 0.0),
    ])
}

pub fn bell_phi_plus() -> DensityMatrix {
    DensityMatrix::pure(2, 2, &bell_vector()).expect("Bell projector is a valid state")
}

/// `p |Phi+><Phi+| + (1 - p) I/4`, valid for `p` in `[-1/3, 1]`.
pub fn werner(p: f64) -> DensityMatrix {
    let bell = bell_vector();
    let mat = (&bell * bell.adjoint()).scale(p) + CMatrix::identity(4, 4).scale((1.0 - p) / 4.0);
    DensityMatrix::new(2, 2, mat).expect("Werner parameter out of range")
}

/// `|a>|b>` as a density matrix.
pub fn product_pure(a: &CVector, b: &CVector) -> DensityMatrix {
    let v = a.kronecker(b);
    DensityMatrix::pure(a.len(), b.len(), &v).expect("product of unit vectors")
}

/// Matrix of independent standard complex Gaussians.
pub fn random_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Uniformly distributed unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let g = random_gaussian_matrix(n, 1, rng);
    let v = CVector::from_iterator(n, g.iter().copied());
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-distributed unitary via QR with the phase of `R`'s diagonal removed.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = random_gaussian_matrix(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    q
}

/// A `d x nalpha` matrix with orthonormal rows (`d <= nalpha`).
pub fn random_isometry<R: Rng + ?Sized>(d: usize, nalpha: usize, rng: &mut R) -> CMatrix {
    assert!(d <= nalpha);
    let u = random_unitary(nalpha, rng);
    u.rows(0, d).into_owned()
}

/// Random state of the given rank, `G G^dagger / tr`.
pub fn random_density<R: Rng + ?Sized>(nx: usize, ny: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = random_gaussian_matrix(nx * ny, rank, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let mut m = m.unscale(tr);
    // exact Hermitian symmetry
    m = (&m + m.adjoint()).unscale(2.0);
    DensityMatrix::new(nx, ny, m).expect("Gram matrix is a valid state")
}

/// Random point of the probability simplex (flat Dirichlet).
pub fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|v| v / total).collect()
}

/// Random separable state `sum_a w_a |u_a><u_a| (x) |v_a><v_a|`.
pub fn random_separable<R: Rng + ?Sized>(nx: usize, ny: usize, members: usize, rng: &mut R) -> DensityMatrix {
    let w = random_simplex(members, rng);
    let mut m = CMatrix::zeros(nx * ny, nx * ny);
    for wa in w {
        let v = random_pure_vector(nx, rng).kronecker(&random_pure_vector(ny, rng));
        m += (&v * v.adjoint()).scale(wa);
    }
    m = (&m + m.adjoint()).unscale(2.0);
    DensityMatrix::new(nx, ny, m).expect("mixture of product states")
}

pub fn random_joint_dist<R: Rng + ?Sized>(nx: usize, ny: usize, rng: &mut R) -> JointDist {
    JointDist::new(nx, ny, random_simplex(nx * ny, rng)).expect("simplex point")
}

/// Relabels `H_X (x) H_Y` as `H_Y (x) H_X`.
pub fn swap_factors(rho: &DensityMatrix) -> DensityMatrix {
    let (nx, ny) = (rho.nx(), rho.ny());
    let m = rho.matrix();
    let mat = CMatrix::from_fn(nx * ny, nx * ny, |i, j| {
        let (y, x) = (i / nx, i % nx);
        let (yp, xp) = (j / nx, j % nx);
        m[(x * ny + y, xp * ny + yp)]
    });
    DensityMatrix::new(ny, nx, mat).expect("relabeling preserves validity")
}
