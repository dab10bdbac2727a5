use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sepdec::ensembles::{diag_matrix, RANK_TOL};
use sepdec::optimizer::EofObjective;
use sepdec::oracles::partial_transpose_min_eigenvalue;
use sepdec::states::{random_density, random_isometry, random_joint_dist, random_pure_vector, random_simplex, random_unitary};
use sepdec::tensor::max_abs;
use sepdec::*;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3).prop_filter("non-trivial", |(a, b)| a * b > 1)
}

fn components(nx: usize, ny: usize, n: usize, rng: &mut ChaCha8Rng) -> Vec<DensityMatrix> {
    (0..n)
        .map(|_| {
            let rank = rng.random_range(1..=nx * ny);
            random_density(nx, ny, rank, rng)
        })
        .collect()
}

fn local_unitary(rho: &DensityMatrix, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let u = random_unitary(rho.nx(), rng).kronecker(&random_unitary(rho.ny(), rng));
    let m = &u * rho.matrix() * u.adjoint();
    DensityMatrix::new(rho.nx(), rho.ny(), (&m + m.adjoint()).unscale(2.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bridge_identity((nx, ny) in dims(), n in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = ProbDist::new(random_simplex(n, &mut rng)).unwrap();
        let comps = components(nx, ny, n, &mut rng);
        let direct = build_sigma(&w, &comps).unwrap().conditional_mutual_entropy().unwrap();
        prop_assert!((quantum_cmi_sigma(&w, &comps).unwrap() - direct).abs() <= 1e-10);
    }

    #[test]
    fn sigma_is_a_state_with_the_right_marginal((nx, ny) in dims(), n in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = ProbDist::new(random_simplex(n, &mut rng)).unwrap();
        let comps = components(nx, ny, n, &mut rng);
        let sigma = build_sigma(&w, &comps).unwrap();
        let mut mix = CMatrix::zeros(nx * ny, nx * ny);
        for (wa, c) in w.as_slice().iter().zip(&comps) {
            mix += c.matrix().scale(*wa);
        }
        prop_assert!(max_abs(&(sigma.trace_alpha() - mix)) <= 1e-12);
        prop_assert!((sigma.state().matrix().trace().re - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn hjw_reconstructs_and_round_trips((nx, ny) in dims(), extra in 0usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = nx * ny;
        let rank = rng.random_range(1..=d);
        let rho = random_density(nx, ny, rank, &mut rng);
        let e0 = standard_ensemble(&rho, RANK_TOL).unwrap();
        let nalpha = e0.rank + extra;
        let t = RightUnitary::new(random_isometry(e0.rank, nalpha, &mut rng)).unwrap();
        let ens = apply_isometry(&e0, &t).unwrap();
        prop_assert!(max_abs(&(ens.reconstruct() - rho.matrix())) <= 1e-10);
        let back = recover_isometry(&e0, &ens).unwrap();
        let rows = back.matrix().rows(0, e0.rank).into_owned();
        prop_assert!(max_abs(&(rows - t.matrix())) <= 1e-8);
    }

    #[test]
    fn k_traces_sum_to_the_state((nx, ny) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(nx, ny, nx * ny, &mut rng);
        let e0 = standard_ensemble(&rho, RANK_TOL).unwrap();
        let k = k_array(&e0);
        let t = RightUnitary::new(random_isometry(e0.rank, e0.rank + 2, &mut rng)).unwrap();
        let lam = k.lambda_matrix();
        let total: f64 = (0..t.nalpha()).map(|a| sepdec::ensembles::conjugate_diag(&lam, &t, a).unwrap().re).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn product_condition_matches_corrugation((nx, ny) in dims(), seed in any::<u64>(), product in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = nx * ny;
        let w = random_simplex(n, &mut rng);
        let psis: Vec<Option<CVector>> = (0..n)
            .map(|_| Some(if product {
                random_pure_vector(nx, &mut rng).kronecker(&random_pure_vector(ny, &mut rng))
            } else {
                random_pure_vector(nx * ny, &mut rng)
            }))
            .collect();
        let ens = Ensemble::new(nx, ny, w, psis).unwrap();
        let m = ens.reconstruct();
        let rho = DensityMatrix::new(nx, ny, (&m + m.adjoint()).unscale(2.0)).unwrap();
        let e0 = standard_ensemble(&rho, RANK_TOL).unwrap();
        let t = recover_isometry(&e0, &ens).unwrap();
        let residual = product_condition_residual(&e0, &t).unwrap();
        let corrugation = corrugation_residual(&ens).unwrap();
        prop_assert_eq!(residual <= 1e-10, corrugation <= 1e-10);
        if product {
            prop_assert!(residual <= 1e-10);
        }
    }

    #[test]
    fn entropies_and_ppt_are_local_unitary_invariant((nx, ny) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(nx, ny, nx * ny, &mut rng);
        let rotated = local_unitary(&rho, &mut rng);
        prop_assert!((vn_entropy(rho.matrix()).unwrap() - vn_entropy(rotated.matrix()).unwrap()).abs() <= 1e-10);
        prop_assert!((mutual_entropy(&rho).unwrap() - mutual_entropy(&rotated).unwrap()).abs() <= 1e-10);
        prop_assert!((partial_transpose_min_eigenvalue(&rho) - partial_transpose_min_eigenvalue(&rotated)).abs() <= 1e-10);
    }

    #[test]
    fn objective_ignores_eigenbasis_phases((nx, ny) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(nx, ny, nx * ny, &mut rng);
        let e0 = standard_ensemble(&rho, RANK_TOL).unwrap();
        let t = random_isometry(e0.rank, e0.rank + 3, &mut rng);
        let f = objective(&e0, &RightUnitary::new(t.clone()).unwrap()).unwrap();
        // phi^j -> e^{i th_j} phi^j with T's row j absorbing e^{-i th_j}
        let mut shifted = e0.clone();
        let mut t2 = t.clone();
        for j in 0..e0.rank {
            let ph = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let col = shifted.phis.column(j) * ph;
            shifted.phis.set_column(j, &col);
            let row = t2.row(j) * ph.conj();
            t2.set_row(j, &row);
        }
        let g = objective(&shifted, &RightUnitary::new(t2).unwrap()).unwrap();
        prop_assert!((f - g).abs() <= 1e-12);
    }

    #[test]
    fn objective_is_bounded((nx, ny) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(nx, ny, nx * ny, &mut rng);
        let e0 = standard_ensemble(&rho, RANK_TOL).unwrap();
        let t = RightUnitary::new(random_isometry(e0.rank, e0.rank + 1, &mut rng)).unwrap();
        let f = objective(&e0, &t).unwrap();
        prop_assert!(f >= 0.0 && f <= (nx.min(ny) as f64).log2() + 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences(nx in 2usize..=3, ny in 2usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(nx, ny, nx * ny, &mut rng);
        let e0 = standard_ensemble(&rho, RANK_TOL).unwrap();
        let obj = EofObjective::new(&e0, e0.rank);
        let t = random_isometry(e0.rank, e0.rank + 2, &mut rng);
        let z = sepdec::optimizer::project_tangent(&t, &sepdec::states::random_gaussian_matrix(t.nrows(), t.ncols(), &mut rng));
        let (_, g) = obj.value_and_gradient(&t);
        let analytic = g.zip_map(&z, |a, b| (a.conj() * b).re).sum();
        let h = 1e-6;
        let fp = obj.value(retract(&(&t + z.scale(h))).unwrap().matrix());
        let fm = obj.value(retract(&(&t - z.scale(h))).unwrap().matrix());
        let fd = (fp - fm) / (2.0 * h);
        prop_assert!((fd - analytic).abs() <= 1e-5 * analytic.abs().max(fd.abs()), "fd {} analytic {}", fd, analytic);
    }

    #[test]
    fn classical_constructions_are_exact(nx in 1usize..=4, ny in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_joint_dist(nx, ny, &mut rng);
        for d in [construct_point_decomposition(&p), construct_line_decomposition(&p)] {
            prop_assert!(d.marginal_residual <= 1e-15);
            prop_assert!(d.independence_residual <= 1e-15);
            prop_assert!(classical_cmi(&d.pt).abs() <= 1e-12);
        }
        prop_assert_eq!(construct_line_decomposition(&p).pt.nalpha(), nx.min(ny));
    }

    #[test]
    fn classical_eof_monotone_in_nalpha(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_joint_dist(3, 3, &mut rng);
        let opts = OptimizerOptions { restarts: 3, seed, ..OptimizerOptions::classical() };
        let values: Vec<f64> = (1..=4).map(|n| classical_eof(&p, n, &opts).unwrap().value).collect();
        prop_assert!((values[0] - 0.5 * p.mutual_information()).abs() <= 1e-12);
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{:?}", values);
        }
        prop_assert!(values[2] <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn brute_force_never_beats_relaxation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_joint_dist(2, 2, &mut rng);
        for n in 1..=2 {
            let relaxed = classical_eof(&p, n, &OptimizerOptions::classical()).unwrap().value;
            prop_assert!(brute_force_classical_eof(&p, n, 0.05).unwrap() >= relaxed - 1e-9);
        }
    }

    #[test]
    fn separable_states_reach_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = sepdec::states::random_separable(2, 2, 3, &mut rng);
        let opts = OptimizerOptions { nalpha: Some(16), restarts: 4, seed, ..OptimizerOptions::default() };
        let out = separability_test(&rho, &opts).unwrap();
        prop_assert_eq!(out.verdict, Verdict::SeparableAtTolerance);
        prop_assert!(out.eof.product_residual <= 1e-6 && out.eof.corrugation <= 1e-6);
        let dec = out.decomposition.unwrap();
        prop_assert!(dec.reconstruction_residual <= 1e-6);
    }

    #[test]
    fn eof_estimate_non_increasing_in_nalpha(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = sepdec::states::random_separable(2, 2, 2, &mut rng);
        let rank = standard_ensemble(&rho, RANK_TOL).unwrap().rank;
        let values: Vec<f64> = [rank, rank + 1, 8, 16]
            .iter()
            .map(|&n| {
                let opts = OptimizerOptions { nalpha: Some(n), restarts: 3, seed, ..OptimizerOptions::default() };
                minimize_eof(&rho, &opts).unwrap().value
            })
            .collect();
        for w in values.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{:?}", values);
        }
    }

    #[test]
    fn optimizer_invariants_hold_throughout((nx, ny) in dims(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density(nx, ny, nx * ny, &mut rng);
        let d = nx * ny;
        let opts = OptimizerOptions { nalpha: Some(d + 2), restarts: 2, max_iters: 300, seed, ..OptimizerOptions::default() };
        let r = minimize_eof(&rho, &opts).unwrap();
        prop_assert!(r.max_right_unitary_residual <= 1e-10);
        prop_assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(max_abs(&(r.ensemble.reconstruct() - rho.matrix())) <= 1e-9);
        prop_assert!((r.value - 0.5 * r.cmi).abs() <= 1e-12);
        prop_assert!(r.verdict != Verdict::SeparableAtTolerance || r.cmi <= opts.tol_separable);
    }
}

#[test]
fn classical_mixture_diagonal_witness() {
    let rho = DensityMatrix::new(2, 2, diag_matrix(&[0.4, 0.1, 0.2, 0.3])).unwrap();
    let out = separability_test(&rho, &OptimizerOptions::default()).unwrap();
    assert_eq!(out.verdict, Verdict::SeparableAtTolerance);
    assert!(out.eof.value <= 1e-12);
}
