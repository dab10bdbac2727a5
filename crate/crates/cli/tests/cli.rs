mod common;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sepdec::states::{bell_phi_plus, product_pure, random_joint_dist, random_pure_vector, werner};
use sepdec::tensor::max_abs;
use sepdec::{CMatrix, DensityMatrix, JointDist};
use sepdec_cli::files::{matrix_pairs, ClassicalReport, QuantumReport, StateFile};

use common::{run, s, write_classical, write_quantum};

fn eof(dir: &std::path::Path, rho: &DensityMatrix, name: &str) -> (std::path::PathBuf, std::path::PathBuf, QuantumReport) {
    let input = write_quantum(dir, &format!("{name}.json"), rho);
    let out = dir.join(format!("{name}.report.json"));
    let o = run(&["quantum", "eof", "--input", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    (input, out, report)
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn quantum_eof_examples() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _, bell) = eof(dir.path(), &bell_phi_plus(), "bell");
    assert!((bell.value - 1.0).abs() <= 1e-6);
    assert_eq!(bell.verdict, "undetermined");
    assert!(bell.decomposition.is_none());
    assert_eq!(bell.cmi, 2.0 * bell.value);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let prod = product_pure(&random_pure_vector(2, &mut rng), &random_pure_vector(3, &mut rng));
    let (_, _, r) = eof(dir.path(), &prod, "product");
    assert!(r.value <= 1e-9);
    assert_eq!(r.verdict, "separable-at-tolerance");

    let (_, _, w) = eof(dir.path(), &werner(0.25), "werner");
    assert_eq!(w.verdict, "separable-at-tolerance");
    assert_eq!(w.options.nalpha, 16);
    assert!(w.decomposition.unwrap().reconstruction <= 1e-6);
    for v in [w.residuals.reconstruction, w.residuals.product, w.residuals.corrugation, w.residuals.right_unitarity] {
        assert!(v >= 0.0);
    }
}

#[test]
fn report_goes_to_stdout_without_out() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_quantum(dir.path(), "bell.json", &bell_phi_plus());
    let o = run(&["quantum", "eof", "--input", s(&input), "--nalpha", "2", "--restarts", "2"]);
    assert!(o.status.success());
    let r: QuantumReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.options.nalpha, 2);
    assert_eq!(r.restarts.len(), 2);
    assert_eq!(r.input_digest.len(), 64);
}

#[test]
fn check_round_trip_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let rho = werner(0.2);
    let (input, report_path, report) = eof(dir.path(), &rho, "w");
    let o = run(&["quantum", "check", "--input", s(&input), "--decomposition", s(&report_path)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("reconstruction"));

    // one weight perturbed by 0.01
    let mut bad = report.clone();
    let dec = bad.decomposition.as_mut().unwrap();
    dec.weights[1] += 0.01;
    let x1 = sepdec_cli::files::pairs_matrix(&dec.rho_x[1], 2, 2).unwrap();
    let y1 = sepdec_cli::files::pairs_matrix(&dec.rho_y[1], 2, 2).unwrap();
    let expected = 0.01 * max_abs(&x1.kronecker(&y1));
    let path = dir.path().join("perturbed.json");
    std::fs::write(&path, serde_json::to_string(&bad).unwrap()).unwrap();
    let o = run(&["quantum", "check", "--input", s(&input), "--decomposition", s(&path)]);
    assert_eq!(o.status.code(), Some(1));
    let line = stdout(&o).lines().find(|l| l.starts_with("reconstruction")).unwrap().to_string();
    let value: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((value - expected).abs() <= 0.2 * expected, "{value} vs {expected}");

    // against a different state of the same size
    let other = write_quantum(dir.path(), "other.json", &werner(0.3));
    let o = run(&["quantum", "check", "--input", s(&other), "--decomposition", s(&report_path)]);
    assert_eq!(o.status.code(), Some(1));

    // malformed decomposition
    let mut broken = report.clone();
    broken.decomposition.as_mut().unwrap().rho_y.pop();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, serde_json::to_string(&broken).unwrap()).unwrap();
    let o = run(&["quantum", "check", "--input", s(&input), "--decomposition", s(&path)]);
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(&path, "{\"kind\": \"quantum-eof\"}").unwrap();
    let o = run(&["quantum", "check", "--input", s(&input), "--decomposition", s(&path)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_on_undetermined_report_claims_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (input, report, _) = eof(dir.path(), &bell_phi_plus(), "bell");
    let o = run(&["quantum", "check", "--input", s(&input), "--decomposition", s(&report)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("nothing to check"));
}

#[test]
fn invalid_states_are_rejected_with_distinct_messages() {
    let dir = tempfile::tempdir().unwrap();
    let mut non_herm = CMatrix::identity(4, 4).scale(0.25);
    non_herm[(0, 1)] = Complex64::new(0.1, 0.0);
    let mut negative = CMatrix::identity(4, 4).scale(0.5);
    negative[(0, 0)] = Complex64::new(-0.5, 0.0);
    let cases = [
        (non_herm, "Hermitian"),
        (CMatrix::identity(4, 4).scale(0.5), "trace"),
        (negative, "positive semidefinite"),
    ];
    for (k, (m, needle)) in cases.into_iter().enumerate() {
        let path = dir.path().join(format!("bad{k}.json"));
        let file = StateFile::Quantum { dims: [2, 2], payload: matrix_pairs(&m) };
        std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        let o = run(&["quantum", "eof", "--input", s(&path)]);
        assert_eq!(o.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&o.stderr).contains(needle));
    }
    let path = dir.path().join("garbage.json");
    std::fs::write(&path, "not json").unwrap();
    assert_eq!(run(&["quantum", "eof", "--input", s(&path)]).status.code(), Some(2));
    assert_eq!(run(&["quantum", "eof", "--input", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn nalpha_below_rank_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_quantum(dir.path(), "mixed.json", &DensityMatrix::maximally_mixed(2, 2));
    let o = run(&["quantum", "eof", "--input", s(&input), "--nalpha", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lattice_dump() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_quantum(dir.path(), "bell.json", &bell_phi_plus());
    let dump = dir.path().join("lattice.txt");
    let out = dir.path().join("r.json");
    let o = run(&[
        "quantum", "eof", "--input", s(&input), "--nalpha", "2", "--out", s(&out), "--dump-lattice", s(&dump),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.contains("alpha 0"));
    assert!(text.contains("y=1"));
}

fn decompose(dir: &std::path::Path, p: &JointDist, extra: &[&str]) -> (ClassicalReport, String) {
    let input = write_classical(dir, "p.json", p);
    let out = dir.join("c.json");
    let mut args = vec!["classical", "decompose", "--input", s(&input), "--out", s(&out), "--dump-lattice", "-"];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap(), stdout(&o))
}

#[test]
fn classical_examples() {
    let dir = tempfile::tempdir().unwrap();
    let uniform = JointDist::new(2, 2, vec![0.25; 4]).unwrap();

    let (r, dump) = decompose(dir.path(), &uniform, &["--method", "point"]);
    assert_eq!(r.nalpha, 4);
    for plane in &r.pt {
        let filled: Vec<f64> = plane.iter().flatten().copied().filter(|&v| v > 0.0).collect();
        assert_eq!(filled, vec![0.25]);
    }
    assert_eq!(dump.matches("alpha ").count(), 4);

    let (r, _) = decompose(dir.path(), &uniform, &["--method", "line"]);
    assert_eq!(r.nalpha, 2);
    for plane in &r.pt {
        assert_eq!(plane.iter().flatten().filter(|&&v| v > 0.0).count(), 2);
    }
    assert!(r.residuals.marginal <= 1e-15 && r.residuals.independence <= 1e-15);

    let p = random_joint_dist(3, 3, &mut ChaCha8Rng::seed_from_u64(4));
    let (r, _) = decompose(dir.path(), &p, &["--method", "relax", "--nalpha", "3"]);
    assert!(r.value <= 1e-6);
    assert_eq!(r.verdict, "separable-at-tolerance");
    assert!(r.residuals.marginal <= 1e-12);

    let corr = JointDist::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    let (r, _) = decompose(dir.path(), &corr, &["--method", "relax", "--nalpha", "1"]);
    assert!((r.value - 0.5).abs() <= 1e-12);
    assert_eq!(r.verdict, "undetermined");
}

#[test]
fn classical_rejects_inconsistent_nalpha_and_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_classical(dir.path(), "p.json", &JointDist::new(2, 2, vec![0.25; 4]).unwrap());
    let o = run(&["classical", "decompose", "--input", s(&input), "--method", "point", "--nalpha", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let q = write_quantum(dir.path(), "q.json", &bell_phi_plus());
    let o = run(&["classical", "decompose", "--input", s(&q), "--method", "line"]);
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"classical","dims":[2,2],"payload":[[0.5,0.5],[0.5,-0.5]]}"#).unwrap();
    let o = run(&["classical", "decompose", "--input", s(&bad), "--method", "line"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_examples() {
    let dir = tempfile::tempdir().unwrap();
    let bell = write_quantum(dir.path(), "bell.json", &bell_phi_plus());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let prod = write_quantum(
        dir.path(),
        "prod.json",
        &product_pure(&random_pure_vector(2, &mut rng), &random_pure_vector(2, &mut rng)),
    );
    let o = run(&["oracle", "--input", s(&bell), "--which", "ppt"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("ppt-entangled"));
    let o = run(&["oracle", "--input", s(&prod), "--which", "ppt"]);
    assert!(stdout(&o).starts_with("ppt-separable"));
    let o = run(&["oracle", "--input", s(&bell), "--which", "eof2q"]);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 1.0).abs() < 1e-10);

    let big = write_quantum(dir.path(), "big.json", &DensityMatrix::maximally_mixed(2, 3));
    let o = run(&["oracle", "--input", s(&big), "--which", "eof2q"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_env_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let bell = write_quantum(dir.path(), "bell.json", &bell_phi_plus());
    let o = common::sepdec()
        .env("SEPDEC_THREADS", "zero")
        .args(["oracle", "--input", s(&bell), "--which", "ppt"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["quantum", "eof"]).status.code(), Some(2));
    assert_eq!(run(&["classical", "decompose", "--input", "x", "--method", "grid"]).status.code(), Some(2));
}
