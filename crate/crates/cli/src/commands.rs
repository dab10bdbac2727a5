//! Subcommand definitions and their implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sepdec::ensembles::RANK_TOL;
use sepdec::optimizer::Verdict;
use sepdec::oracles::partial_transpose_min_eigenvalue;
use sepdec::tensor::max_abs;
use sepdec::{
    classical_cmi, classical_eof, construct_line_decomposition, construct_point_decomposition, mixture_of_products,
    ppt_check, projected_product_residual, refine_to_pure_product, separability_test, standard_ensemble,
    two_qubit_eof_oracle, CMatrix, ClassicalDecomposition, DensityMatrix, JointDist, OptimizerOptions, ProbDist,
    RestartSummary,
};

use crate::files::{
    digest, matrix_pairs, pairs_matrix, ClassicalReport, ClassicalResiduals, DecompositionRecord, OptionsRecord,
    QuantumReport, QuantumResiduals, RestartRecord, StateFile,
};
use crate::{json, lattice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: message.into(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "sepdec", version, about = "Separable decompositions and entanglement of formation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    #[command(subcommand)]
    Quantum(QuantumCommand),
    #[command(subcommand)]
    Classical(ClassicalCommand),
    /// Independent cross-checks on a quantum state.
    Oracle(OracleArgs),
}

#[derive(Debug, Subcommand)]
pub enum QuantumCommand {
    /// Estimate the entanglement of formation and test separability.
    Eof(EofArgs),
    /// Re-verify the decomposition stored in a report.
    Check(CheckArgs),
}

#[derive(Debug, Subcommand)]
pub enum ClassicalCommand {
    /// Conditionally independent extension of a joint distribution.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    /// Number of random restarts.
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub step_init: Option<f64>,
    /// Relative objective improvement treated as a stall.
    #[arg(long)]
    pub tol: Option<f64>,
    /// CMI (bits) at or below which the verdict is separable-at-tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub sep_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl OptimizerArgs {
    fn options(&self, base: OptimizerOptions, nalpha: Option<usize>) -> OptimizerOptions {
        OptimizerOptions {
            nalpha,
            restarts: self.restarts,
            max_iters: self.max_iters.unwrap_or(base.max_iters),
            step_init: self.step_init.unwrap_or(base.step_init),
            tol_objective: self.tol.unwrap_or(base.tol_objective),
            tol_separable: self.sep_tol,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct EofArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Ensemble cardinality [default: (nx*ny)^2].
    #[arg(long)]
    pub nalpha: Option<usize>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    /// Report destination [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the per-alpha amplitude lattice here ("-" for stdout).
    #[arg(long)]
    pub dump_lattice: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Report produced by `quantum eof`.
    #[arg(long)]
    pub decomposition: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Point,
    Line,
    Relax,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Planes for `relax` [default: min(nx, ny)]; fixed by the construction otherwise.
    #[arg(long)]
    pub nalpha: Option<usize>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dump_lattice: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Ppt,
    Eof2q,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub which: Which,
}

/// Runs a parsed command; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Quantum(QuantumCommand::Eof(args)) => quantum_eof(&args),
        Command::Quantum(QuantumCommand::Check(args)) => quantum_check(&args),
        Command::Classical(ClassicalCommand::Decompose(args)) => classical_decompose(&args),
        Command::Oracle(args) => oracle(&args),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

fn parse_state(path: &Path) -> Result<(StateFile, String), Failure> {
    let bytes = read_bytes(path)?;
    let file: StateFile =
        serde_json::from_slice(&bytes).map_err(|e| invalid(format!("{}: malformed state file: {e}", path.display())))?;
    Ok((file, digest(&bytes)))
}

fn load_quantum(path: &Path) -> Result<(DensityMatrix, String), Failure> {
    let (file, d) = parse_state(path)?;
    let rho = file
        .into_quantum()
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok((rho, d))
}

fn load_classical(path: &Path) -> Result<(JointDist, String), Failure> {
    let (file, d) = parse_state(path)?;
    let p = file
        .into_classical()
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok((p, d))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) if p != Path::new("-") => {
            fs::write(p, text).map_err(|e| invalid(format!("cannot write {}: {e}", p.display())))
        }
        _ => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| invalid(format!("cannot write to stdout: {e}")))
        }
    }
}

fn options_record(opts: &OptimizerOptions, nalpha: usize) -> OptionsRecord {
    OptionsRecord {
        nalpha,
        restarts: opts.restarts,
        max_iters: opts.max_iters,
        step_init: opts.step_init,
        tol_objective: opts.tol_objective,
        tol_separable: opts.tol_separable,
        seed: opts.seed,
    }
}

fn restart_records(r: &[RestartSummary]) -> Vec<RestartRecord> {
    r.iter()
        .map(|s| RestartRecord {
            index: s.index,
            value: s.value,
            iterations: s.iterations,
        })
        .collect()
}

fn quantum_eof(args: &EofArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let (rho, input_digest) = load_quantum(&args.input)?;
    let opts = args.optimizer.options(OptimizerOptions::default(), args.nalpha);
    let nalpha = opts.nalpha.unwrap_or(rho.dim() * rho.dim());
    let outcome = separability_test(&rho, &opts).map_err(|e| invalid(e.to_string()))?;
    let eof = &outcome.eof;

    let decomposition = outcome.decomposition.as_ref().map(|d| DecompositionRecord {
        weights: d.weights.clone(),
        rho_x: d.rho_x.iter().map(matrix_pairs).collect(),
        rho_y: d.rho_y.iter().map(matrix_pairs).collect(),
        reconstruction: d.reconstruction_residual,
        product: d.product_residual,
    });
    let report = QuantumReport {
        kind: "quantum-eof".into(),
        input_digest,
        dims: [rho.nx(), rho.ny()],
        options: options_record(&opts, nalpha),
        seed: opts.seed,
        rank: eof.isometry.rows(),
        value: eof.value,
        cmi: eof.cmi,
        verdict: outcome.verdict.to_string(),
        residuals: QuantumResiduals {
            reconstruction: max_abs(&(eof.ensemble.reconstruct() - rho.matrix())),
            product: eof.product_residual,
            corrugation: eof.corrugation,
            right_unitarity: eof.max_right_unitary_residual,
        },
        decomposition,
        isometry: matrix_pairs(eof.isometry.matrix()),
        trace: eof.trace.clone(),
        restarts: restart_records(&eof.restarts),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let text = json::to_string(&report).map_err(|e| invalid(e.to_string()))?;
    if let Some(path) = &args.dump_lattice {
        emit(Some(path), &lattice::quantum(&eof.ensemble))?;
    }
    emit(args.out.as_deref(), &text)?;
    if args.out.is_some() {
        println!("value {:e} bits, cmi {:e}, verdict {}", report.value, report.cmi, report.verdict);
    }
    Ok(EXIT_OK)
}

fn check_shape(rows: &[Vec<[f64; 2]>], n: usize, what: &str) -> Result<CMatrix, Failure> {
    pairs_matrix(rows, n, n).map_err(|e| invalid(format!("malformed decomposition ({what}): {e}")))
}

fn quantum_check(args: &CheckArgs) -> Result<i32, Failure> {
    let (rho, input_digest) = load_quantum(&args.input)?;
    let bytes = read_bytes(&args.decomposition)?;
    let report: QuantumReport = serde_json::from_slice(&bytes)
        .map_err(|e| invalid(format!("{}: malformed report: {e}", args.decomposition.display())))?;
    if report.dims != [rho.nx(), rho.ny()] {
        return Err(invalid(format!(
            "report is for a {}x{} system but the state is {}x{}",
            report.dims[0],
            report.dims[1],
            rho.nx(),
            rho.ny()
        )));
    }
    if report.input_digest != input_digest {
        println!("note: report was produced from a different input file");
    }
    let Some(dec) = &report.decomposition else {
        println!("report claims no decomposition (verdict {}); nothing to check", report.verdict);
        return Ok(EXIT_OK);
    };

    let n = dec.weights.len();
    if n == 0 || dec.rho_x.len() != n || dec.rho_y.len() != n {
        return Err(invalid(format!(
            "malformed decomposition: {} weights, {} X states, {} Y states",
            n,
            dec.rho_x.len(),
            dec.rho_y.len()
        )));
    }
    if let Some(w) = dec.weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(invalid(format!("malformed decomposition: weight {w}")));
    }
    let rho_x = dec
        .rho_x
        .iter()
        .map(|m| check_shape(m, rho.nx(), "rho_x"))
        .collect::<Result<Vec<_>, _>>()?;
    let rho_y = dec
        .rho_y
        .iter()
        .map(|m| check_shape(m, rho.ny(), "rho_y"))
        .collect::<Result<Vec<_>, _>>()?;

    let mixture = mixture_of_products(&dec.weights, &rho_x, &rho_y).map_err(|e| invalid(e.to_string()))?;
    let reconstruction = max_abs(&(mixture - rho.matrix()));

    let total: f64 = dec.weights.iter().sum();
    let weights = ProbDist::new(dec.weights.iter().map(|w| w / total).collect())
        .map_err(|e| invalid(format!("malformed decomposition: {e}")))?;
    let ensemble = refine_to_pure_product(&weights, &rho_x, &rho_y)
        .map_err(|e| invalid(format!("malformed decomposition: {e}")))?;
    let e0 = standard_ensemble(&rho, RANK_TOL).map_err(|e| invalid(e.to_string()))?;
    let product = projected_product_residual(&e0, &ensemble).map_err(|e| invalid(e.to_string()))?;

    let status = |v: f64| if v <= args.tol { "ok" } else { "FAIL" };
    println!("{:<16} {:>24} {:>24}  status", "residual", "value", "tol");
    println!("{:<16} {:>24.16e} {:>24.16e}  {}", "reconstruction", reconstruction, args.tol, status(reconstruction));
    println!("{:<16} {:>24.16e} {:>24.16e}  {}", "product", product, args.tol, status(product));
    Ok(if reconstruction <= args.tol && product <= args.tol {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn pt_grid(d: &ClassicalDecomposition) -> Vec<Vec<Vec<f64>>> {
    let pt = &d.pt;
    (0..pt.nalpha())
        .map(|a| (0..pt.nx()).map(|x| (0..pt.ny()).map(|y| pt.get(x, y, a)).collect()).collect())
        .collect()
}

fn classical_decompose(args: &DecomposeArgs) -> Result<i32, Failure> {
    let start = Instant::now();
    let (p, input_digest) = load_classical(&args.input)?;
    let (method, decomposition, value, trace, restarts, options) = match args.method {
        Method::Point | Method::Line => {
            let (name, d) = if args.method == Method::Point {
                ("point", construct_point_decomposition(&p))
            } else {
                ("line", construct_line_decomposition(&p))
            };
            if let Some(n) = args.nalpha.filter(|&n| n != d.pt.nalpha()) {
                return Err(invalid(format!(
                    "method {name} uses nalpha = {}, got --nalpha {n}",
                    d.pt.nalpha()
                )));
            }
            let value = 0.5 * classical_cmi(&d.pt).max(0.0);
            (name, d, value, Vec::new(), Vec::new(), None)
        }
        Method::Relax => {
            let nalpha = args.nalpha.unwrap_or(p.nx().min(p.ny()));
            let opts = args.optimizer.options(OptimizerOptions::classical(), Some(nalpha));
            let r = classical_eof(&p, nalpha, &opts).map_err(|e| invalid(e.to_string()))?;
            let record = options_record(&opts, nalpha);
            ("relax", r.best, r.value, r.trace, restart_records(&r.restarts), Some(record))
        }
    };
    let cmi = 2.0 * value;
    let sep_tol = args.optimizer.sep_tol;
    let verdict = if cmi <= sep_tol {
        Verdict::SeparableAtTolerance
    } else {
        Verdict::Undetermined
    };
    let report = ClassicalReport {
        kind: "classical-decompose".into(),
        input_digest,
        dims: [p.nx(), p.ny()],
        method: method.into(),
        nalpha: decomposition.pt.nalpha(),
        seed: options.as_ref().map(|o| o.seed),
        options,
        value,
        cmi,
        verdict: verdict.to_string(),
        residuals: ClassicalResiduals {
            marginal: decomposition.marginal_residual,
            independence: decomposition.independence_residual,
        },
        pt: pt_grid(&decomposition),
        trace,
        restarts,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let text = json::to_string(&report).map_err(|e| invalid(e.to_string()))?;
    if let Some(path) = &args.dump_lattice {
        emit(Some(path), &lattice::classical(&decomposition.pt))?;
    }
    emit(args.out.as_deref(), &text)?;
    if args.out.is_some() {
        println!("value {:e} bits, cmi {:e}, verdict {}", report.value, report.cmi, report.verdict);
    }
    Ok(EXIT_OK)
}

fn oracle(args: &OracleArgs) -> Result<i32, Failure> {
    let (rho, _) = load_quantum(&args.input)?;
    match args.which {
        Which::Ppt => {
            println!(
                "{}  min_eigenvalue {:.16e}",
                ppt_check(&rho),
                partial_transpose_min_eigenvalue(&rho)
            );
        }
        Which::Eof2q => {
            let v = two_qubit_eof_oracle(&rho).map_err(|e| invalid(e.to_string()))?;
            println!("{v:?}");
        }
    }
    Ok(EXIT_OK)
}

