//! Separable decompositions of bipartite states and distributions.
//!
//! Two tracks share one idea. A classical joint distribution `P(x, y)` is
//! separable with `N` hidden values when some extension `P~(x, y, alpha)`
//! makes `X` and `Y` conditionally independent; a quantum state is
//! separable when some pure-state ensemble realizing it has product
//! members. In both, the conditional mutual information of the extension
//! is zero exactly at separability, and for quantum states half of its
//! minimum is the entanglement of formation.
//!
//! All entropies are in bits. Bipartite basis index is `j = x * ny + y`.

pub mod classical;
pub mod ensembles;
pub mod error;
pub mod optimizer;
pub mod oracles;
pub mod states;
pub mod tensor;

pub use classical::{
    check_classical_decomposition, classical_eof, construct_line_decomposition, construct_point_decomposition,
    independence_residual, ClassicalDecomposition, ClassicalEof, ConditionalModel,
};
pub use ensembles::{
    apply_isometry, build_sigma, corrugation_residual, extract_local_states, k_array, product_condition_residual,
    mixture_of_products, projected_product_residual, recover_isometry, refine_to_pure_product, standard_ensemble, Ensemble, KArray, QuantumDecomposition, RightUnitary,
    Sigma, StandardEnsemble,
};
pub use error::{Error, Result};
pub use optimizer::{
    minimize_eof, objective, retract, separability_test, EofResult, OptimizerOptions, RestartSummary, SeparabilityOutcome,
    Verdict,
};
pub use oracles::{brute_force_classical_eof, ppt_check, two_qubit_eof_oracle, OracleKind, OracleVerdict};
pub use tensor::{
    classical_cmi, herm_eig, mutual_entropy, quantum_cmi_sigma, shannon_entropy, vn_entropy, CMatrix, CVector,
    DensityMatrix, JointDist, ProbDist, TriJointDist,
};
