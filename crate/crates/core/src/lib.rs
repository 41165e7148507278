//! Intention learning for multi-objective optimization.
//!
//! Given expert demonstrations `(s⁽ⁿ⁾, a⁽ⁿ⁾)` where each action maximizes an
//! unknown scalarized objective `⟨φ₀, h(x)⟩` over a feasible set `X(s⁽ⁿ⁾)`,
//! recover a weight vector `φ` by minimizing the convex inverse objective
//!
//! ```text
//! F(φ) = (1/N) Σ ⟨φ, a(φ, s⁽ⁿ⁾)⟩ − (1/N) Σ ⟨φ, a⁽ⁿ⁾⟩
//! ```
//!
//! over a compact parameter set with the projected subgradient method.
//!
//! Modules:
//! - [`vector`]: parameter/feature vectors and the inner product.
//! - [`dataset`]: forward problems, samples, validation, JSON format.
//! - [`linalg`]: packed symmetric matrices and a Jacobi eigensolver.
//! - [`projections`]: projections onto the simplex, box, spectrahedron and products.
//! - [`solvers`]: exact forward solvers (finite sets, knapsack, vertex LP, QP candidates).
//! - [`learner`]: `F`, its subgradient, schedules, the main loop and diagnostics.
//! - [`synth`]: realizable synthetic datasets.

pub mod dataset;
pub mod error;
pub mod learner;
pub mod linalg;
pub mod projections;
pub mod solvers;
pub mod synth;
pub mod vector;

pub use dataset::{
    parse_dataset, serialize_dataset, validate_dataset, Dataset, KnapsackItem, Metadata, ProblemSpec, Sample,
};
pub use error::{Error, Result};
pub use learner::{
    evaluate, lipschitz_constant, objective, run_intention_learning, run_with_observer, schedule_rate, subgradient,
    theoretical_bound, BoundParams, Evaluation, LearnerConfig, LearningTrace, Lipschitz, Schedule, Step, TraceRow,
};
pub use linalg::{jacobi_eigh, reconstruct, EigenDecomposition, SymmetricMatrix};
pub use projections::{
    project_box, project_param, project_simplex, project_spectrahedron, sample_feasible, vi_certificate, ParamSpace,
};
pub use solvers::{
    embed_qp, solve, solve_knapsack, solve_qp_candidates, solve_vertex_lp, ExactSolver, ForwardSolver, SolveResult,
    Witness,
};
pub use synth::{generate, generate_mixed, Family, FamilyParams};
pub use vector::{inner_product, FeatureVector, ParamVector, Variant};
