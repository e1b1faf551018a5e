//! Numerical laboratory for the singular–superlinear Schrödinger problem
//!
//! ```text
//! -Δu + V(x) u = λ a(x) u^{-γ} + b(x) u^p,   u > 0,
//! ```
//!
//! with `0 < γ < 1 < p`, on a truncated domain. The crate provides the
//! fiber-map calculus of the energy `Φ_λ`, estimators for the extremal
//! parameters `λ̂ < λ*` and the nonexistence bound from the first weighted
//! eigenvalue, a Nehari-manifold solver for the two positive solution
//! branches, and a continuation sweep that produces the energy-vs-λ diagram.

// NaN-aware comparisons such as `!(x > 0.0)` are deliberate throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bifurcation;
pub mod domain;
pub mod error;
pub mod extremal;
pub mod fiber;
pub(crate) mod init;
pub mod linalg;
pub mod nehari;

pub use bifurcation::{
    locate_lambda_hat, log_grid, render_diagram, sweep, sweep_detailed, BifurcationTable,
    DiagramStyle, SweepConfig, SweepPoint, TableMeta, TableRow,
};
pub use domain::{
    build_grid, Coefficient, DomainMode, DomainSpec, Expr, Field, Grid, Problem, ProblemSpec,
};
pub use error::{Error, Result};
pub use extremal::{
    compute_bounds, default_omega, estimate_lambda_star, g_min_profile, lambda_hat_from_star,
    lambda_hat_ratio, lambda_upper, min_eigenpair, EigenPair, ExtremalReport, LambdaStarEstimate,
    OptimizerConfig,
};
pub use fiber::{
    c_gamma_p, fiber_coeffs, Branch, Classification, FiberAnalysis, FiberCoefficients,
};
pub use nehari::{
    certify_ground_state, default_starts, minimize_branch, newton_refine, project_to_nehari,
    solve_branch, track_branch, verify_solution, BranchPoint, Check, NewtonConfig, NewtonOutcome,
    SolverConfig, VerificationReport,
};
