//! Truncated domain, grids, fields, and the discrete energy functional.

pub mod expr;
pub mod field;
pub mod grid;
pub mod problem;
pub mod spec;

pub use expr::{Expr, Point};
pub use field::Field;
pub use grid::{build_grid, Edge, Grid};
pub use problem::{Problem, WeakResidual};
pub use spec::{Coefficient, DomainMode, DomainSpec, ProblemSpec};
