//! Shared fixtures for the benchmarks.

use nehari_core::{DomainSpec, Problem, ProblemSpec};

/// The benchmark problem on an interval grid with `points` nodes.
pub fn benchmark_problem(points: usize) -> Problem {
    let spec = ProblemSpec {
        domain: DomainSpec::interval(10.0, points),
        ..ProblemSpec::benchmark()
    };
    Problem::new(spec).expect("benchmark spec is valid")
}
