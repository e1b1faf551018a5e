//! Positive starting fields for the optimizers.

use rand::Rng;

use crate::domain::{DomainMode, Point, Problem};

fn dist2(problem: &Problem, a: Point, b: Point) -> f64 {
    match problem.grid().mode {
        DomainMode::Box => (a.x - b.x).powi(2) + (a.y - b.y).powi(2),
        _ => (a.x - b.x).powi(2),
    }
}

/// Node (as a point) where `weight` is largest; ties are broken towards the
/// centroid of the tied nodes.
pub(crate) fn peak_of(problem: &Problem, weight: impl Fn(usize) -> f64) -> Point {
    let grid = problem.grid();
    let nodes = problem.unknowns();
    let best = nodes
        .iter()
        .map(|&n| weight(n))
        .fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<usize> = nodes
        .iter()
        .copied()
        .filter(|&n| weight(n) >= best - 1e-12 * best.abs())
        .collect();
    let count = tied.len() as f64;
    let centroid = tied.iter().fold(Point::default(), |acc, &n| {
        let pt = grid.coords[n];
        Point {
            x: acc.x + pt.x / count,
            y: acc.y + pt.y / count,
            r: 0.0,
        }
    });
    let pick = tied
        .iter()
        .copied()
        .min_by(|&i, &j| {
            dist2(problem, grid.coords[i], centroid)
                .partial_cmp(&dist2(problem, grid.coords[j], centroid))
                .expect("finite coordinates")
        })
        .expect("at least one unknown");
    grid.coords[pick]
}

/// Gaussian bump on the unknowns; strictly positive.
pub(crate) fn bump(problem: &Problem, center: Point, width: f64) -> Vec<f64> {
    let grid = problem.grid();
    problem
        .unknowns()
        .iter()
        .map(|&n| {
            let d2 = dist2(problem, grid.coords[n], center);
            (-0.5 * d2 / (width * width)).exp().max(1e-200)
        })
        .collect()
}

/// Random positive field: smoothed uniform noise under a Gaussian envelope at
/// a random centre in the middle half of the domain.
pub(crate) fn smoothed_random(problem: &Problem, rng: &mut impl Rng) -> Vec<f64> {
    let grid = problem.grid();
    let l = grid.half_width;
    let center = match grid.mode {
        DomainMode::Interval => Point {
            x: rng.random_range(-0.5 * l..0.5 * l),
            y: 0.0,
            r: 0.0,
        },
        DomainMode::Box => Point {
            x: rng.random_range(-0.5 * l..0.5 * l),
            y: rng.random_range(-0.5 * l..0.5 * l),
            r: 0.0,
        },
        DomainMode::Radial { .. } => Point {
            x: rng.random_range(0.0..0.5 * l),
            y: 0.0,
            r: 0.0,
        },
    };
    let width = rng.random_range(0.1 * l..0.4 * l);
    let mut noise: Vec<f64> = (0..grid.len())
        .map(|_| rng.random_range(0.0..1.0))
        .collect();
    // a few Jacobi-style averaging sweeps along the grid edges
    for _ in 0..10 {
        let mut acc = noise.clone();
        let mut count = vec![1.0; grid.len()];
        for e in &grid.edges {
            acc[e.i] += noise[e.j];
            acc[e.j] += noise[e.i];
            count[e.i] += 1.0;
            count[e.j] += 1.0;
        }
        noise = acc.iter().zip(&count).map(|(a, c)| a / c).collect();
    }
    let envelope = bump(problem, center, width);
    problem
        .unknowns()
        .iter()
        .zip(envelope)
        .map(|(&n, env)| (0.2 + noise[n]) * env)
        .collect()
}
