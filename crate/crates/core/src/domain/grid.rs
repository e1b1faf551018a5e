//! Uniform grids on the truncated domain, their quadrature weights and the
//! edge list that defines the discrete Dirichlet form.

use std::f64::consts::PI;

use crate::domain::expr::Point;
use crate::domain::spec::{DomainMode, ProblemSpec};
use crate::error::Result;

/// One term `conductance * (u_i - u_j)^2` of the discrete gradient energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub conductance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub mode: DomainMode,
    /// Points per axis.
    pub points: usize,
    pub half_width: f64,
    pub spacing: f64,
    pub coords: Vec<Point>,
    /// Dirichlet nodes (value pinned to zero).
    pub boundary: Vec<bool>,
    /// Quadrature weight per node; zero on Dirichlet nodes.
    pub weights: Vec<f64>,
    pub edges: Vec<Edge>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    /// Node ids of the unknowns, in ascending order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.boundary[i]).collect()
    }

    /// Spatial dimension of the node coordinates (1 for interval and radial).
    pub fn axes(&self) -> usize {
        match self.mode {
            DomainMode::Box => 2,
            _ => 1,
        }
    }
}

/// Surface measure of the unit sphere in `R^n`: `2 π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_area(n: u32) -> f64 {
    // Γ(n/2) for integer n by the half-integer recursion.
    let mut gamma_half = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut k = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while k < n as f64 / 2.0 {
        gamma_half *= k;
        k += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half
}

pub fn build_grid(spec: &ProblemSpec) -> Result<Grid> {
    spec.domain.validate()?;
    let n = spec.domain.points;
    let l = spec.domain.half_width;
    let grid = match spec.domain.mode {
        DomainMode::Interval => {
            let h = 2.0 * l / (n - 1) as f64;
            let coords = (0..n)
                .map(|i| {
                    let x = -l + i as f64 * h;
                    Point {
                        x,
                        y: 0.0,
                        r: x.abs(),
                    }
                })
                .collect();
            let boundary: Vec<bool> = (0..n).map(|i| i == 0 || i == n - 1).collect();
            let weights = boundary.iter().map(|&b| if b { 0.0 } else { h }).collect();
            let edges = (0..n - 1)
                .map(|i| Edge {
                    i,
                    j: i + 1,
                    conductance: 1.0 / h,
                })
                .collect();
            Grid {
                mode: spec.domain.mode,
                points: n,
                half_width: l,
                spacing: h,
                coords,
                boundary,
                weights,
                edges,
            }
        }
        DomainMode::Box => {
            let h = 2.0 * l / (n - 1) as f64;
            let id = |i: usize, j: usize| j * n + i;
            let mut coords = Vec::with_capacity(n * n);
            let mut boundary = Vec::with_capacity(n * n);
            for j in 0..n {
                for i in 0..n {
                    let (x, y) = (-l + i as f64 * h, -l + j as f64 * h);
                    coords.push(Point {
                        x,
                        y,
                        r: x.hypot(y),
                    });
                    boundary.push(i == 0 || j == 0 || i == n - 1 || j == n - 1);
                }
            }
            let weights = boundary
                .iter()
                .map(|&b| if b { 0.0 } else { h * h })
                .collect();
            let mut edges = Vec::with_capacity(2 * n * (n - 1));
            for j in 0..n {
                for i in 0..n {
                    if i + 1 < n {
                        edges.push(Edge {
                            i: id(i, j),
                            j: id(i + 1, j),
                            conductance: 1.0,
                        });
                    }
                    if j + 1 < n {
                        edges.push(Edge {
                            i: id(i, j),
                            j: id(i, j + 1),
                            conductance: 1.0,
                        });
                    }
                }
            }
            Grid {
                mode: spec.domain.mode,
                points: n,
                half_width: l,
                spacing: h,
                coords,
                boundary,
                weights,
                edges,
            }
        }
        DomainMode::Radial { dimension } => {
            // Finite-volume weights: node i owns the shell [r_i - h/2, r_i + h/2]
            // (a ball of radius h/2 for the centre), so r = 0 gets positive
            // mass and carries the symmetry condition u'(0) = 0 naturally.
            let h = l / (n - 1) as f64;
            let area = unit_sphere_area(dimension);
            let dim = dimension as f64;
            let coords = (0..n)
                .map(|i| {
                    let r = i as f64 * h;
                    Point { x: r, y: 0.0, r }
                })
                .collect();
            let boundary: Vec<bool> = (0..n).map(|i| i == n - 1).collect();
            let weights = (0..n)
                .map(|i| {
                    if i == n - 1 {
                        return 0.0;
                    }
                    let r = i as f64 * h;
                    let outer = r + 0.5 * h;
                    let inner = (r - 0.5 * h).max(0.0);
                    area / dim * (outer.powf(dim) - inner.powf(dim))
                })
                .collect();
            let edges = (0..n - 1)
                .map(|i| {
                    let mid = (i as f64 + 0.5) * h;
                    Edge {
                        i,
                        j: i + 1,
                        conductance: area * mid.powf(dim - 1.0) / h,
                    }
                })
                .collect();
            Grid {
                mode: spec.domain.mode,
                points: n,
                half_width: l,
                spacing: h,
                coords,
                boundary,
                weights,
                edges,
            }
        }
    };
    Ok(grid)
}
