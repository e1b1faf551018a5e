use std::fmt::Write as _;
use std::sync::Arc;

use crate::domain::expr::Point;
use crate::domain::grid::Grid;
use crate::domain::spec::DomainMode;
use crate::error::{Error, Result};

/// Nodal values of a function on a grid; Dirichlet nodes hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    /// Fails if the length is wrong or a boundary node is non-zero.
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Field> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(i) = (0..grid.len()).find(|&i| grid.boundary[i] && values[i] != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "boundary node {i} carries {}",
                values[i]
            )));
        }
        Ok(Field { grid, values })
    }

    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>) -> Field {
        debug_assert_eq!(grid.len(), values.len());
        Field { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Field {
        let values = vec![0.0; grid.len()];
        Field { grid, values }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(Point) -> f64) -> Field {
        let values = grid
            .coords
            .iter()
            .zip(&grid.boundary)
            .map(|(&pt, &b)| if b { 0.0 } else { f(pt) })
            .collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| s * v).collect(),
        }
    }

    /// Smallest value over interior nodes.
    pub fn min_interior(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.grid.boundary)
            .filter(|(_, b)| !**b)
            .map(|(v, _)| *v)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Member of the positive cone: non-negative and not identically zero.
    pub fn check_positive_cone(&self) -> Result<()> {
        if let Some(i) = self.values.iter().position(|&v| !(v >= 0.0)) {
            return Err(Error::NotPositiveCone(format!(
                "value {} at node {i}",
                self.values[i]
            )));
        }
        if self.values.iter().all(|&v| v == 0.0) {
            return Err(Error::NotPositiveCone("field is identically zero".into()));
        }
        Ok(())
    }

    /// CSV with node coordinates and value, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let two_d = self.grid.mode == DomainMode::Box;
        let coord = if matches!(self.grid.mode, DomainMode::Radial { .. }) {
            "r"
        } else {
            "x"
        };
        if two_d {
            out.push_str("x,y,value\n");
        } else {
            let _ = writeln!(out, "{coord},value");
        }
        for (pt, v) in self.grid.coords.iter().zip(&self.values) {
            if two_d {
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", pt.x, pt.y, v);
            } else {
                let _ = writeln!(out, "{:.16e},{:.16e}", pt.x, v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::grid::build_grid;
    use crate::domain::spec::ProblemSpec;

    #[test]
    fn boundary_values_must_vanish() {
        let grid = Arc::new(build_grid(&ProblemSpec::benchmark()).unwrap());
        let mut values = vec![1.0; grid.len()];
        assert!(Field::new(grid.clone(), values.clone()).is_err());
        values[0] = 0.0;
        values[grid.len() - 1] = 0.0;
        let f = Field::new(grid.clone(), values).unwrap();
        assert_eq!(f.min_interior(), 1.0);
        assert!(f.check_positive_cone().is_ok());
        assert!(Field::zeros(grid.clone()).check_positive_cone().is_err());
        assert!(f.scaled(-1.0).check_positive_cone().is_err());
        assert!(Field::new(grid, vec![0.0; 3]).is_err());
    }

    #[test]
    fn csv_round_trips_values() {
        let grid = Arc::new(build_grid(&ProblemSpec::benchmark()).unwrap());
        let f = Field::from_fn(grid, |pt| (1.0 / 3.0) * (-pt.x * pt.x).exp());
        let csv = f.to_csv();
        let parsed: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert_eq!(parsed, f.values());
    }
}
