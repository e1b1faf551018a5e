//! Discretized problem: nodal coefficients, the stiffness operator
//! `K = -Δ_h + V` (weighted by the quadrature), and the integrals that make up
//! the energy functional.

use std::sync::Arc;

use crate::domain::expr::Point;
use crate::domain::field::Field;
use crate::domain::grid::{build_grid, Grid};
use crate::domain::spec::{Coefficient, ProblemSpec};
use crate::error::{Error, Result};
use crate::linalg::{BandedLu, SparseSym};

/// A validated problem on its grid.
///
/// Everything is stored per unknown (interior node) as well as per node; the
/// numerical kernels work on unknown-indexed slices and the [`Field`] level
/// API gathers/scatters around them.
#[derive(Debug, Clone)]
pub struct Problem {
    spec: ProblemSpec,
    grid: Arc<Grid>,
    v: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    unknowns: Vec<usize>,
    slot: Vec<Option<usize>>,
    // per-unknown copies
    w_u: Vec<f64>,
    a_u: Vec<f64>,
    b_u: Vec<f64>,
    stiffness: SparseSym,
    stiffness_lu: Arc<BandedLu>,
}

/// Strong-form residual of the discrete equation and its weighted L² norm.
#[derive(Debug, Clone)]
pub struct WeakResidual {
    pub residual: Field,
    pub norm: f64,
}

fn nodal(c: &Coefficient, grid: &Grid, name: &str) -> Result<Vec<f64>> {
    match c {
        Coefficient::Expr(e) => Ok(grid.coords.iter().map(|&pt: &Point| e.eval(pt)).collect()),
        Coefficient::Table(values) => {
            if values.len() != grid.len() {
                return Err(Error::InvalidProblem(format!(
                    "{name}.table has {} values but the grid has {} nodes",
                    values.len(),
                    grid.len()
                )));
            }
            Ok(values.clone())
        }
    }
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Problem> {
        spec.validate()?;
        let grid = build_grid(&spec)?;
        let v = nodal(&spec.v, &grid, "V")?;
        let a = nodal(&spec.a, &grid, "a")?;
        let b = nodal(&spec.b, &grid, "b")?;
        Problem::from_nodal(spec, grid, v, a, b)
    }

    /// Builds the problem with explicit nodal coefficients (the spec's
    /// coefficient sources are replaced by tables).
    pub fn with_nodal_coefficients(
        mut spec: ProblemSpec,
        v: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
    ) -> Result<Problem> {
        spec.validate()?;
        spec.v = Coefficient::Table(v.clone());
        spec.a = Coefficient::Table(a.clone());
        spec.b = Coefficient::Table(b.clone());
        let grid = build_grid(&spec)?;
        for (name, c) in [("V", &v), ("a", &a), ("b", &b)] {
            if c.len() != grid.len() {
                return Err(Error::InvalidProblem(format!("{name} has wrong length")));
            }
        }
        Problem::from_nodal(spec, grid, v, a, b)
    }

    fn from_nodal(
        spec: ProblemSpec,
        grid: Grid,
        v: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
    ) -> Result<Problem> {
        let check_all =
            |values: &[f64], name: &str, ok: fn(f64) -> bool, what: &str| -> Result<()> {
                match values.iter().position(|&x| !ok(x)) {
                    Some(i) => Err(Error::InvalidProblem(format!(
                        "{name} must be {what} on the grid; {name}({i}) = {}",
                        values[i]
                    ))),
                    None => Ok(()),
                }
            };
        check_all(&v, "V", |x| x > 0.0 && x.is_finite(), "strictly positive")?;
        check_all(&a, "a", |x| x > 0.0 && x.is_finite(), "strictly positive")?;
        check_all(&b, "b", |x| x.is_finite(), "finite")?;
        if !b.iter().any(|&x| x > 0.0) {
            return Err(Error::InvalidProblem(
                "b must be positive somewhere on the grid".into(),
            ));
        }

        let unknowns = grid.interior_nodes();
        let mut slot = vec![None; grid.len()];
        for (k, &node) in unknowns.iter().enumerate() {
            slot[node] = Some(k);
        }
        let pick = |values: &[f64]| unknowns.iter().map(|&n| values[n]).collect::<Vec<_>>();
        let w_u = pick(&grid.weights);
        let (a_u, b_u) = (pick(&a), pick(&b));

        let grid = Arc::new(grid);
        let all = vec![true; grid.len()];
        let stiffness = assemble(&grid, &slot, &unknowns, &v, &all);
        let stiffness_lu = Arc::new(stiffness.factor()?);
        Ok(Problem {
            spec,
            grid,
            v,
            a,
            b,
            unknowns,
            slot,
            w_u,
            a_u,
            b_u,
            stiffness,
            stiffness_lu,
        })
    }

    /// Same problem with `a` replaced by `s * a`.
    pub fn with_scaled_a(&self, s: f64) -> Result<Problem> {
        let a: Vec<f64> = self.a.iter().map(|x| s * x).collect();
        let mut spec = self.spec.clone();
        spec.a = Coefficient::Table(a.clone());
        Problem::from_nodal(
            spec,
            (*self.grid).clone(),
            self.v.clone(),
            a,
            self.b.clone(),
        )
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.spec.gamma
    }

    pub fn p(&self) -> f64 {
        self.spec.p
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    pub(crate) fn weights_u(&self) -> &[f64] {
        &self.w_u
    }

    pub(crate) fn a_u(&self) -> &[f64] {
        &self.a_u
    }

    pub(crate) fn b_u(&self) -> &[f64] {
        &self.b_u
    }

    /// `K` restricted to the unknowns: `x^T K x` is the discrete `‖u‖²`.
    pub fn stiffness(&self) -> &SparseSym {
        &self.stiffness
    }

    pub(crate) fn stiffness_lu(&self) -> &BandedLu {
        &self.stiffness_lu
    }

    /// Stiffness and mass (weight `m`) on the sub-problem where only nodes with
    /// `mask[node]` are unknowns; the others act as Dirichlet nodes.
    pub fn restricted_operator(&self, mask: &[bool]) -> (Vec<usize>, SparseSym) {
        let nodes: Vec<usize> = self.unknowns.iter().copied().filter(|&n| mask[n]).collect();
        let mut slot = vec![None; self.grid.len()];
        for (k, &n) in nodes.iter().enumerate() {
            slot[n] = Some(k);
        }
        let op = assemble(&self.grid, &slot, &nodes, &self.v, mask);
        (nodes, op)
    }

    pub fn check_field(&self, u: &Field) -> Result<()> {
        if Arc::ptr_eq(u.grid(), &self.grid) || **u.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn gather(&self, u: &Field) -> Result<Vec<f64>> {
        self.check_field(u)?;
        Ok(self.unknowns.iter().map(|&n| u.values()[n]).collect())
    }

    pub fn scatter(&self, x: &[f64]) -> Field {
        let mut values = vec![0.0; self.grid.len()];
        for (&n, &v) in self.unknowns.iter().zip(x) {
            values[n] = v;
        }
        Field::from_parts(self.grid.clone(), values)
    }

    pub fn slot_of(&self, node: usize) -> Option<usize> {
        self.slot[node]
    }

    // ---- kernels on unknown vectors -------------------------------------

    pub(crate) fn norm_sq_u(&self, x: &[f64]) -> f64 {
        self.stiffness.form(x, x)
    }

    pub(crate) fn integral_a_u(&self, x: &[f64]) -> f64 {
        let q = 1.0 - self.spec.gamma;
        x.iter()
            .zip(&self.w_u)
            .zip(&self.a_u)
            .map(|((&u, w), a)| {
                if u == 0.0 {
                    0.0
                } else {
                    w * a * u.abs().powf(q)
                }
            })
            .sum()
    }

    pub(crate) fn integral_b_u(&self, x: &[f64]) -> f64 {
        let q = self.spec.p + 1.0;
        x.iter()
            .zip(&self.w_u)
            .zip(&self.b_u)
            .map(|((&u, w), b)| w * b * u.abs().powf(q))
            .sum()
    }

    pub(crate) fn energy_u(&self, x: &[f64], lambda: f64) -> f64 {
        let (g, p) = (self.spec.gamma, self.spec.p);
        0.5 * self.norm_sq_u(x)
            - lambda / (1.0 - g) * self.integral_a_u(x)
            - self.integral_b_u(x) / (p + 1.0)
    }

    /// Index and value of the first non-positive entry.
    pub(crate) fn first_nonpositive(&self, x: &[f64]) -> Option<(usize, f64)> {
        x.iter()
            .position(|&v| !(v > 0.0))
            .map(|k| (self.unknowns[k], x[k]))
    }

    /// Gradient of the discrete energy: `K x - W (λ a x^{-γ} + b x^p)`.
    pub(crate) fn energy_gradient_u(&self, x: &[f64], lambda: f64) -> Result<Vec<f64>> {
        if let Some((node, value)) = self.first_nonpositive(x) {
            return Err(Error::NonPositiveField { node, value });
        }
        let (gamma, p) = (self.spec.gamma, self.spec.p);
        let mut grad = self.stiffness.mul(x);
        for k in 0..x.len() {
            let u = x[k];
            grad[k] -=
                self.w_u[k] * (lambda * self.a_u[k] * u.powf(-gamma) + self.b_u[k] * u.powf(p));
        }
        Ok(grad)
    }

    /// Weighted L² norm of the strong residual `grad_k / w_k`.
    pub(crate) fn residual_norm_from_gradient(&self, grad: &[f64]) -> f64 {
        grad.iter()
            .zip(&self.w_u)
            .map(|(g, w)| g * g / w)
            .sum::<f64>()
            .sqrt()
    }

    // ---- field level API ------------------------------------------------

    /// Discrete `‖u‖² = ∫ |∇u|² + V u²`.
    pub fn norm_sq(&self, u: &Field) -> Result<f64> {
        Ok(self.norm_sq_u(&self.gather(u)?))
    }

    /// Discrete `∫ a |u|^{1-γ}`; `|u|^{1-γ}` is taken as 0 where `u = 0`.
    pub fn integral_a(&self, u: &Field) -> Result<f64> {
        Ok(self.integral_a_u(&self.gather(u)?))
    }

    /// Discrete `∫ b |u|^{p+1}`.
    pub fn integral_b(&self, u: &Field) -> Result<f64> {
        Ok(self.integral_b_u(&self.gather(u)?))
    }

    /// `Φ_λ(u) = ½‖u‖² - λ/(1-γ) ∫a|u|^{1-γ} - 1/(p+1) ∫b|u|^{p+1}`.
    pub fn energy(&self, u: &Field, lambda: f64) -> Result<f64> {
        Ok(self.energy_u(&self.gather(u)?, lambda))
    }

    /// Residual of `-Δu + Vu - λ a u^{-γ} - b u^p` at the interior nodes.
    ///
    /// The nodal value is the Galerkin residual against the hat function of
    /// the node divided by its quadrature weight; the norm is
    /// `sqrt(Σ w_k r_k²)`. Fails with [`Error::NonPositiveField`] when `u`
    /// has an interior value `<= 0`.
    pub fn weak_residual(&self, u: &Field, lambda: f64) -> Result<WeakResidual> {
        let x = self.gather(u)?;
        let grad = self.energy_gradient_u(&x, lambda)?;
        let norm = self.residual_norm_from_gradient(&grad);
        let strong: Vec<f64> = grad.iter().zip(&self.w_u).map(|(g, w)| g / w).collect();
        Ok(WeakResidual {
            residual: self.scatter(&strong),
            norm,
        })
    }

    /// Field from a closed-form function of the node coordinates; boundary
    /// nodes are set to zero.
    pub fn field_from_fn(&self, f: impl Fn(Point) -> f64) -> Field {
        Field::from_fn(self.grid.clone(), f)
    }
}

/// Assembles `K` over `nodes`; edges to nodes outside the unknown set become
/// Dirichlet contributions on the diagonal.
fn assemble(
    grid: &Grid,
    slot: &[Option<usize>],
    nodes: &[usize],
    v: &[f64],
    mask: &[bool],
) -> SparseSym {
    let mut diag: Vec<f64> = nodes.iter().map(|&n| grid.weights[n] * v[n]).collect();
    let mut off = Vec::new();
    for e in &grid.edges {
        let (si, sj) = (
            slot[e.i].filter(|_| mask[e.i]),
            slot[e.j].filter(|_| mask[e.j]),
        );
        match (si, sj) {
            (Some(a), Some(b)) => {
                diag[a] += e.conductance;
                diag[b] += e.conductance;
                off.push((a.min(b), a.max(b), -e.conductance));
            }
            (Some(a), None) => diag[a] += e.conductance,
            (None, Some(b)) => diag[b] += e.conductance,
            (None, None) => {}
        }
    }
    SparseSym { diag, off }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::spec::DomainSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// `(-π/2, π/2)` with `V = 1`, `a = 1`, `b = 1`.
    pub(crate) fn unit_interval(points: usize) -> Problem {
        Problem::new(ProblemSpec {
            domain: DomainSpec::interval(PI / 2.0, points),
            v: Coefficient::constant(1.0),
            a: Coefficient::constant(1.0),
            b: Coefficient::constant(1.0),
            ..ProblemSpec::benchmark()
        })
        .unwrap()
    }

    fn random_positive(problem: &Problem, rng: &mut ChaCha8Rng) -> Field {
        let x: Vec<f64> = (0..problem.unknown_count())
            .map(|_| rng.random_range(0.01..2.0))
            .collect();
        problem.scatter(&x)
    }

    #[test]
    fn zero_field() {
        let problem = unit_interval(64);
        let zero = Field::zeros(problem.grid().clone());
        assert_eq!(problem.norm_sq(&zero).unwrap(), 0.0);
        assert_eq!(problem.integral_a(&zero).unwrap(), 0.0);
        assert_eq!(problem.integral_b(&zero).unwrap(), 0.0);
        assert_eq!(problem.energy(&zero, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn norm_of_cosine_converges_at_second_order() {
        // ∫_{-π/2}^{π/2} sin² + cos² = π
        let errors: Vec<f64> = [101, 201, 401]
            .iter()
            .map(|&n| {
                let problem = unit_interval(n);
                let u = problem.field_from_fn(|pt| pt.x.cos());
                (problem.norm_sq(&u).unwrap() - PI).abs()
            })
            .collect();
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!((order - 2.0).abs() < 0.05, "order {order}");
        }
        assert!(errors[2] < 1e-4);
    }

    #[test]
    fn integral_a_against_reference_quadrature() {
        // ∫ cos^{1/2} on (-π/2, π/2) by a 10^6-panel midpoint rule
        let panels = 1_000_000;
        let h = PI / panels as f64;
        let reference: f64 = (0..panels)
            .map(|i| (-PI / 2.0 + (i as f64 + 0.5) * h).cos().sqrt() * h)
            .sum();
        let problem = unit_interval(401);
        let u = problem.field_from_fn(|pt| pt.x.cos());
        let value = problem.integral_a(&u).unwrap();
        // the square-root cusp at the end points limits the rate to h^{3/2}
        assert!(
            (value - reference).abs() < 2.0 * problem.grid().spacing.powf(1.5),
            "{value} vs {reference}"
        );
    }

    #[test]
    fn homogeneity_and_coercivity() {
        let problem = Problem::new(ProblemSpec::benchmark()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (g, p) = (problem.gamma(), problem.p());
        let min_v = problem.v().iter().copied().fold(f64::INFINITY, f64::min);
        for _ in 0..100 {
            let u = random_positive(&problem, &mut rng);
            let s: f64 = rng.random_range(0.01..100.0);
            let su = u.scaled(s);
            let rel = |x: f64, y: f64| (x - y).abs() / y.abs();
            assert!(
                rel(
                    problem.norm_sq(&su).unwrap(),
                    s * s * problem.norm_sq(&u).unwrap()
                ) < 1e-12
            );
            assert!(
                rel(
                    problem.integral_a(&su).unwrap(),
                    s.powf(1.0 - g) * problem.integral_a(&u).unwrap()
                ) < 1e-12
            );
            assert!(
                rel(
                    problem.integral_b(&su).unwrap(),
                    s.powf(p + 1.0) * problem.integral_b(&u).unwrap()
                ) < 1e-12
            );
            let l2: f64 = u
                .values()
                .iter()
                .zip(&problem.grid().weights)
                .map(|(u, w)| w * u * u)
                .sum();
            assert!(problem.norm_sq(&u).unwrap() >= min_v * l2);
        }
    }

    #[test]
    fn energy_is_affine_decreasing_in_lambda() {
        let problem = Problem::new(ProblemSpec::benchmark()).unwrap();
        let u = problem.field_from_fn(|pt| (-pt.x * pt.x).exp());
        let slope = -problem.integral_a(&u).unwrap() / (1.0 - problem.gamma());
        let e0 = problem.energy(&u, 0.0).unwrap();
        for lambda in [0.5, 1.0, 7.0] {
            let e = problem.energy(&u, lambda).unwrap();
            assert!((e - (e0 + slope * lambda)).abs() < 1e-12 * e0.abs().max(1.0));
        }
        assert!(slope < 0.0);
    }

    #[test]
    fn residual_requires_positive_interior() {
        let problem = unit_interval(64);
        let mut values = problem.field_from_fn(|pt| pt.x.cos()).values().to_vec();
        values[20] = 0.0;
        let u = Field::new(problem.grid().clone(), values).unwrap();
        match problem.weak_residual(&u, 1.0) {
            Err(Error::NonPositiveField { node: 20, .. }) => {}
            other => panic!("expected NonPositiveField, got {other:?}"),
        }
    }

    #[test]
    fn manufactured_residual_converges_at_second_order() {
        // u* = cos x solves -u'' + V u = λ a u^{-γ} + u^p with
        // a = ((1 + V) cos x - cos^p x) cos^γ x / λ.
        let (lambda, vconst) = (0.7, 3.0);
        let norms: Vec<f64> = [101, 201, 401]
            .iter()
            .map(|&n| {
                let base = unit_interval(n);
                let spec = base.spec().clone();
                let grid = base.grid().clone();
                let v = vec![vconst; grid.len()];
                let a: Vec<f64> = grid
                    .coords
                    .iter()
                    .map(|pt| {
                        let c = pt.x.cos().max(1e-300);
                        (((1.0 + vconst) * c - c.powi(3)) * c.powf(0.5) / lambda).max(1e-300)
                    })
                    .collect();
                let b = vec![1.0; grid.len()];
                let problem = Problem::with_nodal_coefficients(spec, v, a, b).unwrap();
                let u = problem.field_from_fn(|pt| pt.x.cos());
                problem.weak_residual(&u, lambda).unwrap().norm
            })
            .collect();
        for pair in norms.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(order > 1.9, "order {order} from {norms:?}");
        }
    }

    #[test]
    fn residual_is_linear_in_coefficient_data() {
        let base = unit_interval(80);
        let grid = base.grid().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut table = || {
            (0..grid.len())
                .map(|_| rng.random_range(0.1..2.0))
                .collect::<Vec<f64>>()
        };
        let (v, a1, a2, b1, b2) = (table(), table(), table(), table(), table());
        let build = |a: &[f64], b: &[f64]| {
            Problem::with_nodal_coefficients(base.spec().clone(), v.clone(), a.to_vec(), b.to_vec())
                .unwrap()
        };
        let sum = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a + b).collect::<Vec<_>>();
        let lambda = 1.3;
        let u = base.field_from_fn(|pt| pt.x.cos() + 0.1);
        let r = |pb: &Problem| {
            pb.weak_residual(&u, lambda)
                .unwrap()
                .residual
                .values()
                .to_vec()
        };
        let r_sum = r(&build(&sum(&a1, &a2), &sum(&b1, &b2)));
        let r1 = r(&build(&a1, &b1));
        let (g, p) = (base.gamma(), base.p());
        for k in 1..grid.len() - 1 {
            let uk = u.values()[k];
            let contribution = -lambda * a2[k] * uk.powf(-g) - b2[k] * uk.powf(p);
            assert!((r_sum[k] - (r1[k] + contribution)).abs() < 1e-10 * r1[k].abs().max(1.0));
        }
    }

    #[test]
    fn coefficient_validation() {
        let mut spec = ProblemSpec::benchmark();
        spec.v = Coefficient::expr("x").unwrap();
        assert!(Problem::new(spec.clone()).is_err());
        spec.v = Coefficient::constant(1.0);
        spec.b = Coefficient::constant(-1.0);
        assert!(Problem::new(spec.clone()).is_err());
        spec.b = Coefficient::constant(1.0);
        spec.a = Coefficient::expr("x^2").unwrap();
        assert!(Problem::new(spec.clone()).is_err(), "a vanishes at x = 0");
        spec.a = Coefficient::Table(vec![1.0; 3]);
        assert!(Problem::new(spec).is_err());
    }

    #[test]
    fn radial_norm_matches_ball_integral() {
        // u = cos(π r / (2R)) on the unit... ball in R^3, V = 1
        let spec = ProblemSpec {
            domain: DomainSpec::radial(3, 1.0, 401),
            v: Coefficient::constant(1.0),
            a: Coefficient::constant(1.0),
            b: Coefficient::constant(1.0),
            ..ProblemSpec::benchmark()
        };
        let problem = Problem::new(spec).unwrap();
        let k = PI / 2.0;
        let u = problem.field_from_fn(|pt| (k * pt.r).cos());
        // 4π ∫_0^1 (k² sin²(kr) + cos²(kr)) r² dr by fine midpoint rule
        let panels = 200_000;
        let h = 1.0 / panels as f64;
        let exact: f64 = (0..panels)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                4.0 * PI * (k * k * (k * r).sin().powi(2) + (k * r).cos().powi(2)) * r * r * h
            })
            .sum();
        let got = problem.norm_sq(&u).unwrap();
        assert!((got - exact).abs() / exact < 1e-4, "{got} vs {exact}");
    }
}
