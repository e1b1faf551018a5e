//! Extremal parameters: `λ* = inf λ(u)`, the energy-sign threshold `λ̂`,
//! and the nonexistence bound `λ^*` obtained from the first eigenvalue of
//! `-Δ + V` with weight `m = min(a, b)` on a subdomain where `b > 0`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::domain::{DomainMode, Field, Problem};
use crate::error::{Error, Result};
use crate::fiber::{c_gamma_p, FiberCoefficients};
use crate::init;
use crate::linalg::{conjugate_gradient, dot, norm, SparseSym};

/// Settings of the multi-start `λ*` estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when λ decreased by less than `stall_tol` (relative) over this
    /// many iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
    pub seed: u64,
    pub armijo: f64,
    /// Projection floor: one step may shrink a value by at most this factor.
    pub pos_floor: f64,
    pub newton_max_iter: usize,
    pub newton_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 16,
            max_iter: 5000,
            stall_window: 25,
            stall_tol: 1e-10,
            seed: 0x5eed,
            armijo: 1e-4,
            pos_floor: 0.1,
            newton_max_iter: 40,
            newton_tol: 1e-13,
        }
    }
}

/// Outcome of one restart of the `λ*` estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartOutcome {
    pub lambda: f64,
    pub descent_iterations: usize,
    pub newton_iterations: usize,
    pub polished: bool,
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LambdaStarEstimate {
    pub lambda_star: f64,
    /// Minimizer scaled so that `t(u) = 1`, i.e. a member of `N⁰_{λ*}`.
    pub minimizer: Field,
    pub best_restart: usize,
    pub restarts: Vec<RestartOutcome>,
    /// Normalized residual of the stationarity identity
    /// `2(u,ψ) - (p+1)∫b u^p ψ - (1-γ)λ* ∫a u^{-γ} ψ = 0` over nodal ψ.
    pub stationarity_residual: f64,
}

impl LambdaStarEstimate {
    /// Largest relative deviation of a restart value from the best one.
    pub fn restart_spread(&self) -> f64 {
        self.restarts
            .iter()
            .map(|r| (r.lambda - self.lambda_star).abs() / self.lambda_star)
            .fold(0.0, f64::max)
    }
}

/// First eigenpair of `-Δu + V u = λ m u` on `Ω` with Dirichlet data on `∂Ω`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda_one: f64,
    /// Positive on `Ω`, zero elsewhere, `max = 1`.
    pub eigenfunction: Field,
    /// `m = min(a, b)` at every node.
    pub weight: Vec<f64>,
    pub mask: Vec<bool>,
    pub iterations: usize,
    /// `‖e₁‖²_Ω / ∫_Ω m e₁²`.
    pub rayleigh_quotient: f64,
}

#[derive(Debug, Clone)]
pub struct ExtremalReport {
    pub lambda_star: LambdaStarEstimate,
    pub lambda_hat: f64,
    pub lambda_upper: f64,
    pub eigen: EigenPair,
}

impl ExtremalReport {
    /// `λ* < λ^*`; a violation is a diagnostic, not an error.
    pub fn ordering_holds(&self) -> bool {
        self.lambda_star.lambda_star < self.lambda_upper
    }
}

/// `(1-γ)(p+1)^{(1+γ)/(p-1)} / 2^{(p+γ)/(p-1)}`, the ratio `λ̂/λ*`.
pub fn lambda_hat_ratio(gamma: f64, p: f64) -> f64 {
    (1.0 - gamma) * (p + 1.0).powf((1.0 + gamma) / (p - 1.0)) / 2f64.powf((p + gamma) / (p - 1.0))
}

pub fn lambda_hat_from_star(lambda_star: f64, gamma: f64, p: f64) -> Result<f64> {
    if !(lambda_star > 0.0 && lambda_star.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda_star must be positive, got {lambda_star}"
        )));
    }
    Ok(lambda_hat_ratio(gamma, p) * lambda_star)
}

/// `λ^* = λ₁^{(p+γ)/(p-1)} ((γ+1)/(p-1))^{(γ+1)/(p-1)} ((p-1)/(p+γ))^{(p+γ)/(p-1)}`.
pub fn lambda_upper(lambda_one: f64, gamma: f64, p: f64) -> Result<f64> {
    if !(lambda_one > 0.0 && lambda_one.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda_one must be positive, got {lambda_one}"
        )));
    }
    let k = (p + gamma) / (p - 1.0);
    Ok(lambda_one.powf(k)
        * ((gamma + 1.0) / (p - 1.0)).powf((gamma + 1.0) / (p - 1.0))
        * ((p - 1.0) / (p + gamma)).powf(k))
}

/// Minimizer `t_λ` and minimum `g̃(λ)` of `g(t) = λ t^{-γ-1} + t^{p-1}`.
pub fn g_min_profile(lambda: f64, gamma: f64, p: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let t = (lambda * (gamma + 1.0) / (p - 1.0)).powf(1.0 / (p + gamma));
    let value = lambda.powf((p - 1.0) / (p + gamma))
        * ((gamma + 1.0) / (p - 1.0)).powf((-gamma - 1.0) / (p + gamma))
        * ((p + gamma) / (p - 1.0));
    Ok((t, value))
}

// ---- λ* estimation -------------------------------------------------------

struct LogLambda<'a> {
    problem: &'a Problem,
    alpha: f64,
    beta: f64,
}

impl<'a> LogLambda<'a> {
    fn new(problem: &'a Problem) -> Self {
        let (g, p) = (problem.gamma(), problem.p());
        LogLambda {
            problem,
            alpha: (p + g) / (p - 1.0),
            beta: (1.0 + g) / (p - 1.0),
        }
    }

    fn coeffs(&self, x: &[f64]) -> FiberCoefficients {
        FiberCoefficients::of_unknowns(self.problem, x)
    }

    /// `ln λ(x)`, or `None` outside `Z⁺`.
    fn value(&self, x: &[f64]) -> Option<f64> {
        let c = self.coeffs(x);
        if c.g > 0.0 && c.f > 0.0 {
            Some(
                c_gamma_p(c.gamma, c.p).ln() + self.alpha * c.e.ln()
                    - self.beta * c.g.ln()
                    - c.f.ln(),
            )
        } else {
            None
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let pb = self.problem;
        let c = self.coeffs(x);
        let (gamma, p) = (c.gamma, c.p);
        let mut grad = pb.stiffness().mul(x);
        let (w, a, b) = (pb.weights_u(), pb.a_u(), pb.b_u());
        for k in 0..x.len() {
            let u = x[k];
            let da = if u > 0.0 {
                (1.0 - gamma) * w[k] * a[k] * u.powf(-gamma)
            } else {
                0.0
            };
            let db = (p + 1.0) * w[k] * b[k] * u.abs().powf(p);
            grad[k] = 2.0 * self.alpha * grad[k] / c.e - self.beta * db / c.g - da / c.f;
        }
        grad
    }
}

fn normalize(problem: &Problem, x: &mut [f64]) {
    let s = problem.norm_sq_u(x).sqrt();
    x.iter_mut().for_each(|v| *v /= s);
}

/// Projected, Sobolev-preconditioned gradient descent on `ln λ(u)`.
fn descend_lambda(
    problem: &Problem,
    mut x: Vec<f64>,
    opt: &OptimizerConfig,
) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let objective = LogLambda::new(problem);
    normalize(problem, &mut x);
    let mut value = objective
        .value(&x)
        .ok_or_else(|| Error::InvalidArgument("initial field has ∫b|u|^(p+1) <= 0".into()))?;
    let mut history = vec![value.exp()];
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    for it in 0..opt.max_iter {
        iterations = it + 1;
        let grad = objective.gradient(&x);
        let dir: Vec<f64> = problem
            .stiffness_lu()
            .solve(&grad)
            .into_iter()
            .map(|d| -d)
            .collect();
        let mut accepted = None;
        let mut s = (2.0 * step).min(1e6);
        for _ in 0..60 {
            let trial: Vec<f64> = x
                .iter()
                .zip(&dir)
                .map(|(&xi, &di)| (xi + s * di).max(opt.pos_floor * xi))
                .collect();
            if let Some(v) = objective.value(&trial) {
                let decrease: f64 = grad
                    .iter()
                    .zip(trial.iter().zip(&x))
                    .map(|(g, (t, xi))| g * (t - xi))
                    .sum();
                if v <= value + opt.armijo * decrease && decrease < 0.0 {
                    accepted = Some((trial, v));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((mut trial, v)) = accepted else {
            break;
        };
        step = s;
        normalize(problem, &mut trial);
        x = trial;
        value = v;
        history.push(value.exp());
        let n = history.len();
        if n > opt.stall_window {
            let old = history[n - 1 - opt.stall_window];
            if (old - history[n - 1]) <= opt.stall_tol * old {
                break;
            }
        }
    }
    Ok((x, iterations, history))
}

/// Scales `x` onto `N⁰_{λ(x)}` (so that `t(x) = 1`) and returns `λ(x)`.
fn to_degenerate(problem: &Problem, x: &mut [f64]) -> Result<f64> {
    let c = FiberCoefficients::of_unknowns(problem, x);
    let (t, lambda) = c.inflection_point()?;
    x.iter_mut().for_each(|v| *v *= t);
    Ok(lambda)
}

/// Residual of the λ*-stationarity system at `(x, μ)`: the nodal identity
/// and the Nehari constraint `e - μ f - g`.
fn stationarity_system(problem: &Problem, x: &[f64], mu: f64) -> (Vec<f64>, f64) {
    let (gamma, p) = (problem.gamma(), problem.p());
    let (w, a, b) = (problem.weights_u(), problem.a_u(), problem.b_u());
    let mut g1 = problem.stiffness().mul(x);
    for k in 0..x.len() {
        let u = x[k];
        g1[k] = 2.0 * g1[k]
            - (p + 1.0) * w[k] * b[k] * u.powf(p)
            - (1.0 - gamma) * mu * w[k] * a[k] * u.powf(-gamma);
    }
    let c = FiberCoefficients::of_unknowns(problem, x);
    (g1, c.e - mu * c.f - c.g)
}

fn scaled_stationarity(problem: &Problem, x: &[f64], g1: &[f64]) -> f64 {
    let norm_u = problem.norm_sq_u(x).sqrt();
    g1.iter()
        .zip(&problem.stiffness().diag)
        .map(|(r, kii)| r.abs() / (norm_u * kii.sqrt()))
        .fold(0.0, f64::max)
}

/// Normalized stationarity residual of a candidate `λ*`-minimizer; the field
/// is first rescaled onto `N⁰_{λ(u)}` where the identity is meaningful.
pub fn stationarity_residual(problem: &Problem, u: &Field) -> Result<f64> {
    let mut x = problem.gather(u)?;
    if let Some((node, value)) = problem.first_nonpositive(&x) {
        return Err(Error::NonPositiveField { node, value });
    }
    let mu = to_degenerate(problem, &mut x)?;
    let (g1, _) = stationarity_system(problem, &x, mu);
    Ok(scaled_stationarity(problem, &x, &g1))
}

/// Newton on the bordered system for `(u, λ*)`; returns the iteration count.
fn polish_lambda_star(problem: &Problem, x: &mut Vec<f64>, opt: &OptimizerConfig) -> Result<usize> {
    let (gamma, p) = (problem.gamma(), problem.p());
    let (w, a, b) = (
        problem.weights_u().to_vec(),
        problem.a_u().to_vec(),
        problem.b_u().to_vec(),
    );
    let mut mu = to_degenerate(problem, x)?;
    let measure = |x: &[f64], mu: f64| {
        let (g1, g2) = stationarity_system(problem, x, mu);
        let e = problem.norm_sq_u(x);
        scaled_stationarity(problem, x, &g1).max(g2.abs() / e)
    };
    let mut current = measure(x, mu);
    for it in 0..opt.newton_max_iter {
        if current < opt.newton_tol {
            return Ok(it);
        }
        let (g1, g2) = stationarity_system(problem, x, mu);
        let shift: Vec<f64> = (0..x.len())
            .map(|k| {
                let u = x[k];
                w[k] * (-p * (p + 1.0) * b[k] * u.powf(p - 1.0)
                    + gamma * (1.0 - gamma) * mu * a[k] * u.powf(-gamma - 1.0))
            })
            .collect();
        let k2 = SparseSym {
            diag: problem.stiffness().diag.iter().map(|d| 2.0 * d).collect(),
            off: problem
                .stiffness()
                .off
                .iter()
                .map(|&(i, j, v)| (i, j, 2.0 * v))
                .collect(),
        };
        let lu = k2.with_diagonal_shift(&shift).factor()?;
        let column: Vec<f64> = (0..x.len())
            .map(|k| -(1.0 - gamma) * w[k] * a[k] * x[k].powf(-gamma))
            .collect();
        // row of ∂G2/∂x coincides with G1
        let y1 = lu.solve(&g1);
        let y2 = lu.solve(&column);
        let c = FiberCoefficients::of_unknowns(problem, x);
        let denom = -c.f - dot(&g1, &y2);
        let d_mu = (g2 - dot(&g1, &y1)) / denom;
        let dx: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a - d_mu * b).collect();
        // x_new = x - dx, mu_new = mu - d_mu, damped to keep positivity
        let min_x = x.iter().copied().fold(f64::INFINITY, f64::min);
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi - alpha * di).collect();
            let trial_min = trial.iter().copied().fold(f64::INFINITY, f64::min);
            if trial_min >= opt.pos_floor * min_x {
                let m = measure(&trial, mu - alpha * d_mu);
                if m < current {
                    *x = trial;
                    mu -= alpha * d_mu;
                    current = m;
                    improved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !improved {
            return Err(Error::NoConvergence {
                iterations: it,
                residual: current,
            });
        }
    }
    if current < 1e3 * opt.newton_tol {
        Ok(opt.newton_max_iter)
    } else {
        Err(Error::NoConvergence {
            iterations: opt.newton_max_iter,
            residual: current,
        })
    }
}

/// Starting fields: a bump at the peak of `b`, the optional extra field
/// (typically `e₁`), then smoothed random positives.
fn starting_fields(
    problem: &Problem,
    opt: &OptimizerConfig,
    extra: Option<&Field>,
) -> Result<Vec<Vec<f64>>> {
    let l = problem.grid().half_width;
    let b = problem.b().to_vec();
    let peak = init::peak_of(problem, |n| b[n]);
    let mut out = vec![init::bump(problem, peak, 0.25 * l)];
    if let Some(field) = extra {
        let x = problem.gather(field)?;
        if x.iter().all(|&v| v > 0.0) {
            out.push(x);
        }
    }
    let mut k = 0u64;
    while out.len() < opt.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opt.seed.wrapping_add(k));
        out.push(init::smoothed_random(problem, &mut rng));
        k += 1;
    }
    out.truncate(opt.restarts.max(1));
    Ok(out)
}

/// Multi-start minimization of `λ(u)` over the positive cone.
///
/// Each restart runs Sobolev-preconditioned projected gradient descent on
/// `ln λ(u)` (the ray direction is irrelevant by 0-homogeneity, so iterates
/// are renormalized to `‖u‖ = 1`), then Newton on the stationarity system.
/// Restarts run in parallel and are reduced in index order, so the result
/// does not depend on the thread count.
pub fn estimate_lambda_star(
    problem: &Problem,
    opt: &OptimizerConfig,
    extra: Option<&Field>,
) -> Result<LambdaStarEstimate> {
    let starts = starting_fields(problem, opt, extra)?;
    let results: Vec<Result<(Vec<f64>, RestartOutcome)>> = starts
        .into_par_iter()
        .map(|x0| {
            let (mut x, descent_iterations, history) = descend_lambda(problem, x0, opt)?;
            let snapshot = x.clone();
            let (polished, newton_iterations) = match polish_lambda_star(problem, &mut x, opt) {
                Ok(n) => (true, n),
                Err(_) => {
                    x = snapshot;
                    to_degenerate(problem, &mut x)?;
                    (false, 0)
                }
            };
            let lambda = FiberCoefficients::of_unknowns(problem, &x).lambda_of_u()?;
            Ok((
                x,
                RestartOutcome {
                    lambda,
                    descent_iterations,
                    newton_iterations,
                    polished,
                    history,
                },
            ))
        })
        .collect();

    let mut best: Option<(usize, Vec<f64>)> = None;
    let mut outcomes = Vec::new();
    let mut last_err = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((x, outcome)) => {
                let better = match &best {
                    None => true,
                    Some((j, _)) => outcome.lambda < outcomes_lambda(&outcomes, *j),
                };
                outcomes.push(outcome);
                if better {
                    best = Some((outcomes.len() - 1, x));
                }
                let _ = i;
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some((best_restart, x)) = best else {
        return Err(last_err
            .unwrap_or_else(|| Error::InvalidProblem("no restart found ∫b|u|^(p+1) > 0".into())));
    };
    let lambda_star = outcomes[best_restart].lambda;
    let minimizer = problem.scatter(&x);
    let stationarity = stationarity_residual(problem, &minimizer)?;
    Ok(LambdaStarEstimate {
        lambda_star,
        minimizer,
        best_restart,
        restarts: outcomes,
        stationarity_residual: stationarity,
    })
}

fn outcomes_lambda(outcomes: &[RestartOutcome], i: usize) -> f64 {
    outcomes[i].lambda
}

// ---- first eigenpair -----------------------------------------------------

/// Nodes with `b > floor`.
fn positive_b(problem: &Problem, floor: f64) -> Vec<bool> {
    problem.b().iter().map(|&b| b > floor).collect()
}

/// Default `Ω`: the largest axis-aligned interval/box (or centred ball in
/// radial mode) of interior nodes on which `b > floor`.
pub fn default_omega(problem: &Problem, floor: f64) -> Result<Vec<bool>> {
    let grid = problem.grid();
    let good = positive_b(problem, floor);
    let n = grid.points;
    let ok = |node: usize| good[node] && !grid.boundary[node];
    let mut mask = vec![false; grid.len()];
    match grid.mode {
        DomainMode::Interval => {
            let (mut best, mut best_start, mut run, mut start) = (0, 0, 0, 0);
            for i in 0..n {
                if ok(i) {
                    if run == 0 {
                        start = i;
                    }
                    run += 1;
                    if run > best {
                        best = run;
                        best_start = start;
                    }
                } else {
                    run = 0;
                }
            }
            mask[best_start..best_start + best]
                .iter_mut()
                .for_each(|m| *m = true);
        }
        DomainMode::Radial { .. } => {
            let mut i = 0;
            while i < n && ok(i) {
                mask[i] = true;
                i += 1;
            }
        }
        DomainMode::Box => {
            let id = |i: usize, j: usize| j * n + i;
            let mut best = (0usize, 0, 0, 0, 0); // area, j0, j1, i0, i1
            for j0 in 0..n {
                let mut col_ok: Vec<bool> = (0..n).map(|i| ok(id(i, j0))).collect();
                for j1 in j0..n {
                    if j1 > j0 {
                        for (i, c) in col_ok.iter_mut().enumerate() {
                            *c = *c && ok(id(i, j1));
                        }
                    }
                    let (mut run, mut start) = (0, 0);
                    for i in 0..n {
                        if col_ok[i] {
                            if run == 0 {
                                start = i;
                            }
                            run += 1;
                            let area = run * (j1 - j0 + 1);
                            if area > best.0 {
                                best = (area, j0, j1, start, i);
                            }
                        } else {
                            run = 0;
                        }
                    }
                }
            }
            if best.0 > 0 {
                for j in best.1..=best.2 {
                    for i in best.3..=best.4 {
                        mask[id(i, j)] = true;
                    }
                }
            }
        }
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::InvalidProblem(format!(
            "no subdomain with b > {floor:e} found"
        )));
    }
    Ok(mask)
}

pub const EIGEN_TOL: f64 = 1e-10;
pub const EIGEN_CG_TOL: f64 = 1e-10;
pub const EIGEN_MAX_ITER: usize = 500;

/// Smallest eigenvalue of the discrete `-Δ + V` against weight
/// `m = min(a, b)` on `Ω` by inverse power iteration with shifted CG solves.
pub fn min_eigenpair(problem: &Problem, omega: &[bool]) -> Result<EigenPair> {
    if omega.len() != problem.grid().len() {
        return Err(Error::GridMismatch);
    }
    let weight: Vec<f64> = problem
        .a()
        .iter()
        .zip(problem.b())
        .map(|(a, b)| a.min(*b))
        .collect();
    let (nodes, k) = problem.restricted_operator(omega);
    if nodes.is_empty() {
        return Err(Error::InvalidArgument(
            "subdomain has no interior nodes".into(),
        ));
    }
    let grid = problem.grid();
    let mass: Vec<f64> = nodes.iter().map(|&n| grid.weights[n] * weight[n]).collect();
    if let Some(i) = nodes.iter().position(|&n| !(weight[n] > 0.0)) {
        return Err(Error::NonPositiveWeight {
            node: nodes[i],
            value: weight[nodes[i]],
        });
    }
    let m_norm = |x: &[f64]| {
        x.iter()
            .zip(&mass)
            .map(|(x, m)| m * x * x)
            .sum::<f64>()
            .sqrt()
    };

    let mut x = vec![1.0; nodes.len()];
    let s = m_norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut rho = k.form(&x, &x);
    let mut y = x.clone();
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..EIGEN_MAX_ITER {
        iterations = it + 1;
        // shift only once ρ is a reasonable upper bound for λ₁
        let sigma = if it >= 3 { 0.5 * rho } else { 0.0 };
        let shifted = k.with_diagonal_shift(&mass.iter().map(|m| -sigma * m).collect::<Vec<_>>());
        let rhs: Vec<f64> = x.iter().zip(&mass).map(|(x, m)| m * x).collect();
        let solved =
            conjugate_gradient(&shifted, &rhs, &mut y, EIGEN_CG_TOL, 20 * nodes.len() + 100);
        if solved.is_err() {
            // fall back to the unshifted operator
            y.clone_from(&x);
            conjugate_gradient(&k, &rhs, &mut y, EIGEN_CG_TOL, 20 * nodes.len() + 100)?;
        }
        let s = m_norm(&y);
        y.iter_mut().for_each(|v| *v /= s);
        let rho_new = k.form(&y, &y);
        x.clone_from(&y);
        let change = (rho_new - rho).abs();
        rho = rho_new;
        if change <= EIGEN_TOL * rho {
            let kx = k.mul(&x);
            let res: Vec<f64> = kx
                .iter()
                .zip(&x)
                .zip(&mass)
                .map(|((kx, x), m)| kx - rho * m * x)
                .collect();
            if norm(&res) <= 1e-6 * norm(&kx) {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations,
            residual: rho,
        });
    }
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    x.iter_mut().for_each(|v| *v /= max);
    let rayleigh = k.form(&x, &x) / x.iter().zip(&mass).map(|(x, m)| m * x * x).sum::<f64>();
    let mut values = vec![0.0; grid.len()];
    for (&n, &v) in nodes.iter().zip(&x) {
        values[n] = v;
    }
    Ok(EigenPair {
        lambda_one: rho,
        eigenfunction: Field::new(grid.clone(), values)?,
        weight,
        mask: omega.to_vec(),
        iterations,
        rayleigh_quotient: rayleigh,
    })
}

/// Everything the `bounds` command reports.
pub fn compute_bounds(problem: &Problem, opt: &OptimizerConfig) -> Result<ExtremalReport> {
    let omega = default_omega(problem, 1e-8)?;
    let eigen = min_eigenpair(problem, &omega)?;
    let upper = lambda_upper(eigen.lambda_one, problem.gamma(), problem.p())?;
    // e₁ is a valid start only where it is positive on every unknown
    let extra = if eigen.eigenfunction.min_interior() > 0.0 {
        Some(&eigen.eigenfunction)
    } else {
        None
    };
    let star = estimate_lambda_star(problem, opt, extra)?;
    let hat = lambda_hat_from_star(star.lambda_star, problem.gamma(), problem.p())?;
    Ok(ExtremalReport {
        lambda_star: star,
        lambda_hat: hat,
        lambda_upper: upper,
        eigen,
    })
}
