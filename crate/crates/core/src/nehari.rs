//! Solutions on the two Nehari branches.
//!
//! For a fixed λ, the ground state `u_λ` minimizes `Φ_λ` over `N⁺_λ` and the
//! second solution `w_λ` minimizes it over `N⁻_λ`. Both are computed in two
//! phases: a descent on the direction of `u`, re-projecting onto the chosen
//! root of the fiber map after every step, followed by a damped Newton
//! polish on the discrete Euler–Lagrange equation.

use rayon::prelude::*;

use crate::domain::{Field, Problem};
use crate::error::{Error, Result};
use crate::fiber::{Branch, FiberCoefficients};
use crate::init;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    pub max_iter: usize,
    /// Target for the weighted L² norm of the strong residual.
    pub tol: f64,
    /// A step may shrink a nodal value by at most this factor.
    pub pos_floor: f64,
    pub max_dampings: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            max_iter: 50,
            tol: 1e-10,
            pos_floor: 0.1,
            max_dampings: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub armijo: f64,
    pub pos_floor: f64,
    /// Hand over to Newton once the residual drops below this value.
    pub switch_tol: f64,
    /// Relative change of `J±` over `stall_window` iterations that counts
    /// as stagnation of the descent.
    pub stall_tol: f64,
    pub stall_window: usize,
    pub newton: NewtonConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 3000,
            armijo: 1e-4,
            pos_floor: 0.1,
            switch_tol: 1e-4,
            stall_tol: 1e-13,
            stall_window: 10,
            newton: NewtonConfig::default(),
        }
    }
}

/// A solution candidate on one branch at one λ.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    pub branch: Branch,
    pub u: Field,
    pub energy: f64,
    pub norm: f64,
    /// `φ''_{λ,u}(1)`.
    pub fiber_second: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖u‖² < λ(p+γ)/(p-1) ∫a|u|^{1-γ}`.
    pub bound_check_plus: bool,
    /// `(1+γ)‖u‖² < (p+γ) ∫b|u|^{p+1}`.
    pub bound_check_minus: bool,
    /// `J±` after every accepted descent step.
    pub descent_history: Vec<f64>,
    /// Energies of distinct local minimizers found from other starts.
    pub candidates: Vec<f64>,
    /// For the plus branch: whether the energy does not exceed that of the
    /// plus-projection of the minus solution. `None` until checked.
    pub ground_state: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Pass,
    Fail,
    NotApplicable,
}

impl Check {
    fn from_bool(ok: bool) -> Check {
        if ok {
            Check::Pass
        } else {
            Check::Fail
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Check::Pass => "pass",
            Check::Fail => "FAIL",
            Check::NotApplicable => "n/a",
        }
    }

    fn ok(&self) -> bool {
        *self != Check::Fail
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// Infinite when the field is not interior-positive.
    pub residual_norm: f64,
    pub residual: Check,
    /// `φ'_{λ,u}(1) / ‖u‖²`.
    pub nehari_residual: f64,
    pub nehari: Check,
    pub fiber_second: f64,
    pub fiber_sign: Check,
    pub min_interior: f64,
    /// First interior node with a non-positive value.
    pub positivity_violation: Option<usize>,
    pub positivity: Check,
    pub bound_plus: Check,
    pub bound_minus: Check,
    pub energy_sign: Check,
    /// Smallest normalized value of `(u,ψ) - λ∫a u^{-γ}ψ - ∫b u^p ψ` over
    /// nodal hat functions ψ ≥ 0; zero for an exact solution.
    pub variational_min: f64,
    pub all_pass: bool,
}

// ---- projection ------------------------------------------------------------

fn project_unknowns(problem: &Problem, x: &[f64], lambda: f64, branch: Branch) -> Result<Vec<f64>> {
    let analysis = FiberCoefficients::of_unknowns(problem, x).classify(lambda)?;
    let t = analysis
        .root(branch)
        .ok_or(Error::MissingRoot(branch.name()))?;
    Ok(x.iter().map(|v| v * t).collect())
}

/// `t±_λ(u)·u`, the member of `N±_λ` on the ray through `u`.
pub fn project_to_nehari(
    problem: &Problem,
    u: &Field,
    lambda: f64,
    branch: Branch,
) -> Result<Field> {
    let x = problem.gather(u)?;
    u.check_positive_cone()?;
    Ok(problem.scatter(&project_unknowns(problem, &x, lambda, branch)?))
}

// ---- Newton ----------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub field: Field,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual before the first step and after every step.
    pub history: Vec<f64>,
}

fn newton_unknowns(
    problem: &Problem,
    mut x: Vec<f64>,
    lambda: f64,
    cfg: &NewtonConfig,
) -> Result<RawNewton> {
    if let Some((node, value)) = problem.first_nonpositive(&x) {
        return Err(Error::NonPositiveField { node, value });
    }
    let (gamma, p) = (problem.gamma(), problem.p());
    let (w, a, b) = (problem.weights_u(), problem.a_u(), problem.b_u());
    let mut grad = problem.energy_gradient_u(&x, lambda)?;
    let mut res = problem.residual_norm_from_gradient(&grad);
    let mut history = vec![res];
    for it in 0..cfg.max_iter {
        if res <= cfg.tol {
            return Ok((x, res, it, true, history));
        }
        let shift: Vec<f64> = (0..x.len())
            .map(|k| {
                w[k] * (lambda * gamma * a[k] * x[k].powf(-gamma - 1.0)
                    - p * b[k] * x[k].powf(p - 1.0))
            })
            .collect();
        let lu = problem.stiffness().with_diagonal_shift(&shift).factor()?;
        let step = lu.solve(&grad);
        // largest α keeping x - α·step >= θ·x node by node
        let mut alpha: f64 = 1.0;
        let mut limiting = None;
        for k in 0..x.len() {
            if step[k] > 0.0 {
                let cap = (1.0 - cfg.pos_floor) * x[k] / step[k];
                if cap < alpha {
                    alpha = cap;
                    limiting = Some(k);
                }
            }
        }
        if alpha < 1e-14 {
            let k = limiting.unwrap_or(0);
            return Err(Error::PositivityLost {
                node: problem.unknowns()[k],
            });
        }
        let mut accepted = false;
        for _ in 0..cfg.max_dampings {
            let trial: Vec<f64> = x
                .iter()
                .zip(&step)
                .map(|(xi, si)| xi - alpha * si)
                .collect();
            let trial_grad = problem.energy_gradient_u(&trial, lambda)?;
            let trial_res = problem.residual_norm_from_gradient(&trial_grad);
            if trial_res <= (1.0 - 1e-4 * alpha) * res {
                x = trial;
                grad = trial_grad;
                res = trial_res;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        history.push(res);
        let n = history.len();
        // two steps in a row gaining less than a factor 2: rounding floor
        let stalled = n >= 3
            && history[n - 1] > 0.5 * history[n - 2]
            && history[n - 2] > 0.5 * history[n - 3];
        if !accepted || stalled {
            return Ok((x, res, it + 1, res <= cfg.tol, history));
        }
    }
    Ok((x, res, cfg.max_iter, res <= cfg.tol, history))
}

/// Damped Newton on `-Δu + Vu - λ a u^{-γ} - b u^p = 0` with Jacobian
/// `-Δ + V + λγ a u^{-γ-1} - p b u^{p-1}`. Steps are damped so that no nodal
/// value shrinks below `pos_floor` times its previous value, then
/// backtracked until the residual decreases. Returns the best iterate even
/// when the tolerance is not met.
pub fn newton_refine(
    problem: &Problem,
    u: &Field,
    lambda: f64,
    cfg: &NewtonConfig,
) -> Result<NewtonOutcome> {
    let x = problem.gather(u)?;
    let (x, residual_norm, iterations, converged, history) =
        newton_unknowns(problem, x, lambda, cfg)?;
    Ok(NewtonOutcome {
        field: problem.scatter(&x),
        residual_norm,
        iterations,
        converged,
        history,
    })
}

/// Field, residual norm, iterations, convergence flag and residual history.
type RawNewton = (Vec<f64>, f64, usize, bool, Vec<f64>);

// ---- branch minimization ----------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn build_point(
    problem: &Problem,
    x: &[f64],
    lambda: f64,
    branch: Branch,
    iterations: usize,
    newton_converged: bool,
    tol: f64,
    descent_history: Vec<f64>,
) -> Result<BranchPoint> {
    let c = FiberCoefficients::of_unknowns(problem, x);
    let (gamma, p) = (c.gamma, c.p);
    let fiber_second = c.phi_double_prime(1.0, lambda)?;
    let residual_norm = match problem.energy_gradient_u(x, lambda) {
        Ok(g) => problem.residual_norm_from_gradient(&g),
        Err(_) => f64::INFINITY,
    };
    let sign_ok = match branch {
        Branch::Plus => fiber_second > 0.0,
        Branch::Minus => fiber_second < 0.0,
    };
    let positive = problem.first_nonpositive(x).is_none();
    Ok(BranchPoint {
        lambda,
        branch,
        u: problem.scatter(x),
        energy: problem.energy_u(x, lambda),
        norm: c.e.sqrt(),
        fiber_second,
        residual_norm,
        iterations,
        converged: newton_converged && residual_norm <= 10.0 * tol && sign_ok && positive,
        bound_check_plus: c.e < lambda * (p + gamma) / (p - 1.0) * c.f,
        bound_check_minus: (1.0 + gamma) * c.e < (p + gamma) * c.g,
        descent_history,
        candidates: Vec::new(),
        ground_state: None,
    })
}

/// Newton polish followed by a final re-projection onto the branch, which
/// removes the small Nehari defect Newton leaves behind.
fn polish(
    problem: &Problem,
    x: Vec<f64>,
    lambda: f64,
    branch: Branch,
    cfg: &NewtonConfig,
) -> Result<(Vec<f64>, usize, bool)> {
    let (x, _, iterations, converged, _) = newton_unknowns(problem, x, lambda, cfg)?;
    // a large rescaling means Newton left the branch; keep the raw iterate
    // so that the fiber sign test rejects it
    let x = match project_unknowns(problem, &x, lambda, branch) {
        Ok(y) if (y[0] / x[0] - 1.0).abs() < 1e-6 => y,
        _ => x,
    };
    Ok((x, iterations, converged))
}

/// Minimizes `J±_λ(u) = Φ_λ(t±_λ(u) u)` starting from `init`.
///
/// The descent direction is the Sobolev gradient `-K⁻¹ ∇Φ_λ(u)` at the
/// current Nehari point; the trial field is clipped from below at
/// `pos_floor` times the current value and projected back onto the branch.
/// Step sizes are backtracked on `J±` and on missing fiber roots.
pub fn minimize_branch(
    problem: &Problem,
    lambda: f64,
    branch: Branch,
    init: &Field,
    opt: &SolverConfig,
) -> Result<BranchPoint> {
    init.check_positive_cone()?;
    let x0 = problem.gather(init)?;
    if let Some((node, value)) = problem.first_nonpositive(&x0) {
        return Err(Error::NonPositiveField { node, value });
    }
    let mut x = project_unknowns(problem, &x0, lambda, branch)?;
    let mut j = problem.energy_u(&x, lambda);
    let mut history = vec![j];
    let mut step: f64 = 1.0;
    let mut iterations = 0;
    for it in 0..opt.max_iter {
        iterations = it;
        let grad = problem.energy_gradient_u(&x, lambda)?;
        if problem.residual_norm_from_gradient(&grad) < opt.switch_tol {
            break;
        }
        let dir: Vec<f64> = problem
            .stiffness_lu()
            .solve(&grad)
            .into_iter()
            .map(|d| -d)
            .collect();
        let mut s = (2.0 * step).min(1e3);
        let mut accepted = None;
        for _ in 0..50 {
            let raw: Vec<f64> = x
                .iter()
                .zip(&dir)
                .map(|(&xi, &di)| (xi + s * di).max(opt.pos_floor * xi))
                .collect();
            if let Ok(trial) = project_unknowns(problem, &raw, lambda, branch) {
                let jt = problem.energy_u(&trial, lambda);
                let decrease: f64 = grad
                    .iter()
                    .zip(raw.iter().zip(&x))
                    .map(|(g, (r, xi))| g * (r - xi))
                    .sum();
                if jt <= j + opt.armijo * decrease {
                    accepted = Some((trial, jt));
                    break;
                }
            }
            s *= 0.5;
        }
        let Some((trial, jt)) = accepted else { break };
        step = s;
        x = trial;
        j = jt;
        history.push(j);
        let n = history.len();
        if n > opt.stall_window {
            let old = history[n - 1 - opt.stall_window];
            if (old - j).abs() <= opt.stall_tol * j.abs().max(1e-300) {
                break;
            }
        }
    }
    let (x, newton_iterations, converged) = polish(problem, x, lambda, branch, &opt.newton)?;
    let point = build_point(
        problem,
        &x,
        lambda,
        branch,
        iterations + newton_iterations,
        converged,
        opt.newton.tol,
        history,
    )?;
    if !point.converged {
        return Err(Error::NoConvergence {
            iterations: point.iterations,
            residual: point.residual_norm,
        });
    }
    Ok(point)
}

/// Continues a branch from a nearby solution: Newton first, then the full
/// Nehari descent from the same start if Newton fails or lands on the wrong
/// branch.
pub fn track_branch(
    problem: &Problem,
    lambda: f64,
    branch: Branch,
    start: &Field,
    opt: &SolverConfig,
) -> Result<BranchPoint> {
    let x0 = problem.gather(start)?;
    if let Ok((x, iterations, true)) = polish(problem, x0, lambda, branch, &opt.newton) {
        let point = build_point(
            problem,
            &x,
            lambda,
            branch,
            iterations,
            true,
            opt.newton.tol,
            Vec::new(),
        )?;
        if point.converged {
            return Ok(point);
        }
    }
    minimize_branch(problem, lambda, branch, start, opt)
}

/// Default starting fields: for the plus branch a bump at the peak of `a`,
/// for the minus branch a bump at the peak of `b` and, if given, a direction
/// such as the `λ*` minimizer.
pub fn default_starts(problem: &Problem, branch: Branch, extra: Option<&Field>) -> Vec<Field> {
    let l = problem.grid().half_width;
    let mut starts = Vec::new();
    match branch {
        Branch::Plus => {
            let a = problem.a().to_vec();
            let peak = init::peak_of(problem, |n| a[n]);
            starts.push(problem.scatter(&init::bump(problem, peak, 0.25 * l)));
            let b = problem.b().to_vec();
            let peak_b = init::peak_of(problem, |n| b[n]);
            starts.push(problem.scatter(&init::bump(problem, peak_b, 0.1 * l)));
        }
        Branch::Minus => {
            if let Some(field) = extra {
                if field.min_interior() > 0.0 {
                    starts.push(field.clone());
                }
            }
            let b = problem.b().to_vec();
            let peak = init::peak_of(problem, |n| b[n]);
            starts.push(problem.scatter(&init::bump(problem, peak, 0.1 * l)));
        }
    }
    starts
}

/// Runs [`minimize_branch`] from each start and keeps the lowest energy;
/// distinct local minimizers (energies differing by more than `1e-6`
/// relative) are listed in `candidates`.
pub fn solve_branch(
    problem: &Problem,
    lambda: f64,
    branch: Branch,
    starts: &[Field],
    opt: &SolverConfig,
) -> Result<BranchPoint> {
    let results: Vec<Result<BranchPoint>> = starts
        .par_iter()
        .map(|s| minimize_branch(problem, lambda, branch, s, opt))
        .collect();
    let mut best: Option<BranchPoint> = None;
    let mut energies = Vec::new();
    let mut last_err = None;
    for r in results {
        match r {
            Ok(point) => {
                if !energies.iter().any(|&e: &f64| {
                    (e - point.energy).abs() <= 1e-6 * e.abs().max(point.energy.abs())
                }) {
                    energies.push(point.energy);
                }
                if best.as_ref().is_none_or(|b| point.energy < b.energy) {
                    best = Some(point);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(mut point) => {
            point.candidates = energies;
            Ok(point)
        }
        None => Err(last_err.unwrap_or_else(|| Error::InvalidArgument("no starting field".into()))),
    }
}

/// Ground-state test: `Φ_λ(u_λ) <= Φ_λ(t⁺_λ(w_λ) w_λ)`.
pub fn certify_ground_state(
    problem: &Problem,
    plus: &BranchPoint,
    minus: &BranchPoint,
) -> Result<bool> {
    if plus.branch != Branch::Plus || minus.branch != Branch::Minus || plus.lambda != minus.lambda {
        return Err(Error::InvalidArgument(
            "need a plus and a minus point at the same lambda".into(),
        ));
    }
    let projected = project_to_nehari(problem, &minus.u, minus.lambda, Branch::Plus)?;
    let other = problem.energy(&projected, minus.lambda)?;
    Ok(plus.energy <= other + 1e-10 * other.abs().max(1e-300))
}

/// Checks a branch point against the equation, the Nehari constraint, the
/// fiber sign of its branch, positivity and the branch integral bounds.
/// Never fails: problems are reported as failed checks.
pub fn verify_solution(problem: &Problem, bp: &BranchPoint, tol: f64) -> VerificationReport {
    let lambda = bp.lambda;
    let x = problem
        .gather(&bp.u)
        .unwrap_or_else(|_| vec![0.0; problem.unknown_count()]);
    let c = FiberCoefficients::of_unknowns(problem, &x);
    let (gamma, p) = (c.gamma, c.p);
    let violation = problem.first_nonpositive(&x).map(|(node, _)| node);
    let min_interior = bp.u.min_interior();

    let (residual_norm, variational_min) = match problem.energy_gradient_u(&x, lambda) {
        Ok(grad) => {
            let norm_u = c.e.sqrt();
            let vmin = grad
                .iter()
                .zip(&problem.stiffness().diag)
                .map(|(g, kii)| g / (norm_u * kii.sqrt()))
                .fold(f64::INFINITY, f64::min);
            (problem.residual_norm_from_gradient(&grad), vmin)
        }
        Err(_) => (f64::INFINITY, f64::NEG_INFINITY),
    };
    // φ'(1) = ‖u‖² - λ∫a u^{1-γ} - ∫b u^{p+1}
    let nehari_residual = (c.e - lambda * c.f - c.g) / c.e;
    let fiber_second = c.e + gamma * lambda * c.f - p * c.g;
    let fiber_sign = match bp.branch {
        Branch::Plus => fiber_second > 0.0,
        Branch::Minus => fiber_second < 0.0,
    };
    let plus_bound = c.e < lambda * (p + gamma) / (p - 1.0) * c.f;
    let minus_bound = (1.0 + gamma) * c.e < (p + gamma) * c.g;
    let energy = problem.energy_u(&x, lambda);

    let residual = Check::from_bool(residual_norm < tol);
    let nehari = Check::from_bool(nehari_residual.abs() <= 1e-10);
    let fiber_sign = Check::from_bool(fiber_sign);
    let positivity = Check::from_bool(violation.is_none());
    let (bound_plus, bound_minus, energy_sign) = match bp.branch {
        Branch::Plus => (
            Check::from_bool(plus_bound),
            Check::NotApplicable,
            Check::from_bool(energy < 0.0),
        ),
        Branch::Minus => (
            Check::NotApplicable,
            Check::from_bool(minus_bound),
            Check::NotApplicable,
        ),
    };
    let all_pass = [
        residual,
        nehari,
        fiber_sign,
        positivity,
        bound_plus,
        bound_minus,
        energy_sign,
    ]
    .iter()
    .all(Check::ok);
    VerificationReport {
        residual_norm,
        residual,
        nehari_residual,
        nehari,
        fiber_second,
        fiber_sign,
        min_interior,
        positivity_violation: violation,
        positivity,
        bound_plus,
        bound_minus,
        energy_sign,
        variational_min,
        all_pass,
    }
}
