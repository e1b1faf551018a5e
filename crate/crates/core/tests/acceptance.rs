//! End-to-end acceptance suite. Runs every criterion, prints one PASS/FAIL
//! line for each and exits non-zero if any failed.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nehari_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

// ---- 1: fiber classification against a sign-scan oracle --------------------

/// Roots of `φ'(t) t^γ = e t^{1+γ} - λ f - g t^{p+γ}` by scanning a
/// log-spaced grid for sign changes and bisecting each bracket.
fn scan_roots(c: &FiberCoefficients, lambda: f64) -> Vec<f64> {
    let h = |t: f64| c.e * t.powf(1.0 + c.gamma) - lambda * c.f - c.g * t.powf(c.p + c.gamma);
    let (lo, hi, n) = (-12.0f64, 12.0f64, 100_000);
    let ts: Vec<f64> = (0..=n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / n as f64))
        .collect();
    let mut roots = Vec::new();
    for w in ts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (ha, hb) = (h(a), h(b));
        if ha == 0.0 {
            roots.push(a);
            continue;
        }
        if ha.signum() == hb.signum() {
            continue;
        }
        for _ in 0..200 {
            let m = (a * b).sqrt();
            if h(m).signum() == ha.signum() {
                a = m;
            } else {
                b = m;
            }
            if b - a <= 1e-16 * b {
                break;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut counts = [0usize; 3];
    let mut done = 0;
    while done < 200 {
        let gamma = rng.random_range(0.05..0.95);
        let p = rng.random_range(1.2..5.0);
        let e = log_uniform(&mut rng, 0.1, 10.0);
        let f = log_uniform(&mut rng, 0.1, 10.0);
        let g = if rng.random_bool(0.2) {
            -rng.random_range(0.0..5.0)
        } else {
            log_uniform(&mut rng, 0.01, 10.0)
        };
        let c = FiberCoefficients::new(e, f, g, gamma, p).map_err(|e| e.to_string())?;
        let lambda = if g > 0.0 {
            let lu = c.lambda_of_u().map_err(|e| e.to_string())?;
            let l = lu * 10f64.powf(rng.random_range(-3.0..0.5));
            if (l / lu - 1.0).abs() < 1e-3 {
                continue;
            }
            l
        } else {
            log_uniform(&mut rng, 1e-3, 1e3)
        };
        let analysis = c.classify(lambda).map_err(|e| e.to_string())?;
        let oracle = scan_roots(&c, lambda);
        ensure(oracle.len() == analysis.root_count(), || {
            format!(
                "root count {} vs oracle {} for {c:?}, λ={lambda}",
                analysis.root_count(),
                oracle.len()
            )
        })?;
        let found: Vec<f64> = [analysis.t_plus, analysis.t_minus]
            .into_iter()
            .flatten()
            .collect();
        for (a, b) in found.iter().zip(&oracle) {
            worst = worst.max(rel(*a, *b));
        }
        counts[oracle.len()] += 1;
        done += 1;
    }
    ensure(worst < 1e-9, || {
        format!("max relative root error {worst:.2e}")
    })?;
    Ok(format!(
        "200 cases (0/1/2 roots: {}/{}/{}), max rel err {worst:.1e}",
        counts[0], counts[1], counts[2]
    ))
}

// ---- 2: closed-form constants -----------------------------------------------

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_c, mut worst_rt, mut max_ratio): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let gamma = rng.random_range(0.01..0.99);
        let p = rng.random_range(1.05..8.0);
        let up = lambda_upper(1.0, gamma, p).map_err(|e| e.to_string())?;
        worst_c = worst_c.max(rel(up, c_gamma_p(gamma, p)));
        max_ratio = max_ratio.max(lambda_hat_ratio(gamma, p));
        let l1 = log_uniform(&mut rng, 1e-2, 1e2);
        let (_, back) = g_min_profile(
            lambda_upper(l1, gamma, p).map_err(|e| e.to_string())?,
            gamma,
            p,
        )
        .map_err(|e| e.to_string())?;
        worst_rt = worst_rt.max(rel(back, l1));
    }
    ensure(worst_c < 1e-12, || format!("C vs λ^*(1): {worst_c:.2e}"))?;
    ensure(max_ratio < 1.0, || {
        format!("λ̂/λ* ratio reached {max_ratio}")
    })?;
    ensure(worst_rt < 1e-12, || format!("g̃ round trip: {worst_rt:.2e}"))?;
    Ok(format!(
        "C err {worst_c:.1e}, max λ̂/λ* {max_ratio:.4}, round trip err {worst_rt:.1e}"
    ))
}

// ---- 3: derivative formulas -------------------------------------------------

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut sets = 0;
    while sets < 100 {
        let gamma = rng.random_range(0.1..0.9);
        let p = rng.random_range(1.5..4.0);
        let c = FiberCoefficients::new(
            log_uniform(&mut rng, 0.2, 5.0),
            log_uniform(&mut rng, 0.2, 5.0),
            log_uniform(&mut rng, 0.2, 5.0),
            gamma,
            p,
        )
        .map_err(|e| e.to_string())?;
        let lu = c.lambda_of_u().map_err(|e| e.to_string())?;
        let lambda = lu * rng.random_range(0.05..0.8);
        let h = 1e-5 * lambda;
        for branch in [Branch::Plus, Branch::Minus] {
            let t_at = |l: f64| c.classify(l).ok().and_then(|a| a.root(branch));
            let (Some(t1), Some(t0)) = (t_at(lambda + h), t_at(lambda - h)) else {
                return Err(format!("missing root near λ={lambda}"));
            };
            let fd_t = (t1 - t0) / (2.0 * h);
            let fd_j =
                (c.phi(t1, lambda + h).unwrap() - c.phi(t0, lambda - h).unwrap()) / (2.0 * h);
            let dt = c.dt_dlambda(lambda, branch).map_err(|e| e.to_string())?;
            let dj = c.dj_dlambda(lambda, branch).map_err(|e| e.to_string())?;
            worst = worst.max(rel(fd_t, dt)).max(rel(fd_j, dj));
        }
        sets += 1;
    }
    ensure(worst < 1e-6, || {
        format!("max relative FD deviation {worst:.2e}")
    })?;
    Ok(format!(
        "100 sets x 2 branches, max rel deviation {worst:.1e}"
    ))
}

// ---- 4: homogeneity -------------------------------------------------------

fn random_field(problem: &Problem, rng: &mut ChaCha8Rng) -> Field {
    let bumps: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(-5.0..5.0),
                rng.random_range(0.5..3.0),
                rng.random_range(0.1..1.0),
            )
        })
        .collect();
    problem.field_from_fn(move |pt| {
        bumps
            .iter()
            .map(|(c, w, amp)| amp * (-0.5 * (pt.x - c).powi(2) / (w * w)).exp())
            .sum::<f64>()
            + 1e-12
    })
}

fn criterion_4() -> Outcome {
    let problem = Problem::new(ProblemSpec::benchmark()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_l, mut worst_p): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let u = random_field(&problem, &mut rng);
        let s = 10f64.powf(rng.random_range(-3.0..3.0));
        let us = u.scaled(s);
        let l0 = fiber_coeffs(&problem, &u)
            .and_then(|c| c.lambda_of_u())
            .map_err(|e| e.to_string())?;
        let l1 = fiber_coeffs(&problem, &us)
            .and_then(|c| c.lambda_of_u())
            .map_err(|e| e.to_string())?;
        worst_l = worst_l.max(rel(l1, l0));
        let lambda = 0.5 * l0;
        for branch in [Branch::Plus, Branch::Minus] {
            let a = project_to_nehari(&problem, &u, lambda, branch).map_err(|e| e.to_string())?;
            let b = project_to_nehari(&problem, &us, lambda, branch).map_err(|e| e.to_string())?;
            for (x, y) in a.values().iter().zip(b.values()) {
                if *x != 0.0 {
                    worst_p = worst_p.max(rel(*y, *x));
                }
            }
        }
    }
    ensure(worst_l < 1e-10 && worst_p < 1e-10, || {
        format!("λ err {worst_l:.2e}, projection err {worst_p:.2e}")
    })?;
    Ok(format!(
        "100 fields, λ(su) err {worst_l:.1e}, projection err {worst_p:.1e}"
    ))
}

// ---- 5: eigenpair ----------------------------------------------------------

fn eigen_on_unit_interval(points: usize) -> std::result::Result<f64, String> {
    // (0, π) shifted to the symmetric interval (-π/2, π/2)
    let spec = ProblemSpec {
        domain: DomainSpec::interval(PI / 2.0, points),
        v: Coefficient::constant(1.0),
        a: Coefficient::constant(1.0),
        b: Coefficient::constant(1.0),
        ..ProblemSpec::benchmark()
    };
    let problem = Problem::new(spec).map_err(|e| e.to_string())?;
    let mask: Vec<bool> = problem.grid().boundary.iter().map(|b| !b).collect();
    min_eigenpair(&problem, &mask)
        .map(|p| p.lambda_one)
        .map_err(|e| e.to_string())
}

fn criterion_5() -> Outcome {
    let l401 = eigen_on_unit_interval(401)?;
    let l201 = eigen_on_unit_interval(201)?;
    let l101 = eigen_on_unit_interval(101)?;
    let order = ((l101 - l201) / (l201 - l401)).log2();
    ensure((l401 - 2.0).abs() < 1e-3, || format!("λ₁ = {l401}"))?;
    ensure(order >= 1.9, || format!("Richardson order {order:.3}"))?;
    Ok(format!(
        "λ₁ = {l401:.8} (err {:.1e}), observed order {order:.3}",
        (l401 - 2.0).abs()
    ))
}

// ---- 6: manufactured solution ---------------------------------------------

fn criterion_6() -> Outcome {
    let (gamma, p, lambda) = (0.5, 3.0, 1.0);
    let spec = ProblemSpec {
        gamma,
        p,
        domain: DomainSpec::interval(PI / 2.0, 401),
        v: Coefficient::constant(1.0),
        a: Coefficient::constant(1.0),
        b: Coefficient::constant(1.0),
        ..ProblemSpec::benchmark()
    };
    let base = Problem::new(spec.clone()).map_err(|e| e.to_string())?;
    // u* = cos x solves -u'' + u = λ a u^{-γ} + u^p for this a
    let a: Vec<f64> = base
        .grid()
        .coords
        .iter()
        .map(|pt| {
            let c = pt.x.cos().max(0.0);
            ((2.0 * c - c.powf(p)) * c.powf(gamma) / lambda).max(1e-300)
        })
        .collect();
    let n = base.grid().len();
    let problem = Problem::with_nodal_coefficients(spec, vec![1.0; n], a, vec![1.0; n])
        .map_err(|e| e.to_string())?;
    let start = problem.field_from_fn(|pt| pt.x.cos() * (1.0 + 0.01 * (3.0 * pt.x).sin()));
    let cfg = NewtonConfig {
        tol: 1e-13,
        ..NewtonConfig::default()
    };
    let out = newton_refine(&problem, &start, lambda, &cfg).map_err(|e| e.to_string())?;
    let h = &out.history;
    ensure(h.len() >= 4, || format!("history too short: {h:?}"))?;
    let digits: Vec<f64> = h
        .windows(2)
        .take(3)
        .map(|w| (w[0] / w[1]).log10())
        .collect();
    ensure(digits.iter().all(|&d| d >= 2.0), || {
        format!("digits per step {digits:?}, history {h:?}")
    })?;
    ensure(out.residual_norm < 1e-8, || {
        format!("final residual {:.2e}", out.residual_norm)
    })?;
    let err = problem
        .grid()
        .coords
        .iter()
        .zip(out.field.values())
        .map(|(pt, v)| (v - pt.x.cos().max(0.0)).abs())
        .fold(0.0, f64::max);
    Ok(format!(
        "residual {:.1e} -> {:.1e} in {} steps, digits/step {:.1}/{:.1}/{:.1}, max |u - cos| {err:.1e}",
        h[0], out.residual_norm, out.iterations, digits[0], digits[1], digits[2]
    ))
}

// ---- 7: benchmark sweep -----------------------------------------------------

fn criterion_7() -> Outcome {
    let problem = Problem::new(ProblemSpec::benchmark()).map_err(|e| e.to_string())?;
    let report =
        compute_bounds(&problem, &OptimizerConfig::default()).map_err(|e| e.to_string())?;
    let ls = report.lambda_star.lambda_star;
    let (gamma, p) = (problem.gamma(), problem.p());
    let mut cfg = SweepConfig::new(ls);
    cfg.minus_start = Some(report.lambda_star.minimizer.clone());
    cfg.meta = TableMeta {
        spec_hash: problem.spec().content_hash(),
        lambda_star: ls,
        lambda_hat_predicted: report.lambda_hat,
        lambda_upper: report.lambda_upper,
    };
    let grid = log_grid(ls / 100.0, 1.2 * ls, 40).map_err(|e| e.to_string())?;
    let (table, points) = sweep_detailed(&problem, &grid, &cfg).map_err(|e| e.to_string())?;

    // (i) every row up to λ* verified on both branches
    for (row, point) in table.rows.iter().zip(&points) {
        if row.lambda > ls {
            continue;
        }
        for bp in [&point.plus, &point.minus] {
            let bp = bp
                .as_ref()
                .ok_or_else(|| format!("(i) missing branch at λ = {}", row.lambda))?;
            let v = verify_solution(&problem, bp, 1e-6);
            ensure(v.all_pass, || {
                format!("(i) verification failed at λ = {}: {v:?}", row.lambda)
            })?;
        }
    }
    // (ii) monotone energies
    ensure(table.energies_monotone(Branch::Plus, 0.0), || {
        "(ii) plus energies not monotone".into()
    })?;
    ensure(table.energies_monotone(Branch::Minus, 0.0), || {
        "(ii) minus energies not monotone".into()
    })?;
    // (iii) negative plus energies
    ensure(
        table
            .rows
            .iter()
            .filter_map(|r| r.energy(Branch::Plus))
            .all(|e| e < 0.0),
        || "(iii) non-negative plus energy".into(),
    )?;
    // (iv) zero crossing of the minus energy
    let hat_emp = locate_lambda_hat(&table).map_err(|e| format!("(iv) {e}"))?;
    let hat_pred = lambda_hat_from_star(ls, gamma, p).map_err(|e| e.to_string())?;
    ensure(rel(hat_emp, hat_pred) < 0.1, || {
        format!("(iv) λ̂ emp {hat_emp} vs predicted {hat_pred}")
    })?;
    // (v) ordering against the eigenvalue bound
    ensure(ls < report.lambda_upper, || {
        format!("(v) λ* = {ls} >= λ^* = {}", report.lambda_upper)
    })?;
    // (vi) the window past λ*
    let past = table
        .rows
        .iter()
        .filter(|r| r.lambda > ls && r.both_converged())
        .count();
    ensure(past >= 1, || "(vi) no converged row past λ*".into())?;
    // (vii) small-λ limit of the plus branch
    let opt = SolverConfig::default();
    let plus_starts = nehari_core::nehari::default_starts(&problem, Branch::Plus, None);
    let norm_at = |lambda: f64| {
        solve_branch(&problem, lambda, Branch::Plus, &plus_starts, &opt)
            .map(|bp| bp.norm)
            .map_err(|e| e.to_string())
    };
    let (n_half, n_hundredth) = (norm_at(ls / 2.0)?, norm_at(ls / 100.0)?);
    ensure(n_half >= 10.0 * n_hundredth, || {
        format!("(vii) ‖u‖: {n_half} at λ*/2, {n_hundredth} at λ*/100")
    })?;
    // (viii) uniform lower bound for the minus branch
    let minus_starts = nehari_core::nehari::default_starts(
        &problem,
        Branch::Minus,
        Some(&report.lambda_star.minimizer),
    );
    let w_star = solve_branch(&problem, ls, Branch::Minus, &minus_starts, &opt)
        .map_err(|e| e.to_string())?
        .norm;
    let w_min = table
        .rows
        .iter()
        .filter(|r| r.converged_minus)
        .map(|r| r.norm_minus)
        .fold(f64::INFINITY, f64::min);
    ensure(w_min > 0.5 * w_star, || {
        format!("(viii) min ‖w‖ {w_min} vs ‖w_λ*‖ {w_star}")
    })?;

    Ok(format!(
        "λ* {ls:.6}, λ̂ emp {hat_emp:.6} vs pred {hat_pred:.6}, λ^* {:.6}, {past} rows past λ*, last {:.6}, \
         ‖u‖ ratio {:.1}, min‖w‖/‖w_λ*‖ {:.3}",
        report.lambda_upper,
        table.last_converged().unwrap_or(f64::NAN),
        n_half / n_hundredth,
        w_min / w_star
    ))
}

// ---- 8: λ* estimator self-consistency ---------------------------------------

fn criterion_8() -> Outcome {
    let problem = Problem::new(ProblemSpec::benchmark()).map_err(|e| e.to_string())?;
    let opt = OptimizerConfig::default();
    let est = estimate_lambda_star(&problem, &opt, None).map_err(|e| e.to_string())?;
    ensure(est.restarts.len() == 16, || {
        format!("{} restarts", est.restarts.len())
    })?;
    let spread = est.restart_spread();
    ensure(spread < 1e-4, || format!("restart spread {spread:.2e}"))?;
    let mut worst: f64 = 0.0;
    for s in [0.5, 2.0] {
        let scaled = problem.with_scaled_a(s).map_err(|e| e.to_string())?;
        let other = estimate_lambda_star(&scaled, &opt, None).map_err(|e| e.to_string())?;
        worst = worst.max(rel(other.lambda_star, est.lambda_star / s));
    }
    ensure(worst < 1e-3, || format!("scaling law error {worst:.2e}"))?;
    ensure(est.stationarity_residual < 1e-4, || {
        format!("stationarity {:.2e}", est.stationarity_residual)
    })?;
    Ok(format!(
        "λ* {:.8}, spread {spread:.1e}, scaling err {worst:.1e}, stationarity {:.1e}",
        est.lambda_star, est.stationarity_residual
    ))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    // single-threaded, as the runtime budgets are stated for one core
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build_global();
    let criteria: [Criterion; 8] = [
        (
            "fiber oracle equivalence",
            criterion_1,
            Duration::from_secs(10),
        ),
        (
            "closed-form constants",
            criterion_2,
            Duration::from_secs(10),
        ),
        ("derivative formulas", criterion_3, Duration::from_secs(5)),
        ("homogeneity", criterion_4, Duration::from_secs(60)),
        (
            "eigenpair analytic case",
            criterion_5,
            Duration::from_secs(5),
        ),
        (
            "manufactured solution",
            criterion_6,
            Duration::from_secs(10),
        ),
        ("benchmark sweep", criterion_7, Duration::from_secs(300)),
        (
            "lambda-star self-consistency",
            criterion_8,
            Duration::from_secs(120),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > *budget => {
                Err(format!("{msg}; took {elapsed:.2?} > budget {budget:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {}: PASS  {name} [{elapsed:.2?}] {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} [{elapsed:.2?}] {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
