//! `nehari`: fiber analysis, extremal bounds, branch solves, λ-sweeps and
//! diagrams for singular–superlinear Schrödinger problems.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nehari_core::nehari::default_starts;
use nehari_core::{
    compute_bounds, lambda_hat_from_star, locate_lambda_hat, log_grid, render_diagram,
    solve_branch, sweep, verify_solution, BifurcationTable, Branch, BranchPoint, DiagramStyle,
    Error, ExtremalReport, FiberCoefficients, OptimizerConfig, Problem, ProblemSpec, SolverConfig,
    SweepConfig, TableMeta, VerificationReport,
};

#[derive(Debug, Parser)]
#[command(
    name = "nehari",
    version,
    about = "Nehari-manifold laboratory for -Δu + Vu = λ a u^-γ + b u^p"
)]
struct Cli {
    /// Seed for the random restarts of the λ* estimator.
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_parser = parse_threads)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the fiber map t ↦ ½e t² - λf t^{1-γ}/(1-γ) - g t^{p+1}/(p+1).
    Fiber {
        #[arg(long, value_parser = parse_positive)]
        e: f64,
        #[arg(long, value_parser = parse_positive)]
        f: f64,
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, value_parser = parse_positive)]
        lambda: f64,
        #[arg(long, value_parser = parse_gamma)]
        gamma: f64,
        #[arg(long, value_parser = parse_p)]
        p: f64,
    },
    /// Estimate λ*, λ̂ and the eigenvalue bound λ^*.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// Directory for bounds.csv and the minimizer / eigenfunction fields.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one or both branches at a given λ.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_positive)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = BranchArg::Both)]
        branch: BranchArg,
        /// Directory for solution CSVs and report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Residual tolerance of the verification.
        #[arg(long, default_value_t = 1e-6, value_parser = parse_positive)]
        tol: f64,
    },
    /// Continuation sweep over log-spaced λ; writes the table as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Smallest λ (default λ*/100).
        #[arg(long, value_parser = parse_positive)]
        lambda_min: Option<f64>,
        /// Largest λ (default 1.2 λ*).
        #[arg(long, value_parser = parse_positive)]
        lambda_max: Option<f64>,
        #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(usize))]
        steps: usize,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Also render the diagram to this SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Render a sweep CSV as an SVG diagram.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long, default_value_t = 500)]
        height: u32,
        #[arg(long)]
        title: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
    Both,
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {s}"))
    }
}

fn parse_gamma(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("gamma must lie in (0, 1), got {s}"))
    }
}

fn parse_p(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 1.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("p must exceed 1, got {s}"))
    }
}

fn parse_threads(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("threads must be a positive integer, got {s}")),
    }
}

/// Failure classes and their exit codes.
#[derive(Debug)]
enum Failure {
    /// Bad input, unreadable config or unwritable output (exit 2).
    Usage(String),
    /// Converged, but a verification check failed (exit 1).
    Verification(String),
    /// The numerics did not produce a result (exit 3).
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidProblem(_)
            | Error::InvalidDomain(_)
            | Error::Config { .. }
            | Error::Expression(_)
            | Error::InvalidArgument(_)
            | Error::Table(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_problem(path: &Path) -> CliResult<Problem> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(Problem::new(ProblemSpec::from_config_str(&text)?)?)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn opt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn cmd_fiber(e: f64, f: f64, g: f64, lambda: f64, gamma: f64, p: f64) -> CliResult<String> {
    let coeffs = FiberCoefficients::new(e, f, g, gamma, p)?;
    let a = coeffs.classify(lambda)?;
    let mut out = String::new();
    let _ = writeln!(out, "classification: {}", a.classification.name());
    let _ = writeln!(out, "t_plus: {}", opt_value(a.t_plus));
    let _ = writeln!(out, "t_minus: {}", opt_value(a.t_minus));
    let _ = writeln!(out, "t_zero: {}", opt_value(a.t_zero));
    let _ = writeln!(out, "t_inflect: {}", opt_value(a.t_inflect));
    let _ = writeln!(out, "lambda_of_u: {}", opt_value(a.lambda_of_u));
    let _ = writeln!(out, "phi2_plus: {}", opt_value(a.phi2_plus));
    let _ = writeln!(out, "phi2_minus: {}", opt_value(a.phi2_minus));
    let _ = writeln!(out, "phi2_zero: {}", opt_value(a.phi2_zero));
    Ok(out)
}

fn bounds_text(problem: &Problem, r: &ExtremalReport) -> String {
    let star = &r.lambda_star;
    let mut out = String::new();
    let _ = writeln!(out, "spec_hash: {}", problem.spec().content_hash());
    let _ = writeln!(out, "lambda_star: {:.16e}", star.lambda_star);
    let _ = writeln!(out, "lambda_hat: {:.16e}", r.lambda_hat);
    let _ = writeln!(out, "lambda_one: {:.16e}", r.eigen.lambda_one);
    let _ = writeln!(out, "lambda_upper: {:.16e}", r.lambda_upper);
    let _ = writeln!(out, "ordering_holds: {}", r.ordering_holds());
    let _ = writeln!(
        out,
        "stationarity_residual: {:.3e}",
        star.stationarity_residual
    );
    let _ = writeln!(out, "restarts: {}", star.restarts.len());
    let _ = writeln!(out, "restart_spread: {:.3e}", star.restart_spread());
    let _ = writeln!(out, "best_restart: {}", star.best_restart);
    let _ = writeln!(out, "eigen_iterations: {}", r.eigen.iterations);
    out
}

fn optimizer(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        seed,
        ..OptimizerConfig::default()
    }
}

fn cmd_bounds(config: &Path, out: Option<&Path>, seed: u64) -> CliResult<String> {
    let problem = load_problem(config)?;
    let report = compute_bounds(&problem, &optimizer(seed))?;
    let text = bounds_text(&problem, &report);
    if let Some(dir) = out {
        let csv: String = std::iter::once("key,value\n".to_string())
            .chain(
                text.lines()
                    .filter_map(|l| l.split_once(": ").map(|(k, v)| format!("{k},{v}\n"))),
            )
            .collect();
        write_file(&dir.join("bounds.csv"), &csv)?;
        write_file(
            &dir.join("lambda_star_minimizer.csv"),
            &report.lambda_star.minimizer.to_csv(),
        )?;
        write_file(
            &dir.join("eigenfunction.csv"),
            &report.eigen.eigenfunction.to_csv(),
        )?;
    }
    if !report.ordering_holds() {
        return Err(Failure::Verification(format!(
            "{text}lambda_star is not below lambda_upper"
        )));
    }
    if report.lambda_star.stationarity_residual > 1e-4 {
        return Err(Failure::Verification(format!(
            "{text}stationarity residual above 1e-4"
        )));
    }
    Ok(text)
}

fn report_block(bp: &BranchPoint, v: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[{}]", bp.branch);
    let _ = writeln!(out, "lambda: {:.16e}", bp.lambda);
    let _ = writeln!(out, "energy: {:.16e}", bp.energy);
    let _ = writeln!(out, "norm: {:.16e}", bp.norm);
    let _ = writeln!(out, "fiber_second: {:.16e}", bp.fiber_second);
    let _ = writeln!(out, "iterations: {}", bp.iterations);
    let _ = writeln!(
        out,
        "residual_norm: {:.3e} ({})",
        v.residual_norm,
        v.residual.name()
    );
    let _ = writeln!(
        out,
        "nehari_residual: {:.3e} ({})",
        v.nehari_residual,
        v.nehari.name()
    );
    let _ = writeln!(out, "fiber_sign: {}", v.fiber_sign.name());
    let _ = writeln!(
        out,
        "min_interior: {:.3e} ({})",
        v.min_interior,
        v.positivity.name()
    );
    let _ = writeln!(out, "bound_plus: {}", v.bound_plus.name());
    let _ = writeln!(out, "bound_minus: {}", v.bound_minus.name());
    let _ = writeln!(out, "energy_sign: {}", v.energy_sign.name());
    let _ = writeln!(out, "variational_min: {:.3e}", v.variational_min);
    if let Some(g) = bp.ground_state {
        let _ = writeln!(out, "ground_state: {g}");
    }
    if bp.candidates.len() > 1 {
        let list: Vec<String> = bp.candidates.iter().map(|e| format!("{e:.10e}")).collect();
        let _ = writeln!(out, "candidates: {}", list.join(" "));
    }
    let _ = writeln!(out, "all_pass: {}", v.all_pass);
    out
}

fn cmd_solve(
    config: &Path,
    lambda: f64,
    branch: BranchArg,
    out: Option<&Path>,
    tol: f64,
    seed: u64,
) -> CliResult<String> {
    let problem = load_problem(config)?;
    let opt = SolverConfig::default();
    let solve = |b: Branch| -> CliResult<BranchPoint> {
        let extra = if b == Branch::Minus {
            let est = nehari_core::estimate_lambda_star(&problem, &optimizer(seed), None)?;
            Some(est.minimizer)
        } else {
            None
        };
        let starts = default_starts(&problem, b, extra.as_ref());
        Ok(solve_branch(&problem, lambda, b, &starts, &opt)?)
    };
    let mut points = Vec::new();
    if branch != BranchArg::Minus {
        points.push(solve(Branch::Plus)?);
    }
    if branch != BranchArg::Plus {
        points.push(solve(Branch::Minus)?);
    }
    if points.len() == 2 {
        points[0].ground_state =
            nehari_core::nehari::certify_ground_state(&problem, &points[0], &points[1]).ok();
    }
    let mut text = String::new();
    let mut all_pass = true;
    for bp in &points {
        let v = verify_solution(&problem, bp, tol);
        all_pass &= v.all_pass && bp.ground_state != Some(false);
        text.push_str(&report_block(bp, &v));
        if let Some(dir) = out {
            write_file(
                &dir.join(format!("solution_{}.csv", bp.branch)),
                &bp.u.to_csv(),
            )?;
        }
    }
    if let Some(dir) = out {
        write_file(&dir.join("report.txt"), &text)?;
    }
    if all_pass {
        Ok(text)
    } else {
        Err(Failure::Verification(text))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    config: &Path,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    steps: usize,
    out: &Path,
    svg: Option<&Path>,
    seed: u64,
) -> CliResult<String> {
    let problem = load_problem(config)?;
    let bounds = compute_bounds(&problem, &optimizer(seed))?;
    let ls = bounds.lambda_star.lambda_star;
    let lo = lambda_min.unwrap_or(ls / 100.0);
    let hi = lambda_max.unwrap_or(1.2 * ls);
    if steps == 0 || hi < lo || (steps == 1 && hi != lo && lambda_max.is_some()) {
        return Err(Failure::Usage(format!(
            "bad sweep range [{lo}, {hi}] with {steps} steps"
        )));
    }
    let grid = if steps == 1 {
        vec![lo]
    } else {
        log_grid(lo, hi, steps)?
    };
    let mut cfg = SweepConfig::new(ls);
    cfg.minus_start = Some(bounds.lambda_star.minimizer.clone());
    cfg.meta = TableMeta {
        spec_hash: problem.spec().content_hash(),
        lambda_star: ls,
        lambda_hat_predicted: lambda_hat_from_star(ls, problem.gamma(), problem.p())?,
        lambda_upper: bounds.lambda_upper,
    };
    let table = sweep(&problem, &grid, &cfg)?;
    write_file(out, &table.to_csv())?;
    if let Some(path) = svg {
        write_file(path, &render_diagram(&table, &DiagramStyle::default()))?;
    }
    let converged = table.rows.iter().filter(|r| r.both_converged()).count();
    let mut text = String::new();
    let _ = writeln!(text, "rows: {}", table.rows.len());
    let _ = writeln!(text, "converged_rows: {converged}");
    let _ = writeln!(text, "lambda_star: {ls:.16e}");
    let _ = writeln!(
        text,
        "lambda_hat_predicted: {:.16e}",
        table.meta.lambda_hat_predicted
    );
    match locate_lambda_hat(&table) {
        Ok(h) => {
            let _ = writeln!(text, "lambda_hat_empirical: {h:.16e}");
        }
        Err(_) => {
            let _ = writeln!(text, "lambda_hat_empirical: -");
        }
    }
    let _ = writeln!(
        text,
        "last_converged: {}",
        opt_value(table.last_converged())
    );
    if let Some((a, b)) = table.fold_bracket() {
        let _ = writeln!(text, "fold_bracket: {a:.16e} {b:.16e}");
    }
    let below_ok = table
        .rows
        .iter()
        .filter(|r| r.lambda <= ls)
        .all(|r| r.both_converged());
    let monotone =
        table.energies_monotone(Branch::Plus, 0.0) && table.energies_monotone(Branch::Minus, 0.0);
    let _ = writeln!(text, "all_below_lambda_star_converged: {below_ok}");
    let _ = writeln!(text, "energies_monotone: {monotone}");
    if below_ok && monotone {
        Ok(text)
    } else {
        Err(Failure::Verification(text))
    }
}

fn cmd_plot(
    input: &Path,
    out: &Path,
    width: u32,
    height: u32,
    title: Option<String>,
) -> CliResult<String> {
    let text = fs::read_to_string(input)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", input.display())))?;
    let table = BifurcationTable::from_csv(&text)?;
    if table.rows.is_empty() {
        return Err(Failure::Usage("table has no rows".into()));
    }
    let mut style = DiagramStyle {
        width,
        height,
        ..DiagramStyle::default()
    };
    if let Some(t) = title {
        style.title = t;
    }
    write_file(out, &render_diagram(&table, &style))?;
    Ok(format!("wrote {}\n", out.display()))
}

fn run(cli: Cli) -> CliResult<String> {
    let seed = cli.seed;
    match cli.command {
        Command::Fiber {
            e,
            f,
            g,
            lambda,
            gamma,
            p,
        } => cmd_fiber(e, f, g, lambda, gamma, p),
        Command::Bounds { config, out } => cmd_bounds(&config, out.as_deref(), seed),
        Command::Solve {
            config,
            lambda,
            branch,
            out,
            tol,
        } => cmd_solve(&config, lambda, branch, out.as_deref(), tol, seed),
        Command::Sweep {
            config,
            lambda_min,
            lambda_max,
            steps,
            out,
            svg,
        } => cmd_sweep(
            &config,
            lambda_min,
            lambda_max,
            steps,
            &out,
            svg.as_deref(),
            seed,
        ),
        Command::Plot {
            input,
            out,
            width,
            height,
            title,
        } => cmd_plot(&input, &out, width, height, title),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(text)) => {
            print!("{text}");
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(f) => {
            let msg = match &f {
                Failure::Usage(m) | Failure::Numerical(m) | Failure::Verification(m) => m.clone(),
            };
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
