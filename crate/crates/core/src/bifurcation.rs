//! Continuation in λ: both branches across a λ-grid, the empirical zero of
//! the minus-branch energy, the fold past `λ*`, and the energy diagram.

use std::fmt::Write as _;

use crate::domain::{Field, Problem};
use crate::error::{Error, Result};
use crate::fiber::Branch;
use crate::nehari::{default_starts, solve_branch, track_branch, BranchPoint, SolverConfig};

/// One λ of the sweep; values of a branch that did not converge are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub lambda: f64,
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub residual_plus: f64,
    pub residual_minus: f64,
    pub fiber_second_plus: f64,
    pub fiber_second_minus: f64,
    pub converged_plus: bool,
    pub converged_minus: bool,
}

impl TableRow {
    fn empty(lambda: f64) -> TableRow {
        TableRow {
            lambda,
            energy_plus: f64::NAN,
            energy_minus: f64::NAN,
            norm_plus: f64::NAN,
            norm_minus: f64::NAN,
            residual_plus: f64::NAN,
            residual_minus: f64::NAN,
            fiber_second_plus: f64::NAN,
            fiber_second_minus: f64::NAN,
            converged_plus: false,
            converged_minus: false,
        }
    }

    fn set(&mut self, bp: &BranchPoint) {
        match bp.branch {
            Branch::Plus => {
                self.energy_plus = bp.energy;
                self.norm_plus = bp.norm;
                self.residual_plus = bp.residual_norm;
                self.fiber_second_plus = bp.fiber_second;
                self.converged_plus = bp.converged;
            }
            Branch::Minus => {
                self.energy_minus = bp.energy;
                self.norm_minus = bp.norm;
                self.residual_minus = bp.residual_norm;
                self.fiber_second_minus = bp.fiber_second;
                self.converged_minus = bp.converged;
            }
        }
    }

    pub fn both_converged(&self) -> bool {
        self.converged_plus && self.converged_minus
    }

    pub fn energy(&self, branch: Branch) -> Option<f64> {
        match branch {
            Branch::Plus if self.converged_plus => Some(self.energy_plus),
            Branch::Minus if self.converged_minus => Some(self.energy_minus),
            _ => None,
        }
    }
}

/// Header metadata; unknown values are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct TableMeta {
    pub spec_hash: String,
    pub lambda_star: f64,
    pub lambda_hat_predicted: f64,
    pub lambda_upper: f64,
}

impl Default for TableMeta {
    fn default() -> Self {
        TableMeta {
            spec_hash: String::new(),
            lambda_star: f64::NAN,
            lambda_hat_predicted: f64::NAN,
            lambda_upper: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationTable {
    pub meta: TableMeta,
    /// Strictly increasing in λ.
    pub rows: Vec<TableRow>,
}

const COLUMNS: [&str; 11] = [
    "lambda",
    "energy_plus",
    "energy_minus",
    "norm_plus",
    "norm_minus",
    "residual_plus",
    "residual_minus",
    "fiber_second_plus",
    "fiber_second_minus",
    "converged_plus",
    "converged_minus",
];

impl BifurcationTable {
    /// Largest λ at which both branches converged.
    pub fn last_converged(&self) -> Option<f64> {
        self.rows
            .iter()
            .rev()
            .find(|r| r.both_converged())
            .map(|r| r.lambda)
    }

    /// `(last λ with both branches, next attempted λ)` when the sweep ended
    /// with a failure past the last good row.
    pub fn fold_bracket(&self) -> Option<(f64, f64)> {
        let i = self.rows.iter().rposition(|r| r.both_converged())?;
        self.rows
            .get(i + 1)
            .map(|next| (self.rows[i].lambda, next.lambda))
    }

    /// Whether each energy column is non-increasing across every pair of
    /// adjacent rows where that branch converged on both rows.
    pub fn energies_monotone(&self, branch: Branch, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| match (w[0].energy(branch), w[1].energy(branch)) {
                (Some(a), Some(b)) => b <= a + slack * a.abs().max(b.abs()),
                _ => true,
            })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let m = &self.meta;
        let _ = writeln!(out, "# spec_hash={}", m.spec_hash);
        let _ = writeln!(out, "# lambda_star={:.16e}", m.lambda_star);
        let _ = writeln!(
            out,
            "# lambda_hat_predicted={:.16e}",
            m.lambda_hat_predicted
        );
        let _ = writeln!(out, "# lambda_upper={:.16e}", m.lambda_upper);
        out.push_str(&COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            let values = [
                r.lambda,
                r.energy_plus,
                r.energy_minus,
                r.norm_plus,
                r.norm_minus,
                r.residual_plus,
                r.residual_minus,
                r.fiber_second_plus,
                r.fiber_second_minus,
            ];
            for v in values {
                let _ = write!(out, "{v:.16e},");
            }
            let _ = writeln!(
                out,
                "{},{}",
                u8::from(r.converged_plus),
                u8::from(r.converged_minus)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<BifurcationTable> {
        let mut meta = TableMeta::default();
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let Some((key, value)) = rest.trim().split_once('=') else {
                    continue;
                };
                let num = || {
                    value
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Table(format!("line {lineno}: bad number '{value}'")))
                };
                match key.trim() {
                    "spec_hash" => meta.spec_hash = value.trim().to_string(),
                    "lambda_star" => meta.lambda_star = num()?,
                    "lambda_hat_predicted" => meta.lambda_hat_predicted = num()?,
                    "lambda_upper" => meta.lambda_upper = num()?,
                    _ => {}
                }
                continue;
            }
            if !seen_header {
                if line != COLUMNS.join(",") {
                    return Err(Error::Table(format!(
                        "line {lineno}: unexpected column header '{line}'"
                    )));
                }
                seen_header = true;
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != COLUMNS.len() {
                return Err(Error::Table(format!(
                    "line {lineno}: expected {} cells, got {}",
                    COLUMNS.len(),
                    cells.len()
                )));
            }
            let mut v = [0.0; 9];
            for (slot, cell) in v.iter_mut().zip(&cells) {
                *slot = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::Table(format!("line {lineno}: bad number '{cell}'")))?;
            }
            let flag = |cell: &str| match cell.trim() {
                "1" => Ok(true),
                "0" => Ok(false),
                other => Err(Error::Table(format!("line {lineno}: bad flag '{other}'"))),
            };
            rows.push(TableRow {
                lambda: v[0],
                energy_plus: v[1],
                energy_minus: v[2],
                norm_plus: v[3],
                norm_minus: v[4],
                residual_plus: v[5],
                residual_minus: v[6],
                fiber_second_plus: v[7],
                fiber_second_minus: v[8],
                converged_plus: flag(cells[9])?,
                converged_minus: flag(cells[10])?,
            });
        }
        if !seen_header {
            return Err(Error::Table("missing column header".into()));
        }
        if rows.windows(2).any(|w| !(w[1].lambda > w[0].lambda)) {
            return Err(Error::Table(
                "rows are not strictly increasing in lambda".into(),
            ));
        }
        Ok(BifurcationTable { meta, rows })
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && n >= 1) || (n == 1 && hi != lo) {
        return Err(Error::InvalidArgument(format!(
            "bad grid [{lo}, {hi}] with {n} points"
        )));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub solver: SolverConfig,
    /// Estimate of `λ*`; past it failures trigger step halving and count
    /// towards the stop rule.
    pub lambda_star: f64,
    /// Smallest halved step, relative to `λ*`.
    pub min_step: f64,
    /// Stop after this many consecutive failed grid points past `λ*`.
    pub max_failures: usize,
    /// Extra starting direction for the minus branch at the first point.
    pub minus_start: Option<Field>,
    pub meta: TableMeta,
}

impl SweepConfig {
    pub fn new(lambda_star: f64) -> Self {
        SweepConfig {
            solver: SolverConfig::default(),
            lambda_star,
            min_step: 1e-6,
            max_failures: 2,
            minus_start: None,
            meta: TableMeta {
                lambda_star,
                ..TableMeta::default()
            },
        }
    }
}

struct State<'a> {
    problem: &'a Problem,
    cfg: &'a SweepConfig,
    plus: Option<Field>,
    minus: Option<Field>,
}

impl State<'_> {
    fn solve_one(&self, lambda: f64, branch: Branch) -> Option<BranchPoint> {
        let (previous, extra) = match branch {
            Branch::Plus => (&self.plus, None),
            Branch::Minus => (&self.minus, self.cfg.minus_start.as_ref()),
        };
        let solver = &self.cfg.solver;
        if let Some(start) = previous {
            if let Ok(bp) = track_branch(self.problem, lambda, branch, start, solver) {
                return Some(bp);
            }
            // past λ* a cold start would only find a different solution
            if lambda > self.cfg.lambda_star {
                return None;
            }
        }
        let mut starts = default_starts(self.problem, branch, extra);
        if let Some(start) = previous {
            starts.push(start.clone());
        }
        solve_branch(self.problem, lambda, branch, &starts, solver).ok()
    }

    /// Solves both branches concurrently and records the converged ones as
    /// new warm starts.
    fn attempt(&mut self, lambda: f64) -> (TableRow, SweepPoint) {
        let (plus, minus) = rayon::join(
            || self.solve_one(lambda, Branch::Plus),
            || self.solve_one(lambda, Branch::Minus),
        );
        let mut row = TableRow::empty(lambda);
        if let Some(bp) = &plus {
            row.set(bp);
            self.plus = Some(bp.u.clone());
        }
        if let Some(bp) = &minus {
            row.set(bp);
            self.minus = Some(bp.u.clone());
        }
        (row, SweepPoint { plus, minus })
    }
}

/// Warm-started continuation over an increasing λ-grid.
///
/// Each point is started from the previous converged solutions (cold start
/// at the first point). Below `λ*` failures leave gaps. Past `λ*` a failure
/// triggers step halving from the last good λ towards the failed target,
/// down to `min_step·λ*`, so the rows bracket the fold as tightly as the
/// solver allows; after `max_failures` consecutive failed targets the
/// remaining grid points are recorded as not converged.
pub fn sweep(problem: &Problem, lambdas: &[f64], cfg: &SweepConfig) -> Result<BifurcationTable> {
    sweep_detailed(problem, lambdas, cfg).map(|(table, _)| table)
}

/// Converged solutions behind one table row.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub plus: Option<BranchPoint>,
    pub minus: Option<BranchPoint>,
}

/// [`sweep`] that also returns the solutions, aligned with the table rows.
pub fn sweep_detailed(
    problem: &Problem,
    lambdas: &[f64],
    cfg: &SweepConfig,
) -> Result<(BifurcationTable, Vec<SweepPoint>)> {
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    if lambdas.iter().any(|&l| !(l > 0.0 && l.is_finite()))
        || lambdas.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(Error::InvalidArgument(
            "lambda grid must be positive and strictly increasing".into(),
        ));
    }
    let mut state = State {
        problem,
        cfg,
        plus: None,
        minus: None,
    };
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut failures = 0;
    let mut stopped = false;
    let mut last_good: Option<f64> = None;
    for (k, &lambda) in lambdas.iter().enumerate() {
        if stopped {
            rows.push((
                TableRow::empty(lambda),
                SweepPoint {
                    plus: None,
                    minus: None,
                },
            ));
            continue;
        }
        let (row, point) = state.attempt(lambda);
        if k == 0 && !row.converged_plus && !row.converged_minus {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: f64::NAN,
            });
        }
        let ok = row.both_converged();
        rows.push((row, point));
        if ok {
            failures = 0;
            last_good = Some(lambda);
            continue;
        }
        if lambda <= cfg.lambda_star {
            continue;
        }
        // close in on the fold from the last good λ
        if let Some(mut good) = last_good {
            let min_step = cfg.min_step * cfg.lambda_star;
            let mut step = 0.5 * (lambda - good);
            while step >= min_step {
                let trial = good + step;
                if trial >= lambda {
                    break;
                }
                let saved = (state.plus.clone(), state.minus.clone());
                let (row, point) = state.attempt(trial);
                if row.both_converged() {
                    rows.push((row, point));
                    good = trial;
                    last_good = Some(trial);
                } else {
                    (state.plus, state.minus) = saved;
                    step *= 0.5;
                }
            }
        }
        failures += 1;
        if failures >= cfg.max_failures {
            stopped = true;
        }
    }
    rows.sort_by(|a, b| a.0.lambda.total_cmp(&b.0.lambda));
    let (rows, points) = rows.into_iter().unzip();
    Ok((
        BifurcationTable {
            meta: cfg.meta.clone(),
            rows,
        },
        points,
    ))
}

/// Zero of the minus-branch energy by linear interpolation between the
/// first pair of adjacent rows (both converged on the minus branch) where it
/// changes sign. An exact zero row is returned as is.
pub fn locate_lambda_hat(table: &BifurcationTable) -> Result<f64> {
    if let Some(r) = table
        .rows
        .iter()
        .find(|r| r.energy(Branch::Minus) == Some(0.0))
    {
        return Ok(r.lambda);
    }
    for w in table.rows.windows(2) {
        if let (Some(e0), Some(e1)) = (w[0].energy(Branch::Minus), w[1].energy(Branch::Minus)) {
            if (e0 > 0.0) != (e1 > 0.0) {
                let (l0, l1) = (w[0].lambda, w[1].lambda);
                return Ok(l0 + (l1 - l0) * e0 / (e0 - e1));
            }
        }
    }
    Err(Error::Table(
        "minus-branch energy does not change sign on this grid".into(),
    ))
}

// ---- diagram ---------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramStyle {
    pub width: u32,
    pub height: u32,
    pub plus_color: String,
    pub minus_color: String,
    pub marker_color: String,
    pub font_size: u32,
    pub title: String,
}

impl Default for DiagramStyle {
    fn default() -> Self {
        DiagramStyle {
            width: 800,
            height: 500,
            plus_color: "#1f77b4".into(),
            minus_color: "#d62728".into(),
            marker_color: "#555555".into(),
            font_size: 12,
            title: "Energy depending on λ".into(),
        }
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)
    }

    fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Standalone SVG of both energy curves with markers at `λ̂`, `λ*`, the last
/// converged λ and `λ^*`. Curves break at non-converged rows; a dotted
/// segment joins the last converged points of the two branches at the
/// first failed λ. Output depends only on the inputs.
pub fn render_diagram(table: &BifurcationTable, style: &DiagramStyle) -> String {
    let (w, h) = (style.width.max(200) as f64, style.height.max(150) as f64);
    let fs = style.font_size.max(6) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        style.width, style.height, style.width, style.height
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );

    let energies: Vec<f64> = table
        .rows
        .iter()
        .flat_map(|r| [r.energy(Branch::Plus), r.energy(Branch::Minus)])
        .flatten()
        .collect();
    let lambda_hat = locate_lambda_hat(table)
        .ok()
        .or(Some(table.meta.lambda_hat_predicted).filter(|v| v.is_finite()));
    let markers: Vec<(&str, f64)> = [
        ("λ̂", lambda_hat),
        ("λ*", Some(table.meta.lambda_star).filter(|v| v.is_finite())),
        ("last", table.last_converged()),
        (
            "λ^*",
            Some(table.meta.lambda_upper).filter(|v| v.is_finite()),
        ),
    ]
    .into_iter()
    .filter_map(|(name, v)| v.map(|v| (name, v)))
    .collect();

    let mut xs: Vec<f64> = table.rows.iter().map(|r| r.lambda).collect();
    xs.extend(markers.iter().map(|m| m.1));
    let (mut x0, mut x1) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    let (mut y0, mut y1) = energies
        .iter()
        .fold((0.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        (y0, y1) = (y0 - 1.0, y1 + 1.0);
    }
    let pad_x = 0.04 * (x1 - x0);
    let pad_y = 0.08 * (y1 - y0);
    let frame = Frame {
        x0: (x0 - pad_x).max(0.0),
        x1: x1 + pad_x,
        y0: y0 - pad_y,
        y1: y1 + pad_y,
        left: 70.0,
        right: w - 20.0,
        top: 40.0,
        bottom: h - 50.0,
    };

    // axes, ticks and labels
    let _ = writeln!(
        svg,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000000"/>"##,
        frame.left,
        frame.top,
        frame.right - frame.left,
        frame.bottom - frame.top
    );
    for i in 0..=5 {
        let fx = frame.x0 + (frame.x1 - frame.x0) * i as f64 / 5.0;
        let fy = frame.y0 + (frame.y1 - frame.y0) * i as f64 / 5.0;
        let (px, py) = (frame.px(fx), frame.py(fy));
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#000000"/><text x="{px:.2}" y="{:.2}" font-size="{fs}" text-anchor="middle">{fx:.3}</text>"##,
            frame.bottom,
            frame.bottom + 5.0,
            frame.bottom + 5.0 + fs
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#000000"/><text x="{:.2}" y="{:.2}" font-size="{fs}" text-anchor="end">{fy:.3}</text>"##,
            frame.left - 5.0,
            frame.left,
            frame.left - 8.0,
            py + fs / 3.0
        );
    }
    if frame.y0 < 0.0 && frame.y1 > 0.0 {
        let py = frame.py(0.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#999999" stroke-width="0.8"/>"##,
            frame.left, frame.right
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="{fs}" text-anchor="middle">λ</text>"#,
        0.5 * (frame.left + frame.right),
        h - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-size="{fs}" text-anchor="middle" transform="rotate(-90 16 {:.2})">energy</text>"#,
        0.5 * (frame.top + frame.bottom),
        0.5 * (frame.top + frame.bottom)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" font-size="{}" text-anchor="middle">{}</text>"#,
        0.5 * w,
        fs + 2.0,
        escape(&style.title)
    );

    // vertical markers
    for (k, (name, value)) in markers.iter().enumerate() {
        let px = frame.px(*value);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{}" stroke-dasharray="4 3"/><text x="{:.2}" y="{:.2}" font-size="{fs}" fill="{}">{}</text>"#,
            frame.top,
            frame.bottom,
            style.marker_color,
            px + 3.0,
            frame.top + fs * (1.2 + k as f64),
            style.marker_color,
            escape(name)
        );
    }

    // curves, broken at gaps
    let mut last_points = Vec::new();
    for (branch, color) in [
        (Branch::Plus, &style.plus_color),
        (Branch::Minus, &style.minus_color),
    ] {
        let mut segment: Vec<(f64, f64)> = Vec::new();
        let flush = |segment: &mut Vec<(f64, f64)>, svg: &mut String| {
            if segment.len() >= 2 {
                let pts: Vec<String> = segment
                    .iter()
                    .map(|(x, y)| format!("{x:.2},{y:.2}"))
                    .collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                    pts.join(" ")
                );
            }
            for (x, y) in segment.iter() {
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#
                );
            }
            segment.clear();
        };
        let mut last = None;
        for r in &table.rows {
            match r.energy(branch) {
                Some(e) => {
                    segment.push((frame.px(r.lambda), frame.py(e)));
                    last = Some((r.lambda, e));
                }
                None => flush(&mut segment, &mut svg),
            }
        }
        flush(&mut segment, &mut svg);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="{fs}" fill="{color}" text-anchor="end">{}</text>"#,
            frame.right - if branch == Branch::Plus { 70.0 } else { 0.0 },
            frame.top - 6.0,
            if branch == Branch::Plus {
                "Φ(u_λ)"
            } else {
                "Φ(w_λ)"
            }
        );
        last_points.push((last, color));
    }

    // dotted extrapolation towards the fold
    if let (Some((lp, ep)), Some((lm, em))) = (last_points[0].0, last_points[1].0) {
        let fold = table
            .fold_bracket()
            .map(|(_, next)| next)
            .unwrap_or_else(|| lp.max(lm) + 0.02 * (frame.x1 - frame.x0));
        let meet = 0.5 * (ep + em);
        for ((l, e), color) in [((lp, ep), last_points[0].1), ((lm, em), last_points[1].1)] {
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5" stroke-dasharray="2 3"/>"#,
                frame.px(l),
                frame.py(e),
                frame.px(fold),
                frame.py(meet)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
