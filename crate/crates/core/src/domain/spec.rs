//! Problem description and the flat `key = value` config format.

use std::fmt::Write as _;

use crate::domain::expr::Expr;
use crate::error::{Error, Result};

/// How the truncated domain is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainMode {
    /// `[-L, L]` with Dirichlet end points.
    Interval,
    /// `[-L, L]^2` with Dirichlet boundary.
    Box,
    /// Radial profile on `[0, L]` for a ball in `R^dimension`.
    Radial { dimension: u32 },
}

impl DomainMode {
    pub fn name(&self) -> &'static str {
        match self {
            DomainMode::Interval => "interval",
            DomainMode::Box => "box",
            DomainMode::Radial { .. } => "radial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub mode: DomainMode,
    pub half_width: f64,
    /// Grid points per axis, boundary nodes included.
    pub points: usize,
}

impl DomainSpec {
    pub fn interval(half_width: f64, points: usize) -> Self {
        DomainSpec {
            mode: DomainMode::Interval,
            half_width,
            points,
        }
    }

    pub fn square(half_width: f64, points: usize) -> Self {
        DomainSpec {
            mode: DomainMode::Box,
            half_width,
            points,
        }
    }

    pub fn radial(dimension: u32, radius: f64, points: usize) -> Self {
        DomainSpec {
            mode: DomainMode::Radial { dimension },
            half_width: radius,
            points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return Err(Error::InvalidDomain(format!(
                "half width must be positive, got {}",
                self.half_width
            )));
        }
        if self.points < 16 {
            return Err(Error::InvalidDomain(format!(
                "need at least 16 grid points per axis, got {}",
                self.points
            )));
        }
        if let DomainMode::Radial { dimension } = self.mode {
            if dimension == 0 {
                return Err(Error::InvalidDomain("radial dimension must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// Source of a coefficient field: closed form or one value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Expr(Expr),
    Table(Vec<f64>),
}

impl Coefficient {
    pub fn expr(source: &str) -> Result<Self> {
        Ok(Coefficient::Expr(Expr::parse(source)?))
    }

    pub fn constant(value: f64) -> Self {
        Coefficient::Expr(Expr::constant(value))
    }
}

/// Parameters `gamma`, `p`, the truncated domain and the coefficient fields
/// `V`, `a`, `b` of `-Δu + V u = λ a u^{-γ} + b u^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub gamma: f64,
    pub p: f64,
    pub sobolev_dimension: Option<u32>,
    pub domain: DomainSpec,
    pub v: Coefficient,
    pub a: Coefficient,
    pub b: Coefficient,
}

impl ProblemSpec {
    /// The interval benchmark: `L = 10`, `n = 401`, `V = 1 + x^2`,
    /// `a = exp(-x^2)`, `b = 1`, `γ = 1/2`, `p = 3`.
    pub fn benchmark() -> Self {
        ProblemSpec {
            gamma: 0.5,
            p: 3.0,
            sobolev_dimension: None,
            domain: DomainSpec::interval(10.0, 401),
            v: Coefficient::expr("1 + x^2").expect("valid"),
            a: Coefficient::expr("exp(-x^2)").expect("valid"),
            b: Coefficient::constant(1.0),
        }
    }

    /// Upper bound on `p`, when a Sobolev dimension `N >= 3` is declared.
    pub fn p_max(&self) -> Option<f64> {
        self.sobolev_dimension.map(|n| {
            let n = n as f64;
            2.0 * n / (n - 2.0) - 1.0
        })
    }

    /// Scalar checks; coefficient checks need the grid and live in
    /// [`crate::domain::Problem::new`].
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidProblem(format!(
                "gamma must lie in (0,1), got {}",
                self.gamma
            )));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidProblem(format!(
                "p must exceed 1, got {}",
                self.p
            )));
        }
        if let Some(n) = self.sobolev_dimension {
            if n < 3 {
                return Err(Error::InvalidProblem(format!(
                    "sobolev_dimension must be >= 3, got {n}"
                )));
            }
            let p_max = self.p_max().expect("dimension set");
            if self.p >= p_max {
                return Err(Error::InvalidProblem(format!(
                    "p = {} is not below the critical exponent 2N/(N-2) - 1 = {p_max}",
                    self.p
                )));
            }
        }
        self.domain.validate()
    }

    /// Parses the flat config format:
    ///
    /// ```text
    /// # comment
    /// gamma = 0.5
    /// p = 3
    /// domain.mode = interval      # interval | box | radial
    /// domain.L = 10
    /// domain.n = 401
    /// domain.N = 3                # radial dimension (radial mode only)
    /// V.expr = 1 + x^2
    /// a.expr = exp(-x^2)
    /// b.table = 1, 1, 1, ...      # nodal values instead of an expression
    /// ```
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut gamma = None;
        let mut p = None;
        let mut sobolev_dimension = None;
        let mut mode = None;
        let mut half_width = None;
        let mut points = None;
        let mut radial_dimension = None;
        let mut v = None;
        let mut a = None;
        let mut b = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|_| err(format!("'{key}' expects a number, got '{v}'")))
            };
            let int = |v: &str| -> Result<u32> {
                v.parse::<u32>()
                    .map_err(|_| err(format!("'{key}' expects a non-negative integer, got '{v}'")))
            };
            let coefficient = |kind: &str, v: &str| -> Result<Coefficient> {
                match kind {
                    "expr" => Expr::parse(v)
                        .map(Coefficient::Expr)
                        .map_err(|e| err(e.to_string())),
                    _ => v
                        .split(',')
                        .map(|s| num(s.trim()))
                        .collect::<Result<Vec<_>>>()
                        .map(Coefficient::Table),
                }
            };
            match key {
                "gamma" => gamma = Some(num(value)?),
                "p" => p = Some(num(value)?),
                "sobolev_dimension" => sobolev_dimension = Some(int(value)?),
                "domain.mode" => {
                    mode = Some(match value {
                        "interval" | "box" | "radial" => value.to_string(),
                        other => return Err(err(format!("unknown domain.mode '{other}'"))),
                    })
                }
                "domain.L" => half_width = Some(num(value)?),
                "domain.n" => points = Some(int(value)? as usize),
                "domain.N" | "domain.radial_dimension" => radial_dimension = Some(int(value)?),
                "V.expr" | "V.table" => v = Some(coefficient(&key[2..], value)?),
                "a.expr" | "a.table" => a = Some(coefficient(&key[2..], value)?),
                "b.expr" | "b.table" => b = Some(coefficient(&key[2..], value)?),
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }

        let missing = |name: &str| Error::Config {
            line: 0,
            message: format!("missing key '{name}'"),
        };
        let mode = match mode.as_deref().unwrap_or("interval") {
            "interval" => DomainMode::Interval,
            "box" => DomainMode::Box,
            _ => DomainMode::Radial {
                dimension: radial_dimension.ok_or_else(|| missing("domain.N"))?,
            },
        };
        let spec = ProblemSpec {
            gamma: gamma.ok_or_else(|| missing("gamma"))?,
            p: p.ok_or_else(|| missing("p"))?,
            sobolev_dimension,
            domain: DomainSpec {
                mode,
                half_width: half_width.ok_or_else(|| missing("domain.L"))?,
                points: points.ok_or_else(|| missing("domain.n"))?,
            },
            v: v.ok_or_else(|| missing("V.expr"))?,
            a: a.ok_or_else(|| missing("a.expr"))?,
            b: b.ok_or_else(|| missing("b.expr"))?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Renders the spec back into config text that
    /// [`ProblemSpec::from_config_str`] accepts.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "gamma = {}", self.gamma);
        let _ = writeln!(out, "p = {}", self.p);
        if let Some(n) = self.sobolev_dimension {
            let _ = writeln!(out, "sobolev_dimension = {n}");
        }
        let _ = writeln!(out, "domain.mode = {}", self.domain.mode.name());
        let _ = writeln!(out, "domain.L = {}", self.domain.half_width);
        let _ = writeln!(out, "domain.n = {}", self.domain.points);
        if let DomainMode::Radial { dimension } = self.domain.mode {
            let _ = writeln!(out, "domain.N = {dimension}");
        }
        for (name, c) in [("V", &self.v), ("a", &self.a), ("b", &self.b)] {
            match c {
                Coefficient::Expr(e) => {
                    let _ = writeln!(out, "{name}.expr = {e}");
                }
                Coefficient::Table(values) => {
                    let joined: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
                    let _ = writeln!(out, "{name}.table = {}", joined.join(", "));
                }
            }
        }
        out
    }

    /// Short content hash of the canonical config text.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(self.to_config_string().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
