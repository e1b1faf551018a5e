//! Scalar calculus of the fiber map `φ_{λ,u}(t) = Φ_λ(t u)`.
//!
//! Along a ray everything depends on three numbers,
//! `e = ‖u‖²`, `f = ∫ a|u|^{1-γ}`, `g = ∫ b|u|^{p+1}`:
//!
//! ```text
//! φ(t)   = ½ e t² - λ f t^{1-γ}/(1-γ) - g t^{p+1}/(p+1)
//! φ'(t)  = e t - λ f t^{-γ} - g t^p
//! φ''(t) = e + γ λ f t^{-γ-1} - p g t^{p-1}
//! ```
//!
//! Critical points solve `ψ(t) := e t^{1+γ} - g t^{p+γ} = λ f`. For `g > 0`
//! `ψ` is unimodal with maximizer `t(u)`, and `ψ(t(u)) = λ(u) f` defines the
//! unique parameter at which the fiber map degenerates.

use std::fmt;

use crate::domain::{Field, Problem};
use crate::error::{Error, Result};

/// Relative band around `λ(u)` reported as [`Classification::Inflection`].
pub const TOL_LAMBDA: f64 = 1e-10;
/// `|φ''(t)| < NEAR_FOLD * e` is treated as degenerate in derivative formulas.
pub const NEAR_FOLD: f64 = 1e-10;

/// Which Nehari component (or which critical point of the fiber map).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Local minimum along the ray, `φ'' > 0`.
    Plus,
    /// Local maximum along the ray, `φ'' < 0`.
    Minus,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Branch> {
        match s {
            "plus" => Ok(Branch::Plus),
            "minus" => Ok(Branch::Minus),
            other => Err(Error::InvalidArgument(format!("unknown branch '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberCoefficients {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub gamma: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// `g <= 0`: a single critical point, a global minimum.
    SingleMin,
    /// `g > 0`, `λ < λ(u)`: a local minimum followed by a local maximum.
    TwoCritical,
    /// `λ = λ(u)` (within [`TOL_LAMBDA`]): one degenerate critical point.
    Inflection,
    /// `λ > λ(u)`: the fiber map is strictly decreasing.
    NoCritical,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::SingleMin => "SingleMin",
            Classification::TwoCritical => "TwoCritical",
            Classification::Inflection => "Inflection",
            Classification::NoCritical => "NoCritical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiberAnalysis {
    pub lambda: f64,
    pub classification: Classification,
    pub t_plus: Option<f64>,
    pub t_minus: Option<f64>,
    pub t_zero: Option<f64>,
    /// `t(u)`, defined for `g > 0`.
    pub t_inflect: Option<f64>,
    /// `λ(u)`, defined for `g > 0`.
    pub lambda_of_u: Option<f64>,
    pub phi2_plus: Option<f64>,
    pub phi2_minus: Option<f64>,
    pub phi2_zero: Option<f64>,
}

impl FiberAnalysis {
    pub fn root(&self, branch: Branch) -> Option<f64> {
        match branch {
            Branch::Plus => self.t_plus,
            Branch::Minus => self.t_minus,
        }
    }

    /// Number of critical points of the fiber map.
    pub fn root_count(&self) -> usize {
        match self.classification {
            Classification::SingleMin | Classification::Inflection => 1,
            Classification::TwoCritical => 2,
            Classification::NoCritical => 0,
        }
    }
}

/// `C(γ,p) = ((1+γ)/(p+γ))^{(1+γ)/(p-1)} · (p-1)/(p+γ)`.
pub fn c_gamma_p(gamma: f64, p: f64) -> f64 {
    ((1.0 + gamma) / (p + gamma)).powf((1.0 + gamma) / (p - 1.0)) * ((p - 1.0) / (p + gamma))
}

/// Fiber coefficients of a field in the positive cone.
pub fn fiber_coeffs(problem: &Problem, u: &Field) -> Result<FiberCoefficients> {
    u.check_positive_cone()?;
    let x = problem.gather(u)?;
    Ok(FiberCoefficients::of_unknowns(problem, &x))
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "fiber map needs t > 0, got {t}"
        )))
    }
}

impl FiberCoefficients {
    pub fn new(e: f64, f: f64, g: f64, gamma: f64, p: f64) -> Result<Self> {
        if !(e > 0.0 && f > 0.0 && g.is_finite() && e.is_finite() && f.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need e > 0 and f > 0, got e = {e}, f = {f}, g = {g}"
            )));
        }
        if !(gamma > 0.0 && gamma < 1.0 && p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < gamma < 1 < p, got gamma = {gamma}, p = {p}"
            )));
        }
        Ok(FiberCoefficients { e, f, g, gamma, p })
    }

    pub(crate) fn of_unknowns(problem: &Problem, x: &[f64]) -> Self {
        FiberCoefficients {
            e: problem.norm_sq_u(x),
            f: problem.integral_a_u(x),
            g: problem.integral_b_u(x),
            gamma: problem.gamma(),
            p: problem.p(),
        }
    }

    /// Coefficients of `s·u` given those of `u`.
    pub fn scaled(&self, s: f64) -> Self {
        FiberCoefficients {
            e: s * s * self.e,
            f: s.powf(1.0 - self.gamma) * self.f,
            g: s.powf(self.p + 1.0) * self.g,
            ..*self
        }
    }

    pub fn phi(&self, t: f64, lambda: f64) -> Result<f64> {
        check_t(t)?;
        let Self { e, f, g, gamma, p } = *self;
        Ok(0.5 * e * t * t
            - lambda * f * t.powf(1.0 - gamma) / (1.0 - gamma)
            - g * t.powf(p + 1.0) / (p + 1.0))
    }

    pub fn phi_prime(&self, t: f64, lambda: f64) -> Result<f64> {
        check_t(t)?;
        let Self { e, f, g, gamma, p } = *self;
        Ok(e * t - lambda * f * t.powf(-gamma) - g * t.powf(p))
    }

    pub fn phi_double_prime(&self, t: f64, lambda: f64) -> Result<f64> {
        check_t(t)?;
        let Self { e, f, g, gamma, p } = *self;
        Ok(e + gamma * lambda * f * t.powf(-gamma - 1.0) - p * g * t.powf(p - 1.0))
    }

    fn psi(&self, t: f64) -> f64 {
        self.e * t.powf(1.0 + self.gamma) - self.g * t.powf(self.p + self.gamma)
    }

    fn psi_prime(&self, t: f64) -> f64 {
        (1.0 + self.gamma) * self.e * t.powf(self.gamma)
            - (self.p + self.gamma) * self.g * t.powf(self.p + self.gamma - 1.0)
    }

    /// `(t(u), λ(u))`, the unique solution of `φ' = φ'' = 0`.
    pub fn inflection_point(&self) -> Result<(f64, f64)> {
        let Self { e, f, g, gamma, p } = *self;
        if !(g > 0.0) {
            return Err(Error::InflectionUndefined(g));
        }
        let t = ((1.0 + gamma) / (p + gamma) * e / g).powf(1.0 / (p - 1.0));
        let lambda = c_gamma_p(gamma, p) * e.powf((p + gamma) / (p - 1.0))
            / (g.powf((1.0 + gamma) / (p - 1.0)) * f);
        Ok((t, lambda))
    }

    /// `λ(u)`; 0-homogeneous in `u`.
    pub fn lambda_of_u(&self) -> Result<f64> {
        self.inflection_point().map(|(_, l)| l)
    }

    pub fn classify(&self, lambda: f64) -> Result<FiberAnalysis> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let target = lambda * self.f;
        let mut out = FiberAnalysis {
            lambda,
            classification: Classification::SingleMin,
            t_plus: None,
            t_minus: None,
            t_zero: None,
            t_inflect: None,
            lambda_of_u: None,
            phi2_plus: None,
            phi2_minus: None,
            phi2_zero: None,
        };
        let phi2 = |t: f64| self.phi_double_prime(t, lambda).ok();

        if !(self.g > 0.0) {
            // ψ increases from 0 to ∞
            let mut lo = 1.0;
            while self.psi(lo) >= target {
                lo *= 0.5;
            }
            let mut hi = 1.0;
            while self.psi(hi) <= target {
                hi *= 2.0;
            }
            let t = self.root_in(lo, hi, target);
            out.t_plus = Some(t);
            out.phi2_plus = phi2(t);
            return Ok(out);
        }

        let (t_i, lambda_u) = self.inflection_point()?;
        out.t_inflect = Some(t_i);
        out.lambda_of_u = Some(lambda_u);
        if (lambda - lambda_u).abs() <= TOL_LAMBDA * lambda_u {
            out.classification = Classification::Inflection;
            out.t_zero = Some(t_i);
            out.phi2_zero = phi2(t_i);
            return Ok(out);
        }
        if lambda > lambda_u {
            out.classification = Classification::NoCritical;
            return Ok(out);
        }
        out.classification = Classification::TwoCritical;
        let mut lo = t_i;
        while self.psi(lo) >= target {
            lo *= 0.5;
        }
        let mut hi = t_i;
        while self.psi(hi) >= target {
            hi *= 2.0;
        }
        let t_plus = self.root_in(lo, t_i, target);
        let t_minus = self.root_in(t_i, hi, target);
        out.t_plus = Some(t_plus);
        out.t_minus = Some(t_minus);
        out.phi2_plus = phi2(t_plus);
        out.phi2_minus = phi2(t_minus);
        Ok(out)
    }

    /// Root of `ψ - target` on a sign-changing bracket: bisection to 1e-12
    /// relative, then at most five Newton steps kept inside the bracket.
    fn root_in(&self, lo: f64, hi: f64, target: f64) -> f64 {
        let h = |t: f64| self.psi(t) - target;
        let (mut lo, mut hi) = (lo, hi);
        let rising = h(lo) < 0.0;
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (h(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..5 {
            let (value, slope) = (h(t), self.psi_prime(t));
            if value == 0.0 || slope == 0.0 {
                break;
            }
            let next = t - value / slope;
            if !(next >= lo && next <= hi) || next == t {
                break;
            }
            t = next;
        }
        t
    }

    fn strict_root(&self, lambda: f64, branch: Branch) -> Result<(f64, f64)> {
        let analysis = self.classify(lambda)?;
        match analysis.classification {
            Classification::Inflection => {
                return Err(Error::NearFold(analysis.phi2_zero.unwrap_or(0.0)));
            }
            Classification::NoCritical => return Err(Error::MissingRoot(branch.name())),
            _ => {}
        }
        let t = analysis
            .root(branch)
            .ok_or(Error::MissingRoot(branch.name()))?;
        let second = self.phi_double_prime(t, lambda)?;
        Ok((t, second))
    }

    /// `dt±/dλ = t^{-γ} f / φ''(t±)`; positive on the plus root, negative on
    /// the minus root.
    pub fn dt_dlambda(&self, lambda: f64, branch: Branch) -> Result<f64> {
        let (t, second) = self.strict_root(lambda, branch)?;
        if second.abs() < NEAR_FOLD * self.e {
            return Err(Error::NearFold(second));
        }
        Ok(t.powf(-self.gamma) * self.f / second)
    }

    /// `dJ±/dλ = -t^{1-γ} f / (1-γ)` where `J±(λ) = φ(t±(λ))`.
    pub fn dj_dlambda(&self, lambda: f64, branch: Branch) -> Result<f64> {
        let (t, _) = self.strict_root(lambda, branch)?;
        Ok(-t.powf(1.0 - self.gamma) * self.f / (1.0 - self.gamma))
    }
}
