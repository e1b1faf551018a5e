//! Closed-form coefficient expressions.
//!
//! A tiny arithmetic language used by problem configs for `V`, `a` and `b`:
//! numbers, the variables `x`, `y`, `r` (Euclidean radius) and `r2` (`|x|^2`),
//! the constant `pi`, the operators `+ - * / ^`, absolute-value bars `|...|`,
//! a postfix `²`, and the functions `exp`, `log`, `sqrt`, `abs`, `sin`, `cos`,
//! `tanh`, `min`, `max`, `pow`.

use std::fmt;

use crate::error::{Error, Result};

/// Point at which an expression is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Var {
    X,
    Y,
    R,
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Sin,
    Cos,
    Tanh,
    Min,
    Max,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "exp" => (Func::Exp, 1),
            "log" | "ln" => (Func::Log, 1),
            "sqrt" => (Func::Sqrt, 1),
            "abs" => (Func::Abs, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tanh" => (Func::Tanh, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "pow" => (Func::Pow, 2),
            _ => return None,
        })
    }
}

/// A parsed coefficient expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr> {
        let tokens = tokenize(source)?;
        let mut parser = Parser { tokens, pos: 0 };
        let root = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input in '{source}'"
            )));
        }
        Ok(Expr {
            source: source.trim().to_string(),
            root,
        })
    }

    /// Constant expression, mostly for programmatic problem construction.
    pub fn constant(value: f64) -> Expr {
        Expr {
            source: format!("{value}"),
            root: Node::Num(value),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, at: Point) -> f64 {
        eval(&self.root, at)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

fn eval(node: &Node, at: Point) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(Var::X) => at.x,
        Node::Var(Var::Y) => at.y,
        Node::Var(Var::R) => at.r,
        Node::Var(Var::R2) => at.r * at.r,
        Node::Neg(inner) => -eval(inner, at),
        Node::Bin(op, lhs, rhs) => {
            let (l, r) = (eval(lhs, at), eval(rhs, at));
            match op {
                Op::Add => l + r,
                Op::Sub => l - r,
                Op::Mul => l * r,
                Op::Div => l / r,
                Op::Pow => pow(l, r),
            }
        }
        Node::Call(func, args) => {
            let a = eval(&args[0], at);
            match func {
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tanh => a.tanh(),
                Func::Min => a.min(eval(&args[1], at)),
                Func::Max => a.max(eval(&args[1], at)),
                Func::Pow => pow(a, eval(&args[1], at)),
            }
        }
    }
}

// Integer exponents go through powi so that negative bases behave.
fn pow(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part: 1e-3, 2.5E+4
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number '{text}'")))?;
            out.push(Token::Num(value));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),|²".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, sym: char) -> bool {
        if self.peek() == Some(&Token::Sym(sym)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: char) -> Result<()> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(Error::Expression(format!("expected '{sym}'")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    // Right-associative; binds tighter than unary minus on the left: -x^2 = -(x^2).
    fn power(&mut self) -> Result<Node> {
        let mut base = self.primary()?;
        while self.eat('²') {
            base = Node::Bin(Op::Pow, Box::new(base), Box::new(Node::Num(2.0)));
        }
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let token = self
            .peek()
            .cloned()
            .ok_or_else(|| Error::Expression("unexpected end of expression".into()))?;
        self.pos += 1;
        match token {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Sym('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Sym('|') => {
                let inner = self.expr()?;
                self.expect('|')?;
                Ok(Node::Call(Func::Abs, vec![inner]))
            }
            Token::Ident(name) => {
                if let Some((func, arity)) = Func::lookup(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(Error::Expression(format!(
                            "{name} takes {arity} argument(s), got {}",
                            args.len()
                        )));
                    }
                    return Ok(Node::Call(func, args));
                }
                match name.as_str() {
                    "x" => Ok(Node::Var(Var::X)),
                    "y" => Ok(Node::Var(Var::Y)),
                    "r" => Ok(Node::Var(Var::R)),
                    "r2" => Ok(Node::Var(Var::R2)),
                    "pi" => Ok(Node::Num(std::f64::consts::PI)),
                    _ => Err(Error::Expression(format!("unknown identifier '{name}'"))),
                }
            }
            Token::Sym(c) => Err(Error::Expression(format!("unexpected '{c}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64) -> Point {
        Point {
            x,
            y: 0.0,
            r: x.abs(),
        }
    }

    #[test]
    fn benchmark_coefficients() {
        let v = Expr::parse("1 + x^2").unwrap();
        let a = Expr::parse("exp(-x^2)").unwrap();
        assert_eq!(v.eval(at(3.0)), 10.0);
        assert!((a.eval(at(1.5)) - (-2.25f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn precedence_and_bars() {
        assert_eq!(Expr::parse("-2^2").unwrap().eval(at(0.0)), -4.0);
        assert_eq!(Expr::parse("2^3^2").unwrap().eval(at(0.0)), 512.0);
        assert_eq!(Expr::parse("1 + 2*3 - 4/2").unwrap().eval(at(0.0)), 5.0);
        assert_eq!(Expr::parse("|x|^2").unwrap().eval(at(-3.0)), 9.0);
        assert_eq!(Expr::parse("|x|²").unwrap().eval(at(-3.0)), 9.0);
        assert_eq!(Expr::parse("r2 + r").unwrap().eval(at(-2.0)), 6.0);
        assert_eq!(Expr::parse("1/(1 + r2)^1.5").unwrap().eval(at(0.0)), 1.0);
        assert_eq!(Expr::parse("max(x, 2e-1)").unwrap().eval(at(0.0)), 0.2);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("foo(x)").is_err());
        assert!(Expr::parse("exp(x, 2)").is_err());
        assert!(Expr::parse("z").is_err());
        assert!(Expr::parse("(x").is_err());
        assert!(Expr::parse("x $ 2").is_err());
    }
}
