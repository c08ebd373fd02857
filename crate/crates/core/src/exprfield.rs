//! Scalar arithmetic expressions over `(t, x1, ..., xn)`.
//!
//! Vertex vector fields, radius functions and analytic bound formulas are all
//! written as text in scenario files and parsed here. The grammar is small:
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" unary)?          (right-associative)
//! primary := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
//! number  := digits ["." digits] [("e" | "E") ["+" | "-"] digits]
//! ```
//!
//! So `-x^2` is `-(x^2)`, `2^3^2` is `2^(3^2)` and `2^-1` is `0.5`.
//!
//! Identifiers are `t`, `x1` ... `xn`, and for `n <= 3` the aliases `x`, `y`,
//! `z` for `x1`, `x2`, `x3`. Functions: `sin cos exp sqrt abs` (one argument)
//! and `min max` (two or more).

use std::fmt;

use thiserror::Error;

/// Errors raised while parsing an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("variable x{index} at byte {pos} exceeds state dimension {dimension}")]
    VariableOutOfRange {
        index: usize,
        dimension: usize,
        pos: usize,
    },
    #[error("function `{name}` at byte {pos} takes {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: &'static str,
        got: usize,
        pos: usize,
    },
}

/// Errors raised while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("power {base}^{exponent} is undefined over the reals")]
    PowDomain { base: f64, exponent: f64 },
    #[error("state has dimension {got}, expression expects at least {expected}")]
    StateTooShort { expected: usize, got: usize },
    #[error("parameter slot {0} not supplied")]
    MissingParam(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn is_variadic(self) -> bool {
        matches!(self, Func::Min | Func::Max)
    }
}

/// A variable reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Var {
    Time,
    /// 1-based state component.
    State(usize),
    /// Named scalar parameter, resolved from a caller-supplied slice.
    Param { slot: usize, name: String },
}

/// Expression syntax tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Parses `source` over `t, x1..x{dimension}` (plus aliases for small `dimension`).
pub fn parse_expr(source: &str, dimension: usize) -> Result<Expr, ParseError> {
    Parser::new(source, Scope::State { dimension }).parse()
}

/// Parses `source` where the only identifiers are the given parameter names.
///
/// Parameters are evaluated with [`Expr::eval_params`], slot `i` taking
/// `params[i]`.
pub fn parse_param_expr(source: &str, names: &[&str]) -> Result<Expr, ParseError> {
    Parser::new(source, Scope::Params(names)).parse()
}

struct Env<'a> {
    t: f64,
    x: &'a [f64],
    params: &'a [f64],
}

impl Expr {
    /// Evaluates at time `t` and state `x`.
    pub fn eval(&self, t: f64, x: &[f64]) -> Result<f64, EvalError> {
        self.eval_env(&Env { t, x, params: &[] })
    }

    /// Evaluates an expression parsed with [`parse_param_expr`].
    pub fn eval_params(&self, params: &[f64]) -> Result<f64, EvalError> {
        self.eval_env(&Env {
            t: 0.0,
            x: &[],
            params,
        })
    }

    fn eval_env(&self, env: &Env<'_>) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(Var::Time) => Ok(env.t),
            Expr::Var(Var::State(i)) => env
                .x
                .get(i - 1)
                .copied()
                .ok_or(EvalError::StateTooShort {
                    expected: *i,
                    got: env.x.len(),
                }),
            Expr::Var(Var::Param { slot, .. }) => env
                .params
                .get(*slot)
                .copied()
                .ok_or(EvalError::MissingParam(*slot)),
            Expr::Neg(inner) => Ok(-inner.eval_env(env)?),
            Expr::Binary(op, lhs, rhs) => {
                let a = lhs.eval_env(env)?;
                let b = rhs.eval_env(env)?;
                match op {
                    BinaryOp::Add => Ok(a + b),
                    BinaryOp::Sub => Ok(a - b),
                    BinaryOp::Mul => Ok(a * b),
                    BinaryOp::Div => {
                        if b == 0.0 {
                            Err(EvalError::DivisionByZero)
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinaryOp::Pow => pow(a, b),
                }
            }
            Expr::Call(func, args) => {
                let first = args[0].eval_env(env)?;
                match func {
                    Func::Sin => Ok(first.sin()),
                    Func::Cos => Ok(first.cos()),
                    Func::Exp => Ok(first.exp()),
                    Func::Abs => Ok(first.abs()),
                    Func::Sqrt => {
                        if first < 0.0 {
                            Err(EvalError::SqrtOfNegative(first))
                        } else {
                            Ok(first.sqrt())
                        }
                    }
                    Func::Min | Func::Max => {
                        let mut acc = first;
                        for arg in &args[1..] {
                            let v = arg.eval_env(env)?;
                            acc = if *func == Func::Min { acc.min(v) } else { acc.max(v) };
                        }
                        Ok(acc)
                    }
                }
            }
        }
    }

    /// Whether the expression reads `t`.
    pub fn depends_on_time(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == Var::Time,
            Expr::Neg(e) => e.depends_on_time(),
            Expr::Binary(_, a, b) => a.depends_on_time() || b.depends_on_time(),
            Expr::Call(_, args) => args.iter().any(Expr::depends_on_time),
        }
    }

    /// Highest state index referenced (0 when none).
    pub fn max_state_index(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(Var::State(i)) => *i,
            Expr::Var(_) => 0,
            Expr::Neg(e) => e.max_state_index(),
            Expr::Binary(_, a, b) => a.max_state_index().max(b.max_state_index()),
            Expr::Call(_, args) => args.iter().map(Expr::max_state_index).max().unwrap_or(0),
        }
    }
}

fn pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    // integer exponents go through powi so y^2 stays exact for negative y
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        if base == 0.0 && exponent < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        return Ok(base.powi(exponent as i32));
    }
    if base < 0.0 {
        return Err(EvalError::PowDomain { base, exponent });
    }
    Ok(base.powf(exponent))
}

/// Fully parenthesised canonical form; re-parses to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::Time) => f.write_str("t"),
            Expr::Var(Var::State(i)) => write!(f, "x{i}"),
            Expr::Var(Var::Param { name, .. }) => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A vector of `dimension` scalar expressions, one per state component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorExpr {
    dimension: usize,
    components: Vec<Expr>,
}

impl VectorExpr {
    pub fn parse<S: AsRef<str>>(sources: &[S], dimension: usize) -> Result<Self, ParseError> {
        if sources.len() != dimension {
            return Err(ParseError::Syntax {
                pos: 0,
                message: format!(
                    "vector has {} components, state dimension is {dimension}",
                    sources.len()
                ),
            });
        }
        let components = sources
            .iter()
            .map(|s| parse_expr(s.as_ref(), dimension))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorExpr {
            dimension,
            components,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn depends_on_time(&self) -> bool {
        self.components.iter().any(Expr::depends_on_time)
    }
}

/// Componentwise evaluation of `v` at `(t, x)`.
pub fn eval_vector(v: &VectorExpr, t: f64, x: &[f64]) -> Result<Vec<f64>, EvalError> {
    let mut out = vec![0.0; v.dimension];
    eval_vector_into(v, t, x, &mut out)?;
    Ok(out)
}

pub(crate) fn eval_vector_into(
    v: &VectorExpr,
    t: f64,
    x: &[f64],
    out: &mut [f64],
) -> Result<(), EvalError> {
    if x.len() != v.dimension {
        return Err(EvalError::StateTooShort {
            expected: v.dimension,
            got: x.len(),
        });
    }
    for (slot, expr) in out.iter_mut().zip(&v.components) {
        *slot = expr.eval(t, x)?;
    }
    Ok(())
}

enum Scope<'a> {
    State { dimension: usize },
    Params(&'a [&'a str]),
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    scope: Scope<'a>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, scope: Scope<'a>) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            scope,
        }
    }

    fn parse(mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        if self.pos >= self.bytes.len() {
            return Err(self.syntax("empty expression"));
        }
        let expr = self.expr()?;
        self.skip_ws();
        if self.pos < self.bytes.len() {
            return Err(self.syntax(format!(
                "unexpected `{}`",
                self.src[self.pos..].chars().next().unwrap_or(' ')
            )));
        }
        Ok(expr)
    }

    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.syntax(format!(
                "unexpected `{}`",
                self.src[self.pos..].chars().next().unwrap_or(' ')
            ))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.bytes.len() && p.bytes[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut mantissa = digits(self);
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = mark;
                return Err(self.syntax("malformed exponent"));
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>().map(Expr::Num).map_err(|_| ParseError::Syntax {
            pos: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if self.peek() == Some(b'(') {
            let func = Func::from_name(name).ok_or_else(|| ParseError::UnknownIdentifier {
                name: name.to_string(),
                pos: start,
            })?;
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            if !self.eat(b')') {
                return Err(self.syntax("expected `)` or `,`"));
            }
            let ok = if func.is_variadic() {
                args.len() >= 2
            } else {
                args.len() == 1
            };
            if !ok {
                return Err(ParseError::Arity {
                    name: name.to_string(),
                    expected: if func.is_variadic() { "2 or more" } else { "1" },
                    got: args.len(),
                    pos: start,
                });
            }
            return Ok(Expr::Call(func, args));
        }
        self.resolve(name, start).map(Expr::Var)
    }

    fn resolve(&self, name: &str, pos: usize) -> Result<Var, ParseError> {
        let unknown = || ParseError::UnknownIdentifier {
            name: name.to_string(),
            pos,
        };
        match self.scope {
            Scope::Params(names) => names
                .iter()
                .position(|n| *n == name)
                .map(|slot| Var::Param {
                    slot,
                    name: name.to_string(),
                })
                .ok_or_else(unknown),
            Scope::State { dimension } => {
                let index = match name {
                    "t" => return Ok(Var::Time),
                    "x" if dimension <= 3 => 1,
                    "y" if dimension <= 3 => 2,
                    "z" if dimension <= 3 => 3,
                    _ => match name.strip_prefix('x').map(str::parse::<usize>) {
                        Some(Ok(i)) if i >= 1 && !name[1..].starts_with('0') => i,
                        _ => return Err(unknown()),
                    },
                };
                if index > dimension {
                    return Err(ParseError::VariableOutOfRange {
                        index,
                        dimension,
                        pos,
                    });
                }
                Ok(Var::State(index))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(src: &str, dim: usize, t: f64, x: &[f64]) -> f64 {
        parse_expr(src, dim).unwrap().eval(t, x).unwrap()
    }

    #[test]
    fn power_on_alias() {
        assert_eq!(eval("y^2", 2, 0.0, &[0.0, 3.0]), 9.0);
    }

    #[test]
    fn exp_times_state() {
        // 2 * e^-1 from a separate scalar computation
        let expected = 0.735_758_882_342_884_6;
        assert!((eval("exp(-t)*x1", 1, 1.0, &[2.0]) - expected).abs() < 1e-15);
    }

    #[test]
    fn precedence_corpus() {
        // values worked out by hand
        let corpus: &[(&str, f64)] = &[
            ("2+3*4", 14.0),
            ("(2+3)*4", 20.0),
            ("2*3+4", 10.0),
            ("10-4-3", 3.0),
            ("10-(4-3)", 9.0),
            ("24/4/2", 3.0),
            ("24/(4/2)", 12.0),
            ("2^3^2", 512.0),
            ("(2^3)^2", 64.0),
            ("-2^2", -4.0),
            ("(-2)^2", 4.0),
            ("2^-1", 0.5),
            ("-3*-2", 6.0),
            ("--3", 3.0),
            ("2*3^2", 18.0),
            ("1-2+3", 2.0),
            ("8/2*4", 16.0),
            ("1+2*3^2-4/2", 17.0),
            ("min(3, 1+1, 5)", 2.0),
            ("max(-1, -2)", -1.0),
            ("abs(-2.5)*2", 5.0),
            ("sqrt(16)+1", 5.0),
            ("1.5e1+2E-1", 15.2),
            ("exp(0)-cos(0)+sin(0)", 0.0),
            ("-(1+2)*3", -9.0),
        ];
        for (src, want) in corpus {
            let got = eval(src, 0, 0.0, &[]);
            assert!((got - want).abs() < 1e-12, "{src}: got {got}, want {want}");
        }
    }

    #[test]
    fn vector_eval_examples() {
        let v = VectorExpr::parse(&["x2^2", "1"], 2).unwrap();
        assert_eq!(eval_vector(&v, 0.0, &[0.0, 0.0]).unwrap(), vec![0.0, 1.0]);
        let zero = VectorExpr::parse(&["0", "0"], 2).unwrap();
        assert_eq!(eval_vector(&zero, 3.7, &[1.0, -2.0]).unwrap(), vec![0.0, 0.0]);
        let down = VectorExpr::parse(&["x2^2", "-1"], 2).unwrap();
        assert_eq!(eval_vector(&down, 0.0, &[5.0, 2.0]).unwrap(), vec![4.0, -1.0]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_expr("", 1), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse_expr("2 + * 3", 1),
            Err(ParseError::Syntax { pos: 4, .. })
        ));
        assert!(matches!(
            parse_expr("foo + 1", 1),
            Err(ParseError::UnknownIdentifier { pos: 0, .. })
        ));
        assert!(matches!(
            parse_expr("x3", 2),
            Err(ParseError::VariableOutOfRange {
                index: 3,
                dimension: 2,
                ..
            })
        ));
        assert!(matches!(parse_expr("z", 2), Err(ParseError::VariableOutOfRange { .. })));
        assert!(matches!(parse_expr("x0", 2), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse_expr("y", 4), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(parse_expr("(1+2", 0), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_expr("sin(1, 2)", 0), Err(ParseError::Arity { .. })));
        assert!(matches!(parse_expr("max(1)", 0), Err(ParseError::Arity { .. })));
        assert!(matches!(parse_expr("1e", 0), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn eval_errors() {
        let e = parse_expr("1/x", 1).unwrap();
        assert_eq!(e.eval(0.0, &[0.0]), Err(EvalError::DivisionByZero));
        let e = parse_expr("sqrt(x)", 1).unwrap();
        assert!(matches!(e.eval(0.0, &[-1.0]), Err(EvalError::SqrtOfNegative(_))));
        let e = parse_expr("x^0.5", 1).unwrap();
        assert!(matches!(e.eval(0.0, &[-4.0]), Err(EvalError::PowDomain { .. })));
    }

    #[test]
    fn params_scope() {
        let e = parse_param_expr("sqrt(R^4+1)", &["R"]).unwrap();
        assert!((e.eval_params(&[1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(e.to_string(), "sqrt(((R^4.0)+1.0))");
        assert!(parse_param_expr("t", &["R"]).is_err());
    }

    #[test]
    fn time_dependence() {
        assert!(parse_expr("exp(-t)", 0).unwrap().depends_on_time());
        assert!(!parse_expr("x^2", 1).unwrap().depends_on_time());
    }

    fn arb_expr(dim: usize) -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|v| format!("{}", v as f64 / 8.0)),
            Just("t".to_string()),
            (1..=dim).prop_map(|i| format!("x{i}")),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), prop::sample::select(vec!['+', '-', '*', '/']))
                    .prop_map(|(a, b, op)| format!("{a} {op} {b}")),
                (inner.clone(), 0u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
                inner.clone().prop_map(|a| format!("-{a}")),
                (inner.clone(), prop::sample::select(vec!["sin", "cos", "abs"]))
                    .prop_map(|(a, f)| format!("{f}({a})")),
                (inner.clone(), inner).prop_map(|(a, b)| format!("max({a}, {b})")),
            ]
        })
    }

    proptest! {
        #[test]
        fn reserialization_evaluates_identically(
            src in arb_expr(3),
            points in prop::collection::vec((-5.0f64..5.0, prop::array::uniform3(-5.0f64..5.0)), 100),
        ) {
            let first = parse_expr(&src, 3).unwrap();
            let again = parse_expr(&first.to_string(), 3).unwrap();
            prop_assert_eq!(&first, &again);
            for (t, x) in points {
                let a = first.eval(t, &x);
                let b = again.eval(t, &x);
                match (a, b) {
                    (Ok(a), Ok(b)) => prop_assert!(a == b || (a.is_nan() && b.is_nan())),
                    (a, b) => prop_assert_eq!(a, b),
                }
            }
        }
    }
}
