//! Closed-form scalar expressions: parsing, printing, symbolic differentiation
//! and evaluation over any [`Scalar`].
//!
//! Grammar: `+ - * / ^`, parentheses, decimal numbers, the constants `pi` and
//! `e`, the functions `sin cos tan sinh cosh exp log sqrt`, and variables from
//! a caller-supplied symbol table. `^` is right associative and binds tighter
//! than unary minus.

use std::fmt;

use thiserror::Error;

use crate::taylor::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown symbol `{name}` at offset {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("evaluation error: {0}")]
    Evaluation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Variable names `prefix1 .. prefixN`, the convention used for chart and
/// reference coordinates.
pub fn coordinate_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

impl Expr {
    pub fn parse(text: &str, vars: &[String]) -> Result<Expr, ExprError> {
        let mut p = Parser::new(text, vars);
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Parse a bracketed matrix literal such as `[[1,0],[0,sin(x1)^2]]`.
    pub fn parse_matrix(text: &str, vars: &[String]) -> Result<Vec<Vec<Expr>>, ExprError> {
        let mut p = Parser::new(text, vars);
        p.expect('[')?;
        let mut rows = Vec::new();
        loop {
            p.expect('[')?;
            let mut row = vec![p.expr()?];
            while p.eat(',') {
                row.push(p.expr()?);
            }
            p.expect(']')?;
            rows.push(row);
            if !p.eat(',') {
                break;
            }
        }
        p.expect(']')?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(rows)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Expr {
        use Expr::*;
        match self {
            Num(_) => Num(0.0),
            Var(i) => Num(if *i == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.diff(var)),
            Add(a, b) => add(a.diff(var), b.diff(var)),
            Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Mul(a, b) => add(mul(a.diff(var), (**b).clone()), mul((**a).clone(), b.diff(var))),
            Div(a, b) => div(
                sub(mul(a.diff(var), (**b).clone()), mul((**a).clone(), b.diff(var))),
                pow((**b).clone(), Num(2.0)),
            ),
            Pow(a, b) => {
                let da = a.diff(var);
                if let Num(c) = **b {
                    mul(mul(Num(c), pow((**a).clone(), Num(c - 1.0))), da)
                } else {
                    let db = b.diff(var);
                    let inner = add(
                        mul(db, Call(Func::Log, a.clone())),
                        div(mul((**b).clone(), da), (**a).clone()),
                    );
                    mul(self.clone(), inner)
                }
            }
            Call(f, a) => {
                let da = a.diff(var);
                let u = (**a).clone();
                let outer = match f {
                    Func::Sin => Call(Func::Cos, Box::new(u)),
                    Func::Cos => neg(Call(Func::Sin, Box::new(u))),
                    Func::Tan => add(Num(1.0), pow(Call(Func::Tan, Box::new(u)), Num(2.0))),
                    Func::Sinh => Call(Func::Cosh, Box::new(u)),
                    Func::Cosh => Call(Func::Sinh, Box::new(u)),
                    Func::Exp => self.clone(),
                    Func::Log => div(Num(1.0), u),
                    Func::Sqrt => div(Num(0.5), self.clone()),
                };
                mul(outer, da)
            }
        }
    }

    pub fn eval<S: Scalar>(&self, vars: &[S]) -> Result<S, ExprError> {
        let v = self.eval_inner(vars)?;
        if !v.val().is_finite() {
            return Err(ExprError::Evaluation(format!("non-finite value in `{self}`")));
        }
        Ok(v)
    }

    fn eval_inner<S: Scalar>(&self, vars: &[S]) -> Result<S, ExprError> {
        use Expr::*;
        Ok(match self {
            Num(v) => S::cst(*v),
            Var(i) => *vars
                .get(*i)
                .ok_or_else(|| ExprError::Evaluation(format!("variable index {i} out of range")))?,
            Neg(a) => -a.eval_inner(vars)?,
            Add(a, b) => a.eval_inner(vars)? + b.eval_inner(vars)?,
            Sub(a, b) => a.eval_inner(vars)? - b.eval_inner(vars)?,
            Mul(a, b) => a.eval_inner(vars)? * b.eval_inner(vars)?,
            Div(a, b) => {
                let d = b.eval_inner(vars)?;
                if d.val() == 0.0 {
                    return Err(ExprError::Evaluation(format!("division by zero in `{self}`")));
                }
                a.eval_inner(vars)? / d
            }
            Pow(a, b) => {
                let base = a.eval_inner(vars)?;
                match **b {
                    Num(c) if c.fract() == 0.0 && c.abs() < 64.0 => {
                        if c < 0.0 && base.val() == 0.0 {
                            return Err(ExprError::Evaluation(format!("zero to a negative power in `{self}`")));
                        }
                        base.powi(c as i32)
                    }
                    Num(c) => {
                        if base.val() <= 0.0 {
                            return Err(ExprError::Evaluation(format!("non-positive base in `{self}`")));
                        }
                        base.powf(c)
                    }
                    _ => {
                        if base.val() <= 0.0 {
                            return Err(ExprError::Evaluation(format!("non-positive base in `{self}`")));
                        }
                        (b.eval_inner(vars)? * base.ln()).exp()
                    }
                }
            }
            Call(f, a) => {
                let u = a.eval_inner(vars)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => u.tan(),
                    Func::Sinh => u.sinh(),
                    Func::Cosh => u.cosh(),
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u.val() <= 0.0 {
                            return Err(ExprError::Evaluation(format!("log of non-positive value in `{self}`")));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u.val() < 0.0 {
                            return Err(ExprError::Evaluation(format!("sqrt of negative value in `{self}`")));
                        }
                        u.sqrt()
                    }
                }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }

    /// Print with variable names taken from `names`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> Display<'a> {
        Display {
            expr: self,
            names: Some(names),
        }
    }
}

pub struct Display<'a> {
    expr: &'a Expr,
    names: Option<&'a [String]>,
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, self.names, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, None, f)
    }
}

fn write_expr(e: &Expr, names: Option<&[String]>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = |child: &Expr, min: u8, f: &mut fmt::Formatter<'_>| -> fmt::Result {
        if child.precedence() < min {
            write!(f, "(")?;
            write_expr(child, names, f)?;
            write!(f, ")")
        } else {
            write_expr(child, names, f)
        }
    };
    match e {
        Expr::Num(v) => {
            if *v < 0.0 {
                write!(f, "-{}", -v)
            } else {
                write!(f, "{v}")
            }
        }
        Expr::Var(i) => match names.and_then(|n| n.get(*i)) {
            Some(name) => write!(f, "{name}"),
            None => write!(f, "x{}", i + 1),
        },
        Expr::Neg(a) => {
            write!(f, "-")?;
            wrap(a, 4, f)
        }
        Expr::Add(a, b) => {
            wrap(a, 1, f)?;
            write!(f, " + ")?;
            wrap(b, 2, f)
        }
        Expr::Sub(a, b) => {
            wrap(a, 1, f)?;
            write!(f, " - ")?;
            wrap(b, 2, f)
        }
        Expr::Mul(a, b) => {
            wrap(a, 2, f)?;
            write!(f, "*")?;
            wrap(b, 3, f)
        }
        Expr::Div(a, b) => {
            wrap(a, 2, f)?;
            write!(f, "/")?;
            wrap(b, 4, f)
        }
        Expr::Pow(a, b) => {
            wrap(a, 5, f)?;
            write!(f, "^")?;
            wrap(b, 4, f)
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(a, names, f)?;
            write!(f, ")")
        }
    }
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        _ if a.is_zero() => b,
        _ if b.is_zero() => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        _ if b.is_zero() => a,
        _ if a.is_zero() => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        _ if a.is_zero() || b.is_zero() => Expr::Num(0.0),
        (Expr::Num(x), _) if *x == 1.0 => b,
        (_, Expr::Num(y)) if *y == 1.0 => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if a.is_zero() => Expr::Num(0.0),
        (_, Expr::Num(y)) if *y == 1.0 => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match &b {
        Expr::Num(y) if *y == 1.0 => a,
        Expr::Num(y) if *y == 0.0 => Expr::Num(1.0),
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, vars: &'a [String]) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            vars,
        }
    }

    fn err(&self, msg: &str) -> ExprError {
        ExprError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c as u8) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(match self.unary()? {
                Expr::Num(v) => Expr::Num(-v),
                e => Expr::Neg(Box::new(e)),
            });
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.err("unexpected end of input")),
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
            if let Some(f) = Func::from_name(name) {
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                return Ok(Expr::Call(f, Box::new(arg)));
            }
            if let Some(i) = self.vars.iter().position(|v| v == name) {
                return Ok(Expr::Var(i));
            }
            return match name {
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "e" => Ok(Expr::Num(std::f64::consts::E)),
                _ => Err(ExprError::UnknownSymbol {
                    name: name.to_string(),
                    pos: start,
                }),
            };
        }
        Err(self.err(&format!("unexpected character `{}`", c as char)))
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>().map(Expr::Num).map_err(|_| ExprError::Syntax {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taylor::Jet;

    fn names() -> Vec<String> {
        coordinate_names("x", 2)
    }

    #[test]
    fn precedence_and_associativity() {
        let e = Expr::parse("2^3^2 - -x1*3", &names()).unwrap();
        assert_eq!(e.eval(&[1.5, 0.0]).unwrap(), 512.0 + 4.5);
        let e = Expr::parse("-x1^2", &names()).unwrap();
        assert_eq!(e.eval(&[3.0, 0.0]).unwrap(), -9.0);
    }

    #[test]
    fn constants_and_functions() {
        let e = Expr::parse("sin(pi/2) + log(e) + sqrt(4)", &names()).unwrap();
        assert!((e.eval::<f64>(&[0.0, 0.0]).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_symbol_reports_position() {
        let err = Expr::parse("1 + y", &names()).unwrap_err();
        assert_eq!(
            err,
            ExprError::UnknownSymbol {
                name: "y".into(),
                pos: 4
            }
        );
    }

    #[test]
    fn missing_bracket_is_syntax_error() {
        let err = Expr::parse_matrix("[[1,0],[0,sin(x1)]", &names()).unwrap_err();
        match err {
            ExprError::Syntax { pos, .. } => assert_eq!(pos, 18),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "1 - (x1 - x2)",
            "x1/(x2*3)",
            "(-x1)^2",
            "-x1^2",
            "2^-1",
            "exp(-x1^2)*cos(x2)/(1 + x1)",
        ] {
            let e = Expr::parse(src, &names()).unwrap();
            let again = Expr::parse(&e.display_with(&names()).to_string(), &names()).unwrap();
            for p in [[0.3, 0.7], [1.1, -0.4]] {
                assert_eq!(e.eval::<f64>(&p).unwrap(), again.eval::<f64>(&p).unwrap(), "{src}");
            }
        }
    }

    #[test]
    fn symbolic_derivative_matches_jets() {
        let e = Expr::parse("sin(x1)^2*exp(x2) + x1^x2 + sqrt(1 + x1*x2)/cosh(x2)", &names()).unwrap();
        let p = [0.8, 0.3];
        let jet = e.eval(&Jet::variables(&p, 2)).unwrap();
        for i in 0..2 {
            let di = e.diff(i);
            assert!((di.eval::<f64>(&p).unwrap() - jet.d1(i)).abs() < 1e-13);
            for j in 0..2 {
                let dij = di.diff(j).eval::<f64>(&p).unwrap();
                assert!((dij - jet.d2(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn evaluation_errors() {
        let e = Expr::parse("log(x1)", &names()).unwrap();
        assert!(matches!(e.eval::<f64>(&[-1.0, 0.0]), Err(ExprError::Evaluation(_))));
        let e = Expr::parse("1/x1", &names()).unwrap();
        assert!(matches!(e.eval::<f64>(&[0.0, 0.0]), Err(ExprError::Evaluation(_))));
    }
}
