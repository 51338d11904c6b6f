//! A small arithmetic language over the chart coordinates `x`, `y`, `z`,
//! used for prescribed curvature fields.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! var     := 'x' | 'y' | 'z'
//! func    := exp | log | sin | cos | sinh | cosh | sqrt
//! ```

use std::fmt;
use std::str::FromStr;

use crate::jet::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    pub fn index(self) -> usize {
        self as usize
    }

    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Parse failure with the 0-based character offset of the offending token.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.pos + 1, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Domain failure during evaluation (log of a nonpositive value and the like).
#[derive(Debug, Clone, PartialEq)]
pub struct EvalError {
    pub message: String,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for EvalError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
            let v = text.parse::<f64>().map_err(|_| ParseError {
                pos: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), start));
        } else if "+-*/^".contains(ch) {
            out.push((Tok::Op(ch), i));
            i += 1;
        } else if ch == '(' {
            out.push((Tok::LParen, i));
            i += 1;
        } else if ch == ')' {
            out.push((Tok::RParen, i));
            i += 1;
        } else {
            return Err(ParseError {
                pos: i,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "y" => Ok(Expr::Var(Var::Y)),
                "z" => Ok(Expr::Var(Var::Z)),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "p" | "q" => Err(ParseError {
                    pos,
                    message: format!("`{name}`: gradient dependence is reserved"),
                }),
                _ => {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ParseError {
                            pos,
                            message: format!("unknown identifier `{name}`"),
                        });
                    };
                    if *self.peek() != Tok::LParen {
                        return self.err(format!("expected `(` after `{name}`"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return self.err("expected `)`");
                    }
                    self.bump();
                    Ok(Expr::Call(func, Box::new(arg)))
                }
            },
            Tok::End => Err(ParseError {
                pos,
                message: "unexpected end of expression".into(),
            }),
            Tok::Op(c) => Err(ParseError {
                pos,
                message: format!("unexpected operator `{c}`"),
            }),
            Tok::RParen => Err(ParseError {
                pos,
                message: "unexpected `)`".into(),
            }),
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        Expr::parse(src)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(-{})", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Bin(op, Box::new(a), Box::new(b)).simplified()
}

fn call(func: Func, a: Expr) -> Expr {
    Expr::Call(func, Box::new(a))
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let mut p = Parser {
            toks: tokenize(src)?,
            at: 0,
        };
        let e = p.expr()?;
        if *p.peek() != Tok::End {
            return p.err("unexpected trailing input");
        }
        Ok(e)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    /// True when no variable occurs.
    pub fn is_constant(&self) -> bool {
        ![Var::X, Var::Y, Var::Z].iter().any(|&v| self.depends_on(v))
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Bin(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    /// One pass of local constant folding and identity removal.
    pub fn simplified(self) -> Expr {
        match self {
            Expr::Neg(a) => match *a {
                Expr::Num(v) => num(-v),
                Expr::Neg(inner) => *inner,
                other => Expr::Neg(Box::new(other)),
            },
            Expr::Bin(op, a, b) => {
                let (ca, cb) = (a.as_const(), b.as_const());
                if let (Some(x), Some(y)) = (ca, cb) {
                    let v = match op {
                        BinOp::Add => x + y,
                        BinOp::Sub => x - y,
                        BinOp::Mul => x * y,
                        BinOp::Div => x / y,
                        BinOp::Pow => x.powf(y),
                    };
                    if v.is_finite() {
                        return num(v);
                    }
                }
                match (op, ca, cb) {
                    (BinOp::Add, Some(0.0), _) => *b,
                    (BinOp::Add | BinOp::Sub, _, Some(0.0)) => *a,
                    (BinOp::Sub, Some(0.0), _) => Expr::Neg(b).simplified(),
                    (BinOp::Mul, Some(0.0), _) | (BinOp::Mul, _, Some(0.0)) => num(0.0),
                    (BinOp::Mul, Some(1.0), _) => *b,
                    (BinOp::Mul | BinOp::Div | BinOp::Pow, _, Some(1.0)) => *a,
                    (BinOp::Div, Some(0.0), _) => num(0.0),
                    (BinOp::Pow, _, Some(0.0)) => num(1.0),
                    _ => Expr::Bin(op, a, b),
                }
            }
            other => other,
        }
    }

    /// Symbolic partial derivative.
    pub fn diff(&self, var: Var) -> Expr {
        if !self.depends_on(var) {
            return num(0.0);
        }
        match self {
            Expr::Num(_) => num(0.0),
            Expr::Var(v) => num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::Neg(Box::new(a.diff(var))).simplified(),
            Expr::Bin(op, a, b) => {
                let (da, db) = (a.diff(var), b.diff(var));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => bin(BinOp::Add, da, db),
                    BinOp::Sub => bin(BinOp::Sub, da, db),
                    BinOp::Mul => bin(
                        BinOp::Add,
                        bin(BinOp::Mul, da, b.clone()),
                        bin(BinOp::Mul, a, db),
                    ),
                    BinOp::Div => bin(
                        BinOp::Div,
                        bin(
                            BinOp::Sub,
                            bin(BinOp::Mul, da, b.clone()),
                            bin(BinOp::Mul, a, db),
                        ),
                        bin(BinOp::Pow, b, num(2.0)),
                    ),
                    BinOp::Pow => {
                        if let Some(n) = b.as_const() {
                            // n a^(n-1) a'
                            bin(
                                BinOp::Mul,
                                bin(BinOp::Mul, num(n), bin(BinOp::Pow, a, num(n - 1.0))),
                                da,
                            )
                        } else {
                            // a^b (b' log a + b a'/a)
                            let lead = self.clone();
                            let t1 = bin(BinOp::Mul, db, call(Func::Log, a.clone()));
                            let t2 = bin(BinOp::Div, bin(BinOp::Mul, b, da), a);
                            bin(BinOp::Mul, lead, bin(BinOp::Add, t1, t2))
                        }
                    }
                }
            }
            Expr::Call(func, a) => {
                let da = a.diff(var);
                let a = (**a).clone();
                let outer = match func {
                    Func::Exp => call(Func::Exp, a),
                    Func::Log => bin(BinOp::Div, num(1.0), a),
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => Expr::Neg(Box::new(call(Func::Sin, a))),
                    Func::Sinh => call(Func::Cosh, a),
                    Func::Cosh => call(Func::Sinh, a),
                    Func::Sqrt => bin(BinOp::Div, num(0.5), call(Func::Sqrt, a)),
                };
                bin(BinOp::Mul, outer, da)
            }
        }
    }

    /// Evaluates at `vars = [x, y, z]` over any [`Real`] scalar. Domain checks
    /// use the leading value.
    pub fn eval<T: Real>(&self, vars: [T; 3]) -> Result<T, EvalError> {
        let out = self.eval_inner(&vars)?;
        if !out.value().is_finite() {
            return Err(EvalError {
                message: format!("non-finite value in `{self}`"),
            });
        }
        Ok(out)
    }

    fn eval_inner<T: Real>(&self, vars: &[T; 3]) -> Result<T, EvalError> {
        Ok(match self {
            Expr::Num(v) => T::from_f64(*v),
            Expr::Var(v) => vars[v.index()],
            Expr::Neg(a) => -a.eval_inner(vars)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval_inner(vars)?;
                if *op == BinOp::Pow {
                    let exponent = if b.is_constant() {
                        Some(b.eval_inner(&[0.0f64; 3])?)
                    } else {
                        None
                    };
                    if let Some(n) = exponent {
                        if n.fract() == 0.0 && n.abs() <= 64.0 {
                            if n < 0.0 && x.value() == 0.0 {
                                return Err(self.domain("zero to a negative power"));
                            }
                            return Ok(x.powi(n as i32));
                        }
                        if x.value() <= 0.0 {
                            return Err(self.domain("nonpositive base to a fractional power"));
                        }
                        return Ok(x.powf(n));
                    }
                    let y = b.eval_inner(vars)?;
                    if x.value() <= 0.0 {
                        return Err(self.domain("nonpositive base to a variable power"));
                    }
                    return Ok((y * x.ln()).exp());
                }
                let y = b.eval_inner(vars)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y.value() == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        x / y
                    }
                    BinOp::Pow => unreachable!(),
                }
            }
            Expr::Call(func, a) => {
                let x = a.eval_inner(vars)?;
                match func {
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x.value() <= 0.0 {
                            return Err(self.domain(&format!("log of {}", x.value())));
                        }
                        x.ln()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Sqrt => {
                        if x.value() < 0.0 {
                            return Err(self.domain(&format!("sqrt of {}", x.value())));
                        }
                        x.sqrt()
                    }
                }
            }
        })
    }

    fn domain(&self, what: &str) -> EvalError {
        EvalError {
            message: format!("{what} in `{self}`"),
        }
    }
}
