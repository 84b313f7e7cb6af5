use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::jets::{Jet2, JetError};

pub const FUNCTIONS: &[&str] = &["exp", "log", "sin", "cos", "sinh", "cosh"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }
}

/// Scalar field expression over the model coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    Coord(usize),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    Neg(Box<ScalarExpr>),
    Powi(Box<ScalarExpr>, i32),
    Call(Func, Box<ScalarExpr>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: expected {}", expected.join(" or "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
    },
    #[error(
        "unknown identifier `{name}` at offset {offset}; coordinates: [{}], functions: [{}]",
        coordinates.join(", "),
        FUNCTIONS.join(", ")
    )]
    UnknownIdentifier {
        name: String,
        offset: usize,
        coordinates: Vec<String>,
    },
}

/// A jet-domain failure together with the path to the failing node.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{source} in expression at `{path}`")]
pub struct EvalError {
    pub path: String,
    pub source: JetError,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

const EXPECT_EXPR: &[&str] = &["expression"];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok<'a>, usize), ExprError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(start) else {
            return Ok((Tok::End, start));
        };
        let single = |t| Ok((t, start));
        self.pos += 1;
        match c {
            b'+' => single(Tok::Plus),
            b'-' => single(Tok::Minus),
            b'*' => single(Tok::Star),
            b'/' => single(Tok::Slash),
            b'^' => single(Tok::Caret),
            b'(' => single(Tok::LParen),
            b')' => single(Tok::RParen),
            b'0'..=b'9' | b'.' => {
                let mut end = start;
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut e = end + 1;
                    if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                        e += 1;
                    }
                    if e < bytes.len() && bytes[e].is_ascii_digit() {
                        while e < bytes.len() && bytes[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                self.pos = end;
                match self.src[start..end].parse::<f64>() {
                    Ok(v) => Ok((Tok::Num(v), start)),
                    Err(_) => Err(ExprError::Syntax {
                        offset: start,
                        expected: alloc::vec!["number"],
                    }),
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = start;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                self.pos = end;
                Ok((Tok::Ident(&self.src[start..end]), start))
            }
            _ => Err(ExprError::Syntax {
                offset: start,
                expected: EXPECT_EXPR.to_vec(),
            }),
        }
    }
}

struct Parser<'a, 's> {
    lexer: Lexer<'a>,
    tok: Tok<'a>,
    offset: usize,
    coords: &'s [&'s str],
}

impl<'a, 's> Parser<'a, 's> {
    fn bump(&mut self) -> Result<(), ExprError> {
        let (tok, offset) = self.lexer.next()?;
        self.tok = tok;
        self.offset = offset;
        Ok(())
    }

    fn fail<T>(&self, expected: &[&'static str]) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset: self.offset,
            expected: expected.to_vec(),
        })
    }

    fn expr(&mut self) -> Result<ScalarExpr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    lhs = ScalarExpr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump()?;
                    lhs = ScalarExpr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr, ExprError> {
        let mut lhs = self.power()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.bump()?;
                    lhs = ScalarExpr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                Tok::Slash => {
                    self.bump()?;
                    lhs = ScalarExpr::Div(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<ScalarExpr, ExprError> {
        let mut base = self.unary()?;
        while self.tok == Tok::Caret {
            self.bump()?;
            let negative = if self.tok == Tok::Minus {
                self.bump()?;
                true
            } else {
                false
            };
            let n = match self.tok {
                Tok::Num(v) if libm::trunc(v) == v && v <= i32::MAX as f64 => v as i32,
                _ => return self.fail(&["integer exponent"]),
            };
            self.bump()?;
            base = ScalarExpr::Powi(Box::new(base), if negative { -n } else { n });
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<ScalarExpr, ExprError> {
        if self.tok == Tok::Minus {
            self.bump()?;
            if let Tok::Num(v) = self.tok {
                self.bump()?;
                return Ok(ScalarExpr::Const(-v));
            }
            return Ok(ScalarExpr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<ScalarExpr, ExprError> {
        match self.tok {
            Tok::Num(v) => {
                self.bump()?;
                Ok(ScalarExpr::Const(v))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let offset = self.offset;
                if let Some(f) = Func::from_name(name) {
                    self.bump()?;
                    if self.tok != Tok::LParen {
                        return self.fail(&["("]);
                    }
                    self.bump()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(ScalarExpr::Call(f, Box::new(arg)));
                }
                match self.coords.iter().position(|c| *c == name) {
                    Some(k) => {
                        self.bump()?;
                        Ok(ScalarExpr::Coord(k))
                    }
                    None => Err(ExprError::UnknownIdentifier {
                        name: name.to_string(),
                        offset,
                        coordinates: self.coords.iter().map(|c| c.to_string()).collect(),
                    }),
                }
            }
            _ => self.fail(EXPECT_EXPR),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        if self.tok != Tok::RParen {
            return self.fail(&[")", "operator"]);
        }
        self.bump()
    }
}

/// Parses an expression over the named coordinates.
///
/// Precedence from tightest: unary minus, `^` (integer exponent), `*` `/`,
/// `+` `-`; binary operators associate to the left. A minus sign directly in
/// front of a numeric literal yields a negative constant.
pub fn parse_expr(source: &str, coords: &[&str]) -> Result<ScalarExpr, ExprError> {
    let mut p = Parser {
        lexer: Lexer {
            src: source,
            pos: 0,
        },
        tok: Tok::End,
        offset: 0,
        coords,
    };
    p.bump()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

impl ScalarExpr {
    pub fn constant(v: f64) -> Self {
        ScalarExpr::Const(v)
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coordinate(&self) -> Option<usize> {
        use ScalarExpr::*;
        match self {
            Const(_) => None,
            Coord(k) => Some(*k),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.max_coordinate().max(b.max_coordinate())
            }
            Neg(a) | Powi(a, _) | Call(_, a) => a.max_coordinate(),
        }
    }

    /// Exact value, gradient and Hessian at `point`.
    pub fn eval_jet(&self, point: &[f64]) -> Result<Jet2, EvalError> {
        self.jet(point).map_err(|(path, source)| EvalError {
            path: render_path(path),
            source,
        })
    }

    fn jet(&self, p: &[f64]) -> Result<Jet2, (Vec<&'static str>, JetError)> {
        use ScalarExpr::*;
        let d = p.len();
        let sub = |e: &ScalarExpr, label: &'static str| {
            e.jet(p).map_err(|(mut path, err)| {
                path.push(label);
                (path, err)
            })
        };
        Ok(match self {
            Const(v) => Jet2::constant(d, *v),
            Coord(k) => Jet2::variable(d, *k, p[*k]),
            Add(a, b) => sub(a, "lhs")? + sub(b, "rhs")?,
            Sub(a, b) => sub(a, "lhs")? - sub(b, "rhs")?,
            Mul(a, b) => sub(a, "lhs")? * sub(b, "rhs")?,
            Div(a, b) => sub(a, "lhs")?
                .checked_div(sub(b, "rhs")?)
                .map_err(|e| (Vec::from(["div"]), e))?,
            Neg(a) => -sub(a, "arg")?,
            Powi(a, n) => sub(a, "base")?
                .powi(*n)
                .map_err(|e| (Vec::from(["powi"]), e))?,
            Call(f, a) => {
                let x = sub(a, f.name())?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Log => x.ln().map_err(|e| (Vec::from(["log"]), e))?,
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                }
            }
        })
    }

    /// Plain value at `point`, without derivative propagation.
    pub fn eval_value(&self, point: &[f64]) -> Result<f64, EvalError> {
        use ScalarExpr::*;
        let err = |label: &str, source| EvalError {
            path: label.to_string(),
            source,
        };
        Ok(match self {
            Const(v) => *v,
            Coord(k) => point[*k],
            Add(a, b) => a.eval_value(point)? + b.eval_value(point)?,
            Sub(a, b) => a.eval_value(point)? - b.eval_value(point)?,
            Mul(a, b) => a.eval_value(point)? * b.eval_value(point)?,
            Div(a, b) => {
                let den = b.eval_value(point)?;
                if den == 0.0 {
                    return Err(err("div", JetError::DivisionByZero { value: den }));
                }
                a.eval_value(point)? / den
            }
            Neg(a) => -a.eval_value(point)?,
            Powi(a, n) => {
                let v = a.eval_value(point)?;
                if *n < 0 && v == 0.0 {
                    return Err(err(
                        "powi",
                        JetError::PowDomain {
                            value: v,
                            exponent: *n,
                        },
                    ));
                }
                libm::pow(v, *n as f64)
            }
            Call(f, a) => {
                let v = a.eval_value(point)?;
                match f {
                    Func::Exp => libm::exp(v),
                    Func::Log => {
                        if !(v > 0.0) {
                            return Err(err("log", JetError::LogDomain { value: v }));
                        }
                        libm::log(v)
                    }
                    Func::Sin => libm::sin(v),
                    Func::Cos => libm::cos(v),
                    Func::Sinh => libm::sinh(v),
                    Func::Cosh => libm::cosh(v),
                }
            }
        })
    }

    /// Renders with the given coordinate names; the output parses back to an
    /// identical tree.
    pub fn display<'a>(&'a self, coords: &'a [&'a str]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, coords }
    }

    fn precedence(&self) -> u8 {
        use ScalarExpr::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Powi(..) => 3,
            Neg(..) => 4,
            Const(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 4,
            Const(_) | Coord(_) | Call(..) => 5,
        }
    }
}

fn render_path(mut labels: Vec<&'static str>) -> String {
    labels.reverse();
    if labels.is_empty() {
        return String::from("<root>");
    }
    labels.join("/")
}

pub struct ExprDisplay<'a> {
    expr: &'a ScalarExpr,
    coords: &'a [&'a str],
}

impl ExprDisplay<'_> {
    fn child<'b>(&'b self, e: &'b ScalarExpr) -> ExprDisplay<'b> {
        ExprDisplay {
            expr: e,
            coords: self.coords,
        }
    }

    fn wrapped(&self, f: &mut fmt::Formatter<'_>, e: &ScalarExpr, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({})", self.child(e))
        } else {
            write!(f, "{}", self.child(e))
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScalarExpr::*;
        let e = self.expr;
        let prec = e.precedence();
        match e {
            Const(v) => write!(f, "{v}"),
            Coord(k) => match self.coords.get(*k) {
                Some(name) => f.write_str(name),
                None => write!(f, "x{k}"),
            },
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                let op = match e {
                    Add(..) => " + ",
                    Sub(..) => " - ",
                    Mul(..) => "*",
                    _ => "/",
                };
                self.wrapped(f, a, a.precedence() < prec)?;
                f.write_str(op)?;
                self.wrapped(f, b, b.precedence() <= prec)
            }
            Neg(a) => {
                f.write_str("-")?;
                let literal = matches!(**a, Const(v) if v >= 0.0 && !v.is_sign_negative());
                self.wrapped(f, a, literal || a.precedence() < 4)
            }
            Powi(a, n) => {
                self.wrapped(f, a, a.precedence() < 3)?;
                write!(f, "^{n}")
            }
            Call(func, a) => write!(f, "{}({})", func.name(), self.child(a)),
        }
    }
}
