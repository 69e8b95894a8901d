//! Expression grammar shared by map input and the flow catalog.
//!
//! Literals are integers, `i`, and decimal-free rationals written as
//! quotients. Operators are `+ - * / ^` with the usual precedence; `^`
//! takes an integer exponent and is right associative. Identifiers followed
//! by `(` are function calls.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::polycore::GaussRat;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("at byte {offset}: {msg}")]
pub struct ParseError {
    pub offset: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(offset: usize, msg: impl Into<String>) -> Self {
        ParseError { offset, msg: msg.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(GaussRat),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(String, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    at: usize,
}

fn lex(src: &str, base: usize) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k] as char;
        if c.is_ascii_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() {
            let s = k;
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            let n: BigInt = src[s..k].parse().expect("digits");
            out.push(Token { tok: Tok::Num(n), at: base + s });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s = k;
            while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                k += 1;
            }
            out.push(Token { tok: Tok::Ident(src[s..k].to_string()), at: base + s });
        } else if "+-*/^(),:[]".contains(c) {
            out.push(Token { tok: Tok::Sym(c), at: base + k });
            k += 1;
        } else {
            let ch = src[k..].chars().next().unwrap();
            return Err(ParseError::new(base + k, format!("unexpected character '{}'", ch)));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.at).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(d)) if *d == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ParseError::new(self.at(), format!("expected '{}'", c))),
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(c)) if "+-*/^".contains(*c) => *c,
                _ => break,
            };
            let (l_bp, r_bp) = match op {
                '+' | '-' => (10, 11),
                '*' | '/' => (20, 21),
                _ => (41, 40),
            };
            if l_bp < min_bp {
                break;
            }
            let op_at = self.at();
            self.pos += 1;
            if op == '^' {
                let e = self.exponent()?;
                lhs = Expr::Pow(Box::new(lhs), e);
                continue;
            }
            let rhs = self.expr(r_bp).map_err(|e| if e.msg == "unexpected end of input" { ParseError::new(op_at, "operator without right operand") } else { e })?;
            lhs = match op {
                '+' => Expr::Add(Box::new(lhs), Box::new(rhs)),
                '-' => Expr::Sub(Box::new(lhs), Box::new(rhs)),
                '*' => Expr::Mul(Box::new(lhs), Box::new(rhs)),
                _ => Expr::Div(Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let at = self.at();
        let neg = matches!(self.peek(), Some(Tok::Sym('-')));
        if neg {
            self.pos += 1;
        }
        let paren = matches!(self.peek(), Some(Tok::Sym('(')));
        if paren {
            self.pos += 1;
            let e = self.exponent()?;
            self.expect(')')?;
            return Ok(if neg { -e } else { e });
        }
        match self.bump() {
            Some(Tok::Num(n)) => {
                let v: i64 = n.try_into().map_err(|_| ParseError::new(at, "exponent too large"))?;
                Ok(if neg { -v } else { v })
            }
            _ => Err(ParseError::new(at, "exponent must be an integer literal")),
        }
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let at = self.at();
        match self.bump() {
            None => Err(ParseError::new(at, "unexpected end of input")),
            Some(Tok::Num(n)) => Ok(Expr::Num(GaussRat::from_rational(BigRational::from_integer(n)))),
            Some(Tok::Ident(name)) => {
                if matches!(self.peek(), Some(Tok::Sym('('))) {
                    self.pos += 1;
                    let arg = self.expr(0)?;
                    self.expect(')')?;
                    return Ok(Expr::Call(name, Box::new(arg)));
                }
                if name == "i" {
                    Ok(Expr::Num(GaussRat::i()))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::Sym('(')) => {
                let e = self.expr(0)?;
                self.expect(')')?;
                Ok(e)
            }
            // unary minus binds tighter than * but looser than ^
            Some(Tok::Sym('-')) => Ok(Expr::Neg(Box::new(self.expr(30)?))),
            Some(Tok::Sym('+')) => self.expr(30),
            Some(Tok::Sym(c)) => Err(ParseError::new(at, format!("unexpected '{}'", c))),
        }
    }
}

/// Parses one expression occupying all of `src`; offsets are reported
/// relative to `base`.
pub fn parse_expr_at(src: &str, base: usize) -> Result<Expr, ParseError> {
    let toks = lex(src, base)?;
    let mut p = Parser { toks, pos: 0, end: base + src.len() };
    let e = p.expr(0)?;
    if p.pos < p.toks.len() {
        return Err(ParseError::new(p.at(), "trailing input"));
    }
    Ok(e)
}

pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    parse_expr_at(src, 0)
}

/// Splits `[a : b : c]` into component texts with their byte offsets.
pub fn split_triple(src: &str) -> Result<[(usize, &str); 3], ParseError> {
    let open = src.find(|c: char| !c.is_whitespace()).ok_or_else(|| ParseError::new(0, "empty input"))?;
    if !src[open..].starts_with('[') {
        return Err(ParseError::new(open, "expected '['"));
    }
    let close = src.rfind(']').ok_or_else(|| ParseError::new(src.len(), "expected ']'"))?;
    if let Some(k) = src[close + 1..].find(|c: char| !c.is_whitespace()) {
        return Err(ParseError::new(close + 1 + k, "trailing input after ']'"));
    }
    let inner = &src[open + 1..close];
    let mut parts = Vec::new();
    let mut start = 0;
    let mut depth = 0i32;
    for (k, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ':' if depth == 0 => {
                parts.push((open + 1 + start, &inner[start..k]));
                start = k + 1;
            }
            _ => {}
        }
    }
    parts.push((open + 1 + start, &inner[start..]));
    if parts.len() != 3 {
        return Err(ParseError::new(open, format!("expected 3 components separated by ':', found {}", parts.len())));
    }
    Ok([parts[0], parts[1], parts[2]])
}

impl Expr {
    /// Substitutes variables by expressions.
    pub fn subst(&self, f: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        let b = |e: &Expr| Box::new(e.subst(f));
        match self {
            Expr::Num(_) => self.clone(),
            Expr::Var(v) => f(v).unwrap_or_else(|| self.clone()),
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Pow(x, n) => Expr::Pow(b(x), *n),
            Expr::Call(g, x) => Expr::Call(g.clone(), b(x)),
        }
    }

    pub fn has_call(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) => a.has_call(),
            Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) | Expr::Div(x, y) => x.has_call() || y.has_call(),
            Expr::Call(..) => true,
        }
    }

    /// Generic fold over a field-like value type.
    pub fn eval<T, E>(&self, ops: &impl ExprOps<T, E>) -> Result<T, E> {
        match self {
            Expr::Num(c) => ops.num(c),
            Expr::Var(v) => ops.var(v),
            Expr::Neg(a) => Ok(ops.neg(a.eval(ops)?)),
            Expr::Add(x, y) => Ok(ops.add(x.eval(ops)?, y.eval(ops)?)),
            Expr::Sub(x, y) => Ok(ops.sub(x.eval(ops)?, y.eval(ops)?)),
            Expr::Mul(x, y) => Ok(ops.mul(x.eval(ops)?, y.eval(ops)?)),
            Expr::Div(x, y) => ops.div(x.eval(ops)?, y.eval(ops)?),
            Expr::Pow(x, n) => ops.pow(x.eval(ops)?, *n),
            Expr::Call(g, x) => ops.call(g, x.eval(ops)?),
        }
    }
}

/// Semantics for [`Expr::eval`].
pub trait ExprOps<T, E> {
    fn num(&self, c: &GaussRat) -> Result<T, E>;
    fn var(&self, name: &str) -> Result<T, E>;
    fn neg(&self, a: T) -> T;
    fn add(&self, a: T, b: T) -> T;
    fn sub(&self, a: T, b: T) -> T;
    fn mul(&self, a: T, b: T) -> T;
    fn div(&self, a: T, b: T) -> Result<T, E>;
    fn pow(&self, a: T, n: i64) -> Result<T, E>;
    fn call(&self, name: &str, a: T) -> Result<T, E>;
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{}", c),
            Expr::Var(v) => write!(f, "{}", v),
            Expr::Neg(a) => write!(f, "-({})", a),
            Expr::Add(x, y) => write!(f, "({} + {})", x, y),
            Expr::Sub(x, y) => write!(f, "({} - {})", x, y),
            Expr::Mul(x, y) => write!(f, "{}*{}", x, y),
            Expr::Div(x, y) => write!(f, "{}/({})", x, y),
            Expr::Pow(x, n) => write!(f, "({})^{}", x, n),
            Expr::Call(g, x) => write!(f, "{}({})", g, x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expr("-x0^2 + 3*x1/2").unwrap();
        assert_eq!(e.to_string(), "(-((x0)^2) + 3*x1/(2))");
    }

    #[test]
    fn errors_carry_offsets() {
        assert_eq!(parse_expr("x0 + $").unwrap_err().offset, 5);
        assert_eq!(parse_expr("x0 * (x1").unwrap_err().offset, 8);
        assert_eq!(parse_expr("x0^x1").unwrap_err().offset, 3);
    }

    #[test]
    fn triple_split() {
        let parts = split_triple(" [a : (b:c) : d]").unwrap();
        assert_eq!(parts[0], (2, "a "));
        assert_eq!(parts[1].1, " (b:c) ");
        assert!(split_triple("[a : b]").is_err());
    }
}
