//! Map input grammar, report records and the command implementations
//! behind the `cremona` binary.

pub mod commands;
pub mod record;

use thiserror::Error;

use crate::expr::{parse_expr_at, split_triple, Expr, ExprOps, ParseError};
use crate::polycore::mpoly::MPoly;
use crate::polycore::{GaussRat, HPoly};
use crate::ratmap::{MapError, RatMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InputError {
    #[error("syntax error {0}")]
    Syntax(#[from] ParseError),
    #[error("at byte {0}: component is not homogeneous")]
    Inhomogeneous(usize),
    #[error("components have degrees {0:?}")]
    DegreeMismatch([Option<u32>; 3]),
    #[error("at byte {0}: unknown variable '{1}'")]
    UnknownVariable(usize, String),
    #[error("at byte {0}: {1}")]
    NotPolynomial(usize, String),
    #[error(transparent)]
    Map(#[from] MapError),
}

struct PolyOps;

impl ExprOps<MPoly, String> for PolyOps {
    fn num(&self, c: &GaussRat) -> Result<MPoly, String> {
        Ok(MPoly::constant(3, c.clone()))
    }
    fn var(&self, name: &str) -> Result<MPoly, String> {
        match name {
            "x0" => Ok(MPoly::var(3, 0)),
            "x1" => Ok(MPoly::var(3, 1)),
            "x2" => Ok(MPoly::var(3, 2)),
            _ => Err(format!("unknown variable '{}'", name)),
        }
    }
    fn neg(&self, a: MPoly) -> MPoly {
        -&a
    }
    fn add(&self, a: MPoly, b: MPoly) -> MPoly {
        a + b
    }
    fn sub(&self, a: MPoly, b: MPoly) -> MPoly {
        a - b
    }
    fn mul(&self, a: MPoly, b: MPoly) -> MPoly {
        a * b
    }
    fn div(&self, a: MPoly, b: MPoly) -> Result<MPoly, String> {
        match b.constant_value() {
            Some(c) if !c.is_zero() => Ok(a.scale(&c.inv())),
            Some(_) => Err("division by zero".into()),
            None => Err("division by a non-constant".into()),
        }
    }
    fn pow(&self, a: MPoly, n: i64) -> Result<MPoly, String> {
        if n < 0 {
            return Err("negative exponent".into());
        }
        Ok(a.pow(n as u32))
    }
    fn call(&self, name: &str, _a: MPoly) -> Result<MPoly, String> {
        Err(format!("function '{}' is not allowed in a map", name))
    }
}

fn to_hpoly(e: &Expr, src: &str, at: usize) -> Result<HPoly, InputError> {
    let m = e.eval(&PolyOps).map_err(|msg| {
        if let Some(v) = msg.strip_prefix("unknown variable '") {
            let v = v.trim_end_matches('\'').to_string();
            InputError::UnknownVariable(at + src.find(&v).unwrap_or(0), v)
        } else {
            InputError::NotPolynomial(at, msg)
        }
    })?;
    let terms = m.terms().map(|(e, c)| ([e[0], e[1], e[2]], c.clone()));
    HPoly::from_terms(terms).map_err(|_| InputError::Inhomogeneous(at))
}

/// Parses the three components without reducing.
pub fn parse_map_raw(text: &str) -> Result<RatMap, InputError> {
    let parts = split_triple(text)?;
    let mut comps: Vec<HPoly> = Vec::with_capacity(3);
    for (at, src) in parts {
        let e = parse_expr_at(src, at)?;
        comps.push(to_hpoly(&e, src, at)?);
    }
    let comps: [HPoly; 3] = comps.try_into().expect("three components");
    let degs = [0, 1, 2].map(|k| comps[k].degree());
    let present: Vec<u32> = degs.iter().flatten().copied().collect();
    if present.iter().any(|&d| d != present[0]) {
        return Err(InputError::DegreeMismatch(degs));
    }
    Ok(RatMap::new(comps)?)
}

/// Parses `[e0 : e1 : e2]` into a reduced map.
pub fn parse_map(text: &str) -> Result<RatMap, InputError> {
    Ok(parse_map_raw(text)?.reduce())
}

/// A constant expression such as `-3/2` or `1+2*i`.
pub fn parse_constant(text: &str) -> Result<GaussRat, String> {
    let e = parse_expr_at(text, 0).map_err(|e| e.to_string())?;
    let p = e.eval(&PolyOps)?;
    p.constant_value().ok_or_else(|| format!("'{}' is not a constant", text.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_maps() {
        assert_eq!(parse_map("[x1*x2 : x0*x2 : x0*x1]").unwrap(), RatMap::sigma());
        assert_eq!(parse_map("[x0^2 : x0*x1 : x1^2 - x0*x2]").unwrap(), RatMap::tau());
        assert_eq!(parse_map("[x0*x1:x2^2:x1*x2]").unwrap(), RatMap::rho());
    }

    #[test]
    fn diagnostics() {
        assert_eq!(parse_map("[x0 : x1 : x0+1]").unwrap_err(), InputError::Inhomogeneous(10));
        assert!(matches!(parse_map("[x0 : x1^2 : x2]"), Err(InputError::DegreeMismatch(_))));
        assert!(matches!(parse_map("[x0 : y : x2]"), Err(InputError::UnknownVariable(6, _))));
        assert!(matches!(parse_map("[x0 : x1 : x2/x0]"), Err(InputError::NotPolynomial(..))));
        assert!(matches!(parse_map("[x0 : x1 + : x2]"), Err(InputError::Syntax(_))));
    }

    #[test]
    fn display_round_trip() {
        for s in ["[x0^3 : x1^2*x2 : x0*x1*x2]", "[(1+2*i)*x0 - i*x1 : 3/4*x1 : -x2]", "[x1*x2 : x0*x2 : x0*x1]"] {
            let f = parse_map(s).unwrap();
            assert_eq!(parse_map(&f.to_string()).unwrap(), f);
        }
    }
}
