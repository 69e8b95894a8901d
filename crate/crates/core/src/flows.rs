//! Catalog of quadratic birational flows in the affine chart (x0, x1) and
//! the checks run on each entry: group law, infinitesimal generator, strong
//! symmetry, first integral, invariant line fibration and the stratum of
//! the time-t map.
//!
//! A flow is written in t and u, where u stands for e^{λt}. Entries without
//! trigonometric terms are checked as exact rational identities over Q(i)
//! with u a free symbol; the others are checked numerically.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::birat::{classify_quadratic, Label};
use crate::expr::{parse_expr_at, Expr, ExprOps, ParseError};
use crate::polycore::mpoly::MPoly;
use crate::polycore::{GaussRat, HPoly, NumConfig};
use crate::ratmap::RatMap;

pub const CATALOG: &str = include_str!("../data/flows.txt");
pub const CONTROLS: &str = include_str!("../data/flow_controls.txt");

/// Variables of the exact computations: the point, the time and its
/// exponential, and a second time with its exponential for the group law.
const VARS: [&str; 6] = ["x0", "x1", "t", "u", "s", "v"];
const NV: usize = 6;
const X0: usize = 0;
const X1: usize = 1;
const T: usize = 2;
const U: usize = 3;
const S: usize = 4;
const V: usize = 5;

/// Tolerance of the numeric checks.
pub const NUMERIC_TOL: f64 = 1e-9;
/// Number of seeded samples in the numeric checks.
pub const NUMERIC_SAMPLES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("catalog line {0}: {1}")]
    Format(usize, String),
    #[error("catalog line {0}: {1}")]
    Syntax(usize, ParseError),
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("'{0}' has no exact rational meaning here")]
    NotRational(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("log may only occur linearly with constant coefficients")]
    NonlinearLog,
}

/// Quotient of two polynomials in the six variables; not kept reduced.
#[derive(Clone, Debug)]
pub struct RatFn {
    pub num: MPoly,
    pub den: MPoly,
}

impl RatFn {
    pub fn poly(p: MPoly) -> Self {
        RatFn { num: p, den: MPoly::int(NV, 1) }
    }

    pub fn constant(c: GaussRat) -> Self {
        Self::poly(MPoly::constant(NV, c))
    }

    pub fn int(c: i64) -> Self {
        Self::poly(MPoly::int(NV, c))
    }

    pub fn var(i: usize) -> Self {
        Self::poly(MPoly::var(NV, i))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalized(self) -> Self {
        match self.den.constant_value() {
            Some(c) if !c.is_one() && !c.is_zero() => RatFn { num: self.num.scale(&c.inv()), den: MPoly::int(NV, 1) },
            _ => self,
        }
    }

    pub fn add(&self, o: &RatFn) -> RatFn {
        if self.den == o.den {
            return RatFn { num: &self.num + &o.num, den: self.den.clone() };
        }
        RatFn { num: &(&self.num * &o.den) + &(&o.num * &self.den), den: &self.den * &o.den }.normalized()
    }

    pub fn neg(&self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatFn) -> RatFn {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFn) -> RatFn {
        if self.is_zero() || o.is_zero() {
            return RatFn::int(0);
        }
        RatFn { num: &self.num * &o.num, den: &self.den * &o.den }.normalized()
    }

    pub fn div(&self, o: &RatFn) -> Result<RatFn, FlowError> {
        if o.is_zero() {
            return Err(FlowError::DivisionByZero);
        }
        Ok(RatFn { num: &self.num * &o.den, den: &self.den * &o.num }.normalized())
    }

    pub fn powi(&self, n: i64) -> Result<RatFn, FlowError> {
        let m = n.unsigned_abs() as u32;
        let p = RatFn { num: self.num.pow(m), den: self.den.pow(m) };
        if n >= 0 {
            Ok(p)
        } else {
            RatFn::int(1).div(&p)
        }
    }

    pub fn partial(&self, i: usize) -> RatFn {
        let n = &(&self.num.partial(i) * &self.den) - &(&self.num * &self.den.partial(i));
        RatFn { num: n, den: self.den.pow(2) }.normalized()
    }

    /// Equality as rational functions, by cross multiplication.
    pub fn same_as(&self, o: &RatFn) -> bool {
        &self.num * &o.den == &o.num * &self.den
    }

    /// Substitutes every variable i by `g[i]`.
    pub fn subst(&self, g: &[RatFn; NV]) -> RatFn {
        let (num, dn) = subst_poly(&self.num, g);
        let (den, dd) = subst_poly(&self.den, g);
        // num/prod d_i^{dn_i} over den/prod d_i^{dd_i}
        let mut top = num;
        let mut bot = den;
        for i in 0..NV {
            if dd[i] > dn[i] {
                top = &top * &g[i].den.pow(dd[i] - dn[i]);
            } else if dn[i] > dd[i] {
                bot = &bot * &g[i].den.pow(dn[i] - dd[i]);
            }
        }
        RatFn { num: top, den: bot }.normalized()
    }

    /// Exact value at a point; None at a pole.
    pub fn eval(&self, x: &[GaussRat; NV]) -> Option<GaussRat> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(&self.num.eval(x) / &d)
    }

    pub fn eval_c(&self, x: &[Complex64; NV]) -> Complex64 {
        self.num.eval_c(x) / self.den.eval_c(x)
    }

    pub fn render(&self) -> String {
        let n = self.num.render(&VARS);
        let d = self.den.render(&VARS);
        if d == "1" {
            n
        } else {
            format!("({})/({})", n, d)
        }
    }
}

/// p(g) as a polynomial numerator together with the power of each
/// denominator that was cleared.
fn subst_poly(p: &MPoly, g: &[RatFn; NV]) -> (MPoly, [u32; NV]) {
    let deg: [u32; NV] = std::array::from_fn(|i| if g[i].den.constant_value().is_some() { 0 } else { p.degree_in(i) });
    let mut num_pows: Vec<Vec<MPoly>> = g.iter().map(|gi| vec![MPoly::int(NV, 1), gi.num.clone()]).collect();
    let mut den_pows: Vec<Vec<MPoly>> = g.iter().map(|gi| vec![MPoly::int(NV, 1), gi.den.clone()]).collect();
    let grow = |cache: &mut Vec<MPoly>, k: usize, base: &MPoly| {
        while cache.len() <= k {
            let nxt = cache.last().unwrap() * base;
            cache.push(nxt);
        }
    };
    let mut out = MPoly::zero(NV);
    for (e, c) in p.terms() {
        let mut term = MPoly::constant(NV, c.clone());
        for i in 0..NV {
            let k = e[i] as usize;
            if k > 0 {
                grow(&mut num_pows[i], k, &g[i].num);
                term = &term * &num_pows[i][k];
            }
            if deg[i] > 0 {
                let r = (deg[i] - e[i]) as usize;
                if r > 0 {
                    grow(&mut den_pows[i], r, &g[i].den);
                    term = &term * &den_pows[i][r];
                }
            } else if k > 0 {
                // constant denominator: fold it into the coefficient
                let dc = g[i].den.constant_value().unwrap();
                term = term.scale(&dc.pow(k as u32).inv());
            }
        }
        out = &out + &term;
    }
    (out, deg)
}

/// Exact evaluation into rational functions. Calls are allowed only when a
/// constant is supplied for them.
struct RatOps<'a> {
    vars: &'a [(&'a str, RatFn)],
    calls: &'a [(&'a str, GaussRat)],
}

impl ExprOps<RatFn, FlowError> for RatOps<'_> {
    fn num(&self, c: &GaussRat) -> Result<RatFn, FlowError> {
        Ok(RatFn::constant(c.clone()))
    }
    fn var(&self, name: &str) -> Result<RatFn, FlowError> {
        self.vars.iter().find(|(n, _)| *n == name).map(|(_, v)| v.clone()).ok_or_else(|| FlowError::UnknownVariable(name.into()))
    }
    fn neg(&self, a: RatFn) -> RatFn {
        a.neg()
    }
    fn add(&self, a: RatFn, b: RatFn) -> RatFn {
        a.add(&b)
    }
    fn sub(&self, a: RatFn, b: RatFn) -> RatFn {
        a.sub(&b)
    }
    fn mul(&self, a: RatFn, b: RatFn) -> RatFn {
        a.mul(&b)
    }
    fn div(&self, a: RatFn, b: RatFn) -> Result<RatFn, FlowError> {
        a.div(&b)
    }
    fn pow(&self, a: RatFn, n: i64) -> Result<RatFn, FlowError> {
        a.powi(n)
    }
    fn call(&self, name: &str, _a: RatFn) -> Result<RatFn, FlowError> {
        self.calls.iter().find(|(n, _)| *n == name).map(|(_, c)| RatFn::constant(c.clone())).ok_or_else(|| FlowError::NotRational(name.into()))
    }
}

fn base_vars() -> Vec<(&'static str, RatFn)> {
    VARS.iter().enumerate().map(|(i, n)| (*n, RatFn::var(i))).collect()
}

fn exact(e: &Expr) -> Result<RatFn, FlowError> {
    e.eval(&RatOps { vars: &base_vars(), calls: &[] })
}

/// Value and derivative along a vector field, for expressions in which
/// `log` occurs only linearly. A missing value marks a log term.
#[derive(Clone)]
struct Jet {
    val: Option<RatFn>,
    der: RatFn,
}

struct JetOps<'a> {
    chi: &'a [RatFn; 2],
}

fn const_of(j: &Jet) -> Option<&RatFn> {
    match &j.val {
        Some(v) if j.der.is_zero() && v.num.total_degree().unwrap_or(0) == 0 && v.den.total_degree().unwrap_or(0) == 0 => Some(v),
        _ => None,
    }
}

impl ExprOps<Jet, FlowError> for JetOps<'_> {
    fn num(&self, c: &GaussRat) -> Result<Jet, FlowError> {
        Ok(Jet { val: Some(RatFn::constant(c.clone())), der: RatFn::int(0) })
    }
    fn var(&self, name: &str) -> Result<Jet, FlowError> {
        let i = match name {
            "x0" => X0,
            "x1" => X1,
            _ => return Err(FlowError::UnknownVariable(name.into())),
        };
        Ok(Jet { val: Some(RatFn::var(i)), der: self.chi[i].clone() })
    }
    fn neg(&self, a: Jet) -> Jet {
        Jet { val: a.val.map(|v| v.neg()), der: a.der.neg() }
    }
    fn add(&self, a: Jet, b: Jet) -> Jet {
        let val = match (a.val, b.val) {
            (Some(x), Some(y)) => Some(x.add(&y)),
            _ => None,
        };
        Jet { val, der: a.der.add(&b.der) }
    }
    fn sub(&self, a: Jet, b: Jet) -> Jet {
        self.add(a, self.neg(b))
    }
    fn mul(&self, a: Jet, b: Jet) -> Jet {
        match (&a.val, &b.val) {
            (Some(x), Some(y)) => Jet { val: Some(x.mul(y)), der: a.der.mul(y).add(&x.mul(&b.der)) },
            // a constant times a log term; anything else is caught by `div`
            _ => match (const_of(&a), const_of(&b)) {
                (Some(c), _) => Jet { val: None, der: b.der.mul(c) },
                (_, Some(c)) => Jet { val: None, der: a.der.mul(c) },
                _ => Jet::poisoned(),
            },
        }
    }
    fn div(&self, a: Jet, b: Jet) -> Result<Jet, FlowError> {
        let y = b.val.as_ref().ok_or(FlowError::NonlinearLog)?;
        match &a.val {
            Some(x) => {
                let val = x.div(y)?;
                let der = a.der.mul(y).sub(&x.mul(&b.der)).div(&y.mul(y))?;
                Ok(Jet { val: Some(val), der })
            }
            None => {
                if !b.der.is_zero() {
                    return Err(FlowError::NonlinearLog);
                }
                Ok(Jet { val: None, der: a.der.div(y)? })
            }
        }
    }
    fn pow(&self, a: Jet, n: i64) -> Result<Jet, FlowError> {
        let x = a.val.as_ref().ok_or(FlowError::NonlinearLog)?;
        let val = x.powi(n)?;
        let der = x.powi(n - 1)?.mul(&a.der).mul(&RatFn::int(n));
        Ok(Jet { val: Some(val), der })
    }
    fn call(&self, name: &str, a: Jet) -> Result<Jet, FlowError> {
        match name {
            "log" => {
                let x = a.val.as_ref().ok_or(FlowError::NonlinearLog)?;
                Ok(Jet { val: None, der: a.der.div(x)? })
            }
            _ => Err(FlowError::NotRational(name.into())),
        }
    }
}

impl Jet {
    /// A product involving two log terms. `mul` cannot fail, so the zero
    /// denominator is a sentinel that survives later operations.
    fn poisoned() -> Jet {
        Jet { val: None, der: RatFn { num: MPoly::zero(NV), den: MPoly::zero(NV) } }
    }
    fn is_poisoned(&self) -> bool {
        self.der.den.is_zero()
    }
}

/// Forward-mode dual numbers over C for the numeric checks.
#[derive(Clone, Copy, Debug)]
struct Dual {
    v: Complex64,
    d: Complex64,
}

impl Dual {
    fn c(v: Complex64) -> Dual {
        Dual { v, d: Complex64::new(0.0, 0.0) }
    }
}

struct DualOps<'a> {
    vars: &'a [(&'a str, Dual)],
}

impl ExprOps<Dual, FlowError> for DualOps<'_> {
    fn num(&self, c: &GaussRat) -> Result<Dual, FlowError> {
        Ok(Dual::c(c.to_c64()))
    }
    fn var(&self, name: &str) -> Result<Dual, FlowError> {
        self.vars.iter().find(|(n, _)| *n == name).map(|(_, v)| *v).ok_or_else(|| FlowError::UnknownVariable(name.into()))
    }
    fn neg(&self, a: Dual) -> Dual {
        Dual { v: -a.v, d: -a.d }
    }
    fn add(&self, a: Dual, b: Dual) -> Dual {
        Dual { v: a.v + b.v, d: a.d + b.d }
    }
    fn sub(&self, a: Dual, b: Dual) -> Dual {
        Dual { v: a.v - b.v, d: a.d - b.d }
    }
    fn mul(&self, a: Dual, b: Dual) -> Dual {
        Dual { v: a.v * b.v, d: a.d * b.v + a.v * b.d }
    }
    fn div(&self, a: Dual, b: Dual) -> Result<Dual, FlowError> {
        if b.v.norm() == 0.0 {
            return Err(FlowError::DivisionByZero);
        }
        Ok(Dual { v: a.v / b.v, d: (a.d * b.v - a.v * b.d) / (b.v * b.v) })
    }
    fn pow(&self, a: Dual, n: i64) -> Result<Dual, FlowError> {
        if n < 0 && a.v.norm() == 0.0 {
            return Err(FlowError::DivisionByZero);
        }
        let v = a.v.powi(n as i32);
        let d = a.v.powi(n as i32 - 1) * a.d * n as f64;
        Ok(Dual { v, d })
    }
    fn call(&self, name: &str, a: Dual) -> Result<Dual, FlowError> {
        match name {
            "sin" => Ok(Dual { v: a.v.sin(), d: a.v.cos() * a.d }),
            "cos" => Ok(Dual { v: a.v.cos(), d: -a.v.sin() * a.d }),
            "exp" => Ok(Dual { v: a.v.exp(), d: a.v.exp() * a.d }),
            "log" => Ok(Dual { v: a.v.ln(), d: a.d / a.v }),
            _ => Err(FlowError::NotRational(name.into())),
        }
    }
}

/// One row of the catalog.
#[derive(Clone, Debug)]
pub struct FlowEntry {
    pub name: String,
    pub line: usize,
    pub chi: [Expr; 2],
    pub flow: [Expr; 2],
    pub lambda: GaussRat,
    pub sym: [Expr; 2],
    /// Logarithm of a first integral: a Q(i)-combination of logs of
    /// rational functions plus a rational function.
    pub ip: Expr,
    pub profile: Label,
    /// Checks a control entry is expected to fail.
    pub expect_fail: Vec<String>,
}

impl FlowEntry {
    /// Entries with trigonometric terms, verified numerically.
    pub fn is_numeric(&self) -> bool {
        self.flow.iter().any(|e| e.has_call())
    }
}

fn split_pair(src: &str, base: usize) -> Result<[(usize, &str); 2], ParseError> {
    let mut depth = 0i32;
    let mut cut = None;
    for (k, c) in src.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                if cut.is_some() {
                    return Err(ParseError::new(base + k, "expected two components"));
                }
                cut = Some(k);
            }
            _ => {}
        }
    }
    let k = cut.ok_or_else(|| ParseError::new(base + src.len(), "expected two components separated by ','"))?;
    Ok([(base, &src[..k]), (base + k + 1, &src[k + 1..])])
}

fn parse_pair(src: &str, line: usize) -> Result<[Expr; 2], FlowError> {
    let [a, b] = split_pair(src, 0).map_err(|e| FlowError::Syntax(line, e))?;
    let p = |(at, s): (usize, &str)| parse_expr_at(s, at).map_err(|e| FlowError::Syntax(line, e));
    Ok([p(a)?, p(b)?])
}

fn parse_profile(s: &str) -> Option<Label> {
    let k: u8 = s.strip_prefix("Sigma")?.parse().ok()?;
    (k <= 3).then_some(Label::Sigma(k))
}

/// Parses records of `KEY value` lines separated by blank lines. Keys:
/// ENTRY, CHI, FLOW, LAMBDA, SYM, IP, PROFILE and optionally EXPECT.
pub fn parse_catalog(text: &str) -> Result<Vec<FlowEntry>, FlowError> {
    let mut out = Vec::new();
    let mut rec: Vec<(usize, &str, &str)> = Vec::new();
    let lines: Vec<&str> = text.lines().collect();
    for (k, raw) in lines.iter().enumerate().chain(std::iter::once((lines.len(), &""))) {
        let l = raw.split('#').next().unwrap().trim();
        if l.is_empty() {
            if !rec.is_empty() {
                out.push(build_entry(&rec)?);
                rec.clear();
            }
            continue;
        }
        let (key, val) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        rec.push((k + 1, key, val.trim()));
    }
    Ok(out)
}

fn build_entry(rec: &[(usize, &str, &str)]) -> Result<FlowEntry, FlowError> {
    let first = rec[0].0;
    let get = |key: &str| rec.iter().find(|r| r.1 == key).ok_or_else(|| FlowError::Format(first, format!("missing {}", key)));
    for r in rec {
        if !["ENTRY", "CHI", "FLOW", "LAMBDA", "SYM", "IP", "PROFILE", "EXPECT"].contains(&r.1) {
            return Err(FlowError::Format(r.0, format!("unknown field {}", r.1)));
        }
    }
    let name = get("ENTRY")?.2.to_string();
    let (lc, _, chi) = get("CHI")?;
    let (lf, _, flow) = get("FLOW")?;
    let (ll, _, lam) = get("LAMBDA")?;
    let (ls, _, sym) = get("SYM")?;
    let (li, _, ip) = get("IP")?;
    let (lp, _, prof) = get("PROFILE")?;
    let lambda = crate::cli::parse_constant(lam).map_err(|e| FlowError::Format(*ll, e))?;
    let expect_fail = rec.iter().filter(|r| r.1 == "EXPECT").flat_map(|r| r.2.split_whitespace().map(String::from)).collect();
    Ok(FlowEntry {
        name,
        line: first,
        chi: parse_pair(chi, *lc)?,
        flow: parse_pair(flow, *lf)?,
        lambda,
        sym: parse_pair(sym, *ls)?,
        ip: parse_expr_at(ip, 0).map_err(|e| FlowError::Syntax(*li, e))?,
        profile: parse_profile(prof).ok_or_else(|| FlowError::Format(*lp, format!("bad profile '{}'", prof)))?,
        expect_fail,
    })
}

pub fn builtin_catalog() -> Vec<FlowEntry> {
    parse_catalog(CATALOG).expect("builtin flow catalog parses")
}

pub fn builtin_controls() -> Vec<FlowEntry> {
    parse_catalog(CONTROLS).expect("builtin control catalog parses")
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub ok: bool,
    /// False when the check was numeric.
    pub exact: bool,
    pub detail: String,
}

impl Verdict {
    fn exact(ok: bool, detail: impl Into<String>) -> Self {
        Verdict { ok, exact: true, detail: detail.into() }
    }
    fn numeric(ok: bool, detail: impl Into<String>) -> Self {
        Verdict { ok, exact: false, detail: detail.into() }
    }
    fn error(e: FlowError) -> Self {
        Verdict { ok: false, exact: true, detail: e.to_string() }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.exact { "exact" } else { "numeric" };
        if self.detail.is_empty() {
            write!(f, "{} {}", if self.ok { "ok" } else { "FAIL" }, kind)
        } else {
            write!(f, "{} {} ({})", if self.ok { "ok" } else { "FAIL" }, kind, self.detail)
        }
    }
}

fn exact_pair(e: &[Expr; 2]) -> Result<[RatFn; 2], FlowError> {
    Ok([exact(&e[0])?, exact(&e[1])?])
}

/// phi(phi(x, t, u), s, v) = phi(x, t + s, u v) and phi(x, 0, 1) = x.
pub fn verify_group_law(e: &FlowEntry) -> Verdict {
    if e.is_numeric() {
        return numeric_group_law(e, 0x9e11);
    }
    match exact_group_law(e) {
        Ok(v) => v,
        Err(err) => Verdict::error(err),
    }
}

fn identity_subst(t: RatFn, u: RatFn) -> [RatFn; NV] {
    [RatFn::var(X0), RatFn::var(X1), t, u, RatFn::var(S), RatFn::var(V)]
}

fn exact_group_law(e: &FlowEntry) -> Result<Verdict, FlowError> {
    let phi = exact_pair(&e.flow)?;
    let at0 = identity_subst(RatFn::int(0), RatFn::int(1));
    for (k, p) in phi.iter().enumerate() {
        if !p.subst(&at0).same_as(&RatFn::var(k)) {
            return Ok(Verdict::exact(false, format!("component {} is not the identity at t=0", k)));
        }
    }
    let inner = [phi[0].clone(), phi[1].clone(), RatFn::var(S), RatFn::var(V), RatFn::var(S), RatFn::var(V)];
    let joint = identity_subst(RatFn::var(T).add(&RatFn::var(S)), RatFn::var(U).mul(&RatFn::var(V)));
    for (k, p) in phi.iter().enumerate() {
        let lhs = p.subst(&inner);
        let rhs = p.subst(&joint);
        if !lhs.same_as(&rhs) {
            return Ok(Verdict::exact(false, format!("component {} differs", k)));
        }
    }
    Ok(Verdict::exact(true, ""))
}

fn numeric_flow(e: &FlowEntry, x: [Dual; 2], t: Dual) -> Result<[Dual; 2], FlowError> {
    let lam = e.lambda.to_c64();
    let u = Dual { v: (lam * t.v).exp(), d: lam * (lam * t.v).exp() * t.d };
    let vars = [("x0", x[0]), ("x1", x[1]), ("t", t), ("u", u)];
    let ops = DualOps { vars: &vars };
    Ok([e.flow[0].eval(&ops)?, e.flow[1].eval(&ops)?])
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= NUMERIC_TOL * (1.0f64).max(a.norm()).max(b.norm())
}

fn sample_point(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    [0; 2].map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
}

fn numeric_group_law(e: &FlowEntry, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut tries = 0;
    while done < NUMERIC_SAMPLES {
        tries += 1;
        if tries > 50 * NUMERIC_SAMPLES {
            return Verdict::numeric(false, "too few regular samples");
        }
        let x = sample_point(&mut rng).map(Dual::c);
        let t = Dual::c(Complex64::new(rng.gen_range(-0.8..0.8), 0.0));
        let s = Dual::c(Complex64::new(rng.gen_range(-0.8..0.8), 0.0));
        let st = Dual::c(s.v + t.v);
        let (Ok(a), Ok(c)) = (numeric_flow(e, x, t), numeric_flow(e, x, st)) else { continue };
        let Ok(b) = numeric_flow(e, a, s) else { continue };
        let Ok(id) = numeric_flow(e, x, Dual::c(Complex64::new(0.0, 0.0))) else { continue };
        if [a[0], a[1], b[0], b[1], c[0], c[1]].iter().any(|z| !z.v.is_finite() || z.v.norm() > 1e6) {
            continue;
        }
        for k in 0..2 {
            if !close(id[k].v, x[k].v) {
                return Verdict::numeric(false, format!("not the identity at t=0, x={:?}", x.map(|d| d.v)));
            }
            if !close(b[k].v, c[k].v) {
                return Verdict::numeric(false, format!("component {} differs at x={:?}, t={}, s={}", k, x.map(|d| d.v), t.v.re, s.v.re));
            }
        }
        done += 1;
    }
    Verdict::numeric(true, format!("{} samples", NUMERIC_SAMPLES))
}

/// d/dt phi at t = 0, with du/dt = lambda u, equals chi.
pub fn verify_generator(e: &FlowEntry) -> Verdict {
    if e.is_numeric() {
        return numeric_generator(e, 0x9e12);
    }
    let run = || -> Result<Verdict, FlowError> {
        let phi = exact_pair(&e.flow)?;
        let chi = exact_pair(&e.chi)?;
        let lam = RatFn::constant(e.lambda.clone());
        let at0 = identity_subst(RatFn::int(0), RatFn::int(1));
        for k in 0..2 {
            let d = phi[k].partial(T).add(&lam.mul(&RatFn::var(U)).mul(&phi[k].partial(U)));
            if !d.subst(&at0).same_as(&chi[k]) {
                return Ok(Verdict::exact(false, format!("component {} of the derivative differs from the field", k)));
            }
        }
        Ok(Verdict::exact(true, ""))
    };
    run().unwrap_or_else(Verdict::error)
}

fn numeric_generator(e: &FlowEntry, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut tries = 0;
    while done < NUMERIC_SAMPLES {
        tries += 1;
        if tries > 50 * NUMERIC_SAMPLES {
            return Verdict::numeric(false, "too few regular samples");
        }
        let x = sample_point(&mut rng);
        let Ok(d) = numeric_flow(e, x.map(Dual::c), Dual { v: Complex64::new(0.0, 0.0), d: Complex64::new(1.0, 0.0) }) else { continue };
        let vars = [("x0", Dual::c(x[0])), ("x1", Dual::c(x[1]))];
        let ops = DualOps { vars: &vars };
        let (Ok(c0), Ok(c1)) = (e.chi[0].eval(&ops), e.chi[1].eval(&ops)) else { continue };
        for (k, c) in [c0, c1].iter().enumerate() {
            if !close(d[k].d, c.v) {
                return Verdict::numeric(false, format!("component {} differs at x={:?}", k, x));
            }
        }
        done += 1;
    }
    Verdict::numeric(true, format!("{} samples", NUMERIC_SAMPLES))
}

/// [chi, Y] = 0, and chi annihilates the logarithm of the first integral.
pub fn verify_symmetry_and_integral(e: &FlowEntry) -> (Verdict, Verdict) {
    let bracket = || -> Result<Verdict, FlowError> {
        let chi = exact_pair(&e.chi)?;
        let y = exact_pair(&e.sym)?;
        let along = |a: &[RatFn; 2], f: &RatFn| f.partial(X0).mul(&a[0]).add(&f.partial(X1).mul(&a[1]));
        for k in 0..2 {
            let b = along(&chi, &y[k]).sub(&along(&y, &chi[k]));
            if !b.is_zero() {
                return Ok(Verdict::exact(false, format!("component {} of the bracket is {}", k, b.render())));
            }
        }
        // Y may not be a constant multiple of chi; a functional multiple is allowed
        if y[0].is_zero() && y[1].is_zero() {
            return Ok(Verdict::exact(false, "symmetry is zero"));
        }
        let wedge = chi[0].mul(&y[1]).sub(&chi[1].mul(&y[0]));
        if wedge.is_zero() {
            let k = if chi[0].is_zero() { 1 } else { 0 };
            let ratio = y[k].div(&chi[k])?;
            if ratio.partial(X0).is_zero() && ratio.partial(X1).is_zero() {
                return Ok(Verdict::exact(false, "symmetry is a constant multiple of the field"));
            }
        }
        Ok(Verdict::exact(true, ""))
    };
    let integral = || -> Result<Verdict, FlowError> {
        let chi = exact_pair(&e.chi)?;
        let j = e.ip.eval(&JetOps { chi: &chi })?;
        if j.is_poisoned() {
            return Err(FlowError::NonlinearLog);
        }
        if let Some(v) = &j.val {
            if v.num.total_degree().unwrap_or(0) == 0 && v.den.total_degree().unwrap_or(0) == 0 {
                return Ok(Verdict::exact(false, "first integral is constant"));
            }
        }
        if !j.der.is_zero() {
            return Ok(Verdict::exact(false, format!("derivative along the field is {}", j.der.render())));
        }
        Ok(Verdict::exact(true, ""))
    };
    (bracket().unwrap_or_else(Verdict::error), integral().unwrap_or_else(Verdict::error))
}

/// The second component of the flow is a Möbius function of x1 alone, so
/// the pencil x1 = const is preserved.
pub fn verify_fibration(e: &FlowEntry) -> Verdict {
    let run = || -> Result<Verdict, FlowError> {
        let p = exact(&e.flow[1])?;
        let only_x1 = |m: &MPoly| m.degree_in(X0) == 0 && m.degree_in(X1) <= 1;
        let ok = only_x1(&p.num) && only_x1(&p.den);
        Ok(Verdict::exact(ok, if ok { "" } else { "second component is not a Möbius function of x1" }))
    };
    run().unwrap_or_else(Verdict::error)
}

/// Free exact values standing for (t, e^{λt}, sin, cos) at one sample.
#[derive(Clone, Debug)]
pub struct ProfileSample {
    pub t: GaussRat,
    pub u: GaussRat,
    pub sin: GaussRat,
    pub cos: GaussRat,
}

impl fmt::Display for ProfileSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} u={} sin={} cos={}", self.t, self.u, self.sin, self.cos)
    }
}

pub fn default_samples() -> Vec<ProfileSample> {
    let g = GaussRat::from_frac;
    vec![
        ProfileSample { t: g(2, 1), u: g(3, 1), sin: g(3, 5), cos: g(4, 5) },
        ProfileSample { t: g(-1, 2), u: g(5, 7), sin: g(5, 13), cos: g(-12, 13) },
    ]
}

/// Homogenizes the time-t map at a sample and classifies it.
pub fn time_map(e: &FlowEntry, smp: &ProfileSample) -> Result<RatMap, FlowError> {
    let mut vars = base_vars();
    vars[T].1 = RatFn::constant(smp.t.clone());
    vars[U].1 = RatFn::constant(smp.u.clone());
    let calls = [("sin", smp.sin.clone()), ("cos", smp.cos.clone())];
    let ops = RatOps { vars: &vars, calls: &calls };
    let p = [e.flow[0].eval(&ops)?, e.flow[1].eval(&ops)?];
    let comps = [&p[0].num * &p[1].den, &p[1].num * &p[0].den, &p[0].den * &p[1].den];
    let d = comps.iter().filter_map(|c| c.total_degree()).max().unwrap_or(0);
    let hom = |m: &MPoly| -> HPoly {
        HPoly::from_terms(m.terms().map(|(e, c)| ([e[X0], e[X1], d - e[X0] - e[X1]], c.clone()))).expect("homogeneous by construction")
    };
    let map = RatMap::new([hom(&comps[0]), hom(&comps[1]), hom(&comps[2])]).map_err(|_| FlowError::DivisionByZero)?;
    Ok(map.reduce())
}

#[derive(Clone, Debug)]
pub struct ProfileObservation {
    pub sample: ProfileSample,
    pub degree: u32,
    pub label: Label,
}

pub fn stratum_profile(e: &FlowEntry, samples: &[ProfileSample], cfg: &NumConfig) -> Result<Vec<ProfileObservation>, FlowError> {
    samples
        .iter()
        .map(|smp| {
            let m = time_map(e, smp)?;
            let label = match m.degree() {
                1 => Label::Sigma(0),
                2 => classify_quadratic(&m, cfg).map(|r| r.label).unwrap_or(Label::Unmatched),
                _ => Label::NotBirational,
            };
            Ok(ProfileObservation { sample: smp.clone(), degree: m.degree(), label })
        })
        .collect()
}

/// All checks of one entry.
#[derive(Clone, Debug)]
pub struct FlowReport {
    pub name: String,
    pub group_law: Verdict,
    pub generator: Verdict,
    pub symmetry: Verdict,
    pub integral: Verdict,
    pub fibration: Verdict,
    pub profile: Vec<ProfileObservation>,
    pub profile_ok: bool,
}

impl FlowReport {
    pub fn verdicts(&self) -> [(&'static str, &Verdict); 5] {
        [
            ("group_law", &self.group_law),
            ("generator", &self.generator),
            ("symmetry", &self.symmetry),
            ("integral", &self.integral),
            ("fibration", &self.fibration),
        ]
    }

    pub fn passed(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| v.ok) && self.profile_ok
    }

    /// For a control entry: every expected failure occurs.
    pub fn fails_as_expected(&self, entry: &FlowEntry) -> bool {
        !entry.expect_fail.is_empty()
            && entry.expect_fail.iter().all(|k| self.verdicts().iter().any(|(n, v)| n == k && !v.ok))
    }
}

pub fn verify_entry(e: &FlowEntry, cfg: &NumConfig) -> FlowReport {
    let (symmetry, integral) = verify_symmetry_and_integral(e);
    let (profile, profile_ok) = match stratum_profile(e, &default_samples(), cfg) {
        Ok(p) => {
            let ok = p.iter().all(|o| o.label == e.profile);
            (p, ok)
        }
        Err(_) => (Vec::new(), false),
    };
    FlowReport {
        name: e.name.clone(),
        group_law: verify_group_law(e),
        generator: verify_generator(e),
        symmetry,
        integral,
        fibration: verify_fibration(e),
        profile,
        profile_ok,
    }
}

/// Verifies entries in parallel, keeping catalog order.
pub fn verify_catalog(entries: &[FlowEntry], cfg: &NumConfig) -> Vec<FlowReport> {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4).min(entries.len().max(1));
    let mut slots: Vec<Option<FlowReport>> = vec![None; entries.len()];
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|sc| {
        for _ in 0..workers {
            sc.spawn(|| loop {
                let k = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if k >= entries.len() {
                    break;
                }
                let r = verify_entry(&entries[k], cfg);
                results.lock().unwrap()[k] = Some(r);
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every entry verified")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(name: &str) -> FlowEntry {
        builtin_catalog().into_iter().find(|e| e.name == name).unwrap()
    }

    #[test]
    fn ratfn_substitution_matches_direct_evaluation() {
        let x = RatFn::var(X0);
        let y = RatFn::var(X1);
        let f = x.mul(&y).div(&y.sub(&RatFn::var(T).mul(&x))).unwrap();
        let g = [y.clone(), x.add(&RatFn::int(1)), RatFn::int(2), RatFn::var(U), RatFn::var(S), RatFn::var(V)];
        let h = f.subst(&g);
        let pt = [3, 5, 7, 11, 13, 17].map(GaussRat::from_int);
        let direct = {
            let gv: [GaussRat; NV] = std::array::from_fn(|i| g[i].eval(&pt).unwrap());
            f.eval(&gv).unwrap()
        };
        assert_eq!(h.eval(&pt).unwrap(), direct);
    }

    #[test]
    fn rational_flow_of_x0_squared_over_x1() {
        let e = entry("sigma2_x0sq_over_x1");
        assert!(verify_group_law(&e).ok);
        assert!(verify_generator(&e).ok);
        let (b, i) = verify_symmetry_and_integral(&e);
        assert!(b.ok && i.ok);
    }

    #[test]
    fn generator_of_a_linear_flow() {
        let e = parse_catalog("ENTRY lin\nCHI x0, 0\nFLOW x0*u, x1\nLAMBDA 1\nSYM 0, 1\nIP log(x1)\nPROFILE Sigma0\n").unwrap().remove(0);
        assert!(verify_generator(&e).ok);
        assert!(verify_group_law(&e).ok);
    }

    #[test]
    fn log_must_be_linear() {
        let e = parse_catalog("ENTRY bad\nCHI x0, 0\nFLOW x0*u, x1\nLAMBDA 1\nSYM 0, 1\nIP log(x1)*log(x1)\nPROFILE Sigma0\n").unwrap().remove(0);
        let (_, i) = verify_symmetry_and_integral(&e);
        assert!(!i.ok);
    }

    #[test]
    fn identity_time_map_is_linear() {
        let e = entry("sigma2_x0sq_over_x1");
        let smp = ProfileSample { t: GaussRat::zero(), u: GaussRat::one(), sin: GaussRat::zero(), cos: GaussRat::one() };
        let obs = stratum_profile(&e, &[smp], &NumConfig::default()).unwrap();
        assert_eq!(obs[0].label, Label::Sigma(0));
    }
}
