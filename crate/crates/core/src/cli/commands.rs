//! Subcommand implementations. Each returns an [`Outcome`] holding both
//! output formats; the binary only chooses one and writes it.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use thiserror::Error;

use super::record::{fmt_c64, fmt_f64, Block, Record};
use super::InputError;
use crate::birat::{self, AncStatus, BiratError, Label};
use crate::cubic::{self, CorpusIndex, CubicError};
use crate::dynamics::{self, DynError, Image, RenderMode, RenderParams};
use crate::flows::{self, FlowError};
use crate::foliation::{self, FoliationError};
use crate::polycore::{CPoint, GaussRat, NumConfig};
use crate::ratmap::RatMap;

#[derive(Debug, Error)]
pub enum CmdError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Birat(#[from] BiratError),
    #[error(transparent)]
    Cubic(#[from] CubicError),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error(transparent)]
    Dynamics(#[from] DynError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{0}: {1}")]
    Io(PathBuf, String),
    #[error("{0}")]
    Usage(String),
}

/// Settings shared by all subcommands.
#[derive(Clone, Debug)]
pub struct Options {
    pub horizon: usize,
    /// Acceptance tolerance for numeric verifications.
    pub tolerance: f64,
    pub seed: u64,
    /// Directory holding corpus and catalog files; built-in copies otherwise.
    pub data: Option<PathBuf>,
}

impl Default for Options {
    fn default() -> Self {
        Options { horizon: 10, tolerance: 1e-6, seed: NumConfig::default().seed, data: None }
    }
}

impl Options {
    pub fn num_config(&self) -> NumConfig {
        NumConfig { seed: self.seed, ..NumConfig::default() }
    }

    fn read_data(&self, name: &str) -> Result<Option<String>, CmdError> {
        match &self.data {
            None => Ok(None),
            Some(dir) => {
                let p = dir.join(name);
                std::fs::read_to_string(&p).map(Some).map_err(|e| CmdError::Io(p, e.to_string()))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A verification ran and did not hold.
    Failed,
}

impl Status {
    fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Ok
        } else {
            Status::Failed
        }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub record: Record,
    pub text: String,
    pub status: Status,
}

impl Outcome {
    fn new(record: Record, text: String, status: Status) -> Outcome {
        Outcome { record, text, status }
    }
}

fn point_text(exact: &Option<[GaussRat; 3]>, p: &CPoint) -> String {
    match exact {
        Some(e) => format!("({}:{}:{})", e[0], e[1], e[2]),
        None => p.to_string(),
    }
}

/// Block fields printed as `key=value` lines for the text format.
fn block_text(b: &Block) -> String {
    let mut s = String::new();
    for (k, v) in &b.fields {
        s.push_str(&format!("{}={}\n", k, v));
    }
    s
}

fn put_map(b: &mut Block, f: &RatMap) {
    b.put("map", f).put("degree", f.degree());
}

pub fn cmd_classify(raw: &RatMap, opt: &Options) -> Result<Outcome, CmdError> {
    let cfg = opt.num_config();
    let mut rec = Record::new();
    let mut text;
    match raw.degree() {
        2 => {
            let rep = birat::classify_quadratic(raw, &cfg)?;
            let fixed = if rep.label == Label::NotBirational { Vec::new() } else { birat::fixed_points(raw, &cfg).unwrap_or_default() };
            let b = rec.block("classify");
            put_map(b, &raw.reduce());
            b.put("stratum", &rep.label);
            if let Some(e) = rep.e {
                b.put("e", e);
            }
            if let Some(r) = rep.rank_m {
                b.put("rank_m", r);
            }
            b.put("ind_points", rep.ind.len()).put("exc_components", rep.exc.len()).put("fixed_points", fixed.len());
            text = block_text(b);
            for p in &rep.ind {
                let b = rec.block("ind");
                b.put("point", point_text(&p.exact, &p.point)).put("order", p.order).put("multiplicity", p.multiplicity);
                text.push_str(&format!("ind {} order={}\n", point_text(&p.exact, &p.point), p.order));
            }
            for c in &rep.exc {
                let b = rec.block("exc");
                let curve = c.exact.as_ref().map(|h| h.to_string()).unwrap_or_else(|| c.numeric.to_string());
                b.put("curve", &curve).put("contracted", c.contracted);
                if let Some(p) = &c.image {
                    b.put("image", point_text(&c.image_exact, p));
                }
                text.push_str(&format!("exc {} contracted={}\n", curve, c.contracted));
            }
            for z in &fixed {
                rec.block("fixed").put("point", point_text(&z.exact, &z.point)).put("multiplicity", z.multiplicity);
                text.push_str(&format!("fixed {}\n", point_text(&z.exact, &z.point)));
            }
        }
        3 => return cmd_cubic(raw, opt),
        1 => {
            let b = rec.block("classify");
            put_map(b, raw);
            b.put("stratum", Label::Sigma(0));
            text = block_text(b);
        }
        d => return Err(CmdError::Usage(format!("classify expects a map of degree 1, 2 or 3, got {}", d))),
    }
    Ok(Outcome::new(rec, text, Status::Ok))
}

pub fn cmd_invert(f: &RatMap, _opt: &Options) -> Result<Outcome, CmdError> {
    let g = birat::inverse(f)?;
    let ok = cubic::verify_inverse_pair(f, &g);
    let mut rec = Record::new();
    let b = rec.block("invert");
    put_map(b, &f.reduce());
    b.put("inverse", &g).put("inverse_degree", g.degree()).put("verified", ok);
    let text = format!("{}\n", g);
    Ok(Outcome::new(rec, text, Status::from_bool(ok)))
}

pub fn cmd_degrees(f: &RatMap, opt: &Options) -> Result<Outcome, CmdError> {
    let seq = dynamics::degree_sequence(f, opt.horizon)?;
    let degs: Vec<String> = seq.degrees.iter().map(|d| d.to_string()).collect();
    let est: Vec<String> = seq.degrees.iter().enumerate().map(|(k, &d)| fmt_f64((d as f64).powf(1.0 / (k + 1) as f64))).collect();
    let mut rec = Record::new();
    let b = rec.block("degrees");
    put_map(b, &f.reduce());
    b.put("horizon", opt.horizon).put("degrees", degs.join(" "));
    b.put("stable_horizon", seq.stable_horizon.map(|n| n.to_string()).unwrap_or_else(|| "none".into()));
    b.put("truncated", seq.truncated).put("root_estimates", est.join(" "));
    Ok(Outcome::new(rec, format!("{}\n", degs.join(" ")), Status::Ok))
}

pub fn cmd_indpoints(f: &RatMap, opt: &Options) -> Result<Outcome, CmdError> {
    let rep = birat::ind_points(f, &opt.num_config())?;
    let anc = match rep.anc {
        AncStatus::Holds => "holds",
        AncStatus::Fails => "fails",
        AncStatus::Improper => "improper",
    };
    let mut rec = Record::new();
    let b = rec.block("indpoints");
    put_map(b, &f.reduce());
    b.put("count", rep.points.len()).put("sum_mu", rep.sum_mu).put("sum_mu2", rep.sum_mu2).put("base_point_equations", anc);
    let mut text = block_text(b);
    for p in &rep.points {
        rec.block("ind")
            .put("point", point_text(&p.exact, &p.point))
            .put("order", p.order)
            .put("multiplicity", p.multiplicity);
        text.push_str(&format!("ind {} order={} multiplicity={}\n", point_text(&p.exact, &p.point), p.order, p.multiplicity));
    }
    Ok(Outcome::new(rec, text, Status::from_bool(rep.anc != AncStatus::Fails)))
}

fn near(z: Complex64, target: f64, tol: f64) -> bool {
    (z - Complex64::new(target, 0.0)).norm() <= tol
}

pub fn cmd_guillot(f: &RatMap, opt: &Options) -> Result<Outcome, CmdError> {
    let (s1, s2) = foliation::guillot_sums(f, &opt.num_config())?;
    let ok = near(s1, -4.0, opt.tolerance) && near(s2, 1.0, opt.tolerance);
    let mut rec = Record::new();
    let b = rec.block("guillot");
    put_map(b, &f.reduce());
    b.put("s1", fmt_c64(s1)).put("s2", fmt_c64(s2)).put("tolerance", fmt_f64(opt.tolerance)).put("holds", ok);
    let text = block_text(b);
    Ok(Outcome::new(rec, text, Status::from_bool(ok)))
}

pub fn cmd_bb(f: &RatMap, opt: &Options) -> Result<Outcome, CmdError> {
    let cfg = opt.num_config();
    let fol = foliation::foliation_of(f)?;
    let sum = foliation::baum_bott_sum(f, &cfg)?;
    let expected = ((fol.degree + 2) * (fol.degree + 2)) as f64;
    let ok = near(sum, expected, opt.tolerance);
    let mut rec = Record::new();
    let b = rec.block("baum_bott");
    put_map(b, &f.reduce());
    b.put("foliation_degree", fol.degree)
        .put("sum", fmt_c64(sum))
        .put("expected", expected)
        .put("tolerance", fmt_f64(opt.tolerance))
        .put("holds", ok);
    let text = block_text(b);
    Ok(Outcome::new(rec, text, Status::from_bool(ok)))
}

fn corpus(opt: &Options) -> Result<Option<CorpusIndex>, CmdError> {
    match opt.read_data("cubic_models.txt")? {
        Some(t) => Ok(Some(CorpusIndex::build(&t, &opt.num_config())?)),
        None => Ok(None),
    }
}

pub fn cmd_cubic(f: &RatMap, opt: &Options) -> Result<Outcome, CmdError> {
    let cfg = opt.num_config();
    let conf = match corpus(opt)? {
        Some(idx) => cubic::classify_cubic_with(&idx, f, &cfg)?,
        None => cubic::classify_cubic(f, &cfg)?,
    };
    let mut rec = Record::new();
    let b = rec.block("cubic");
    put_map(b, &f.reduce());
    b.put("config", &conf.label)
        .put("components", conf.components.len())
        .put("ind_points", conf.ind.len())
        .put("signature", &conf.signature);
    let mut text = format!("config={}\ncomponents={}\n", conf.label, conf.components.len());
    for c in &conf.components {
        let curve = c.exact.as_ref().map(|h| h.to_string()).unwrap_or_else(|| c.numeric.to_string());
        rec.block("exc").put("curve", &curve).put("multiplicity", c.mult).put("contracted", c.contracted);
        text.push_str(&format!("exc {} multiplicity={}\n", curve, c.mult));
    }
    for p in &conf.ind {
        rec.block("ind").put("point", point_text(&p.exact, &p.point)).put("order", p.order);
    }
    Ok(Outcome::new(rec, text, Status::Ok))
}

/// Verifies the flow catalog, and with `controls` the corrupted entries,
/// which must fail their expected checks.
pub fn cmd_flow_verify(controls: bool, opt: &Options) -> Result<Outcome, CmdError> {
    let cfg = opt.num_config();
    let entries = match opt.read_data("flows.txt")? {
        Some(t) => flows::parse_catalog(&t)?,
        None => flows::builtin_catalog(),
    };
    let ctrl = if controls {
        match opt.read_data("flow_controls.txt")? {
            Some(t) => flows::parse_catalog(&t)?,
            None => flows::builtin_controls(),
        }
    } else {
        Vec::new()
    };
    let reports = flows::verify_catalog(&entries, &cfg);
    let ctrl_reports = flows::verify_catalog(&ctrl, &cfg);
    let mut rec = Record::new();
    let mut text = String::new();
    let passed = reports.iter().filter(|r| r.passed()).count();
    let rejected = ctrl.iter().zip(&ctrl_reports).filter(|(e, r)| r.fails_as_expected(e)).count();
    let b = rec.block("flow_verify");
    b.put("entries", entries.len()).put("passed", passed);
    if controls {
        b.put("controls", ctrl.len()).put("controls_rejected", rejected);
    }
    for (e, r) in entries.iter().zip(&reports).chain(ctrl.iter().zip(&ctrl_reports)) {
        let control = !e.expect_fail.is_empty();
        let b = rec.block(if control { "control" } else { "flow" });
        b.put("name", &e.name).put("line", e.line);
        for (k, v) in r.verdicts() {
            b.put(k, v);
        }
        let prof: Vec<String> = r.profile.iter().map(|o| o.label.to_string()).collect();
        b.put("profile", prof.join(" ")).put("declared_profile", &e.profile);
        let ok = if control { r.fails_as_expected(e) } else { r.passed() };
        b.put("result", if ok { "ok" } else { "FAIL" });
        text.push_str(&format!("{} {}\n", if ok { "ok  " } else { "FAIL" }, e.name));
    }
    text.push_str(&format!("{}/{} entries verified", passed, entries.len()));
    if controls {
        text.push_str(&format!(", {}/{} controls rejected", rejected, ctrl.len()));
    }
    text.push('\n');
    let ok = passed == entries.len() && rejected == ctrl.len();
    Ok(Outcome::new(rec, text, Status::from_bool(ok)))
}

/// Renders to `out` as a binary pixmap; the record describes the image.
pub fn cmd_render(f: &RatMap, params: &RenderParams, out: &Path) -> Result<(Outcome, Image), CmdError> {
    let img = dynamics::render(f, params)?;
    std::fs::write(out, img.to_p6()).map_err(|e| CmdError::Io(out.to_path_buf(), e.to_string()))?;
    let mut rec = Record::new();
    let b = rec.block("render");
    put_map(b, &f.reduce());
    let (x0, x1, y0, y1) = params.window;
    b.put("width", img.width)
        .put("height", img.height)
        .put("mode", if params.mode == RenderMode::Escape { "escape" } else { "orbit" })
        .put("window", [x0, x1, y0, y1].map(fmt_f64).join(" "))
        .put("max_iter", params.max_iter)
        .put("escape_radius", fmt_f64(params.escape_radius))
        .put("seed", params.seed)
        .put("interior_pixels", img.count(dynamics::INTERIOR))
        .put("output", out.display());
    let text = block_text(b);
    Ok((Outcome::new(rec, text, Status::Ok), img))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::parse_map_raw;

    fn m(s: &str) -> RatMap {
        parse_map_raw(s).unwrap()
    }

    #[test]
    fn classify_sigma() {
        let o = cmd_classify(&m("[x1*x2:x0*x2:x0*x1]"), &Options::default()).unwrap();
        let b = o.record.first("classify").unwrap();
        assert_eq!(b.get("stratum"), Some("Sigma3"));
        assert_eq!(b.get("ind_points"), Some("3"));
        assert_eq!(b.get("fixed_points"), Some("4"));
        assert!(o.text.contains("stratum=Sigma3\n"));
    }

    #[test]
    fn degrees_text() {
        let f = m("[(2*x0 + x1)*x2 : 3*x1*(x0 + x2) : x2*(x0 + x2)]");
        let o = cmd_degrees(&f, &Options { horizon: 7, ..Options::default() }).unwrap();
        assert_eq!(o.text, "2 2 3 3 4 4 5\n");
    }

    #[test]
    fn invert_and_verify() {
        let o = cmd_invert(&m("[x0*x1 : x2^2 : x1*x2]"), &Options::default()).unwrap();
        assert_eq!(o.status, Status::Ok);
        assert_eq!(o.record.first("invert").unwrap().get("inverse_degree"), Some("2"));
    }

    #[test]
    fn missing_data_dir_is_reported() {
        let opt = Options { data: Some(PathBuf::from("/nonexistent-dir")), ..Options::default() };
        assert!(matches!(cmd_flow_verify(false, &opt), Err(CmdError::Io(..))));
    }
}
