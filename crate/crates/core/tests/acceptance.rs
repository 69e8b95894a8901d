//! One PASS/FAIL line per acceptance criterion. Runs without the test
//! harness; the process fails if any criterion fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cremona::birat::{self, AncStatus, Label, Mat3};
use cremona::cli::parse_map;
use cremona::cubic::{self, IdentityKind};
use cremona::dynamics::{self, RenderMode, RenderParams};
use cremona::flows;
use cremona::foliation;
use cremona::polycore::linalg;
use cremona::polycore::{GaussRat, HPoly, NumConfig};
use cremona::ratmap::RatMap;

const SEED: u64 = 20_240_601;
const HENON: &str = "[x1*x2 : x1^2 - x0*x2/2 - x2^2 : x2^2]";

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn g(n: i64) -> GaussRat {
    GaussRat::from_int(n)
}

fn x(i: usize) -> HPoly {
    HPoly::var(i)
}

fn cfg() -> NumConfig {
    NumConfig::default()
}

fn random_matrix(rng: &mut ChaCha8Rng, r: i64) -> Mat3 {
    [0, 1, 2].map(|_| [0, 1, 2].map(|_| g(rng.gen_range(-r..=r))))
}

fn random_invertible(rng: &mut ChaCha8Rng, r: i64) -> Mat3 {
    loop {
        let m = random_matrix(rng, r);
        if !linalg::det(&linalg::from_array3(&m)).is_zero() {
            return m;
        }
    }
}

fn random_quadratic(rng: &mut ChaCha8Rng) -> RatMap {
    let monos: [[u32; 3]; 6] = [[2, 0, 0], [0, 2, 0], [0, 0, 2], [1, 1, 0], [1, 0, 1], [0, 1, 1]];
    loop {
        let comps = [0, 1, 2].map(|_| HPoly::from_terms(monos.iter().map(|e| (*e, g(rng.gen_range(-6..=6))))).unwrap());
        if let Ok(f) = RatMap::new(comps) {
            if f.degree() == 2 && f.reduce().degree() == 2 && !f.det_jacobian().is_zero() {
                return f;
            }
        }
    }
}

fn birationality() -> Outcome {
    let ranks = [RatMap::sigma(), RatMap::rho(), RatMap::from_comps([&x(0) * &x(0), &x(1) * &x(1), &x(2) * &x(2)]).unwrap()]
        .map(|f| birat::rank_m(&f).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut corpus: Vec<(RatMap, bool)> = Vec::new();
    while corpus.len() < 25 {
        let (l, lp) = (random_matrix(&mut rng, 4), random_matrix(&mut rng, 4));
        if let Ok(q) = birat::wedge_construct(&l, &lp) {
            if q.degree() == 2 && !q.det_jacobian().is_zero() {
                corpus.push((q, true));
            }
        }
    }
    while corpus.len() < 50 {
        corpus.push((random_quadratic(&mut rng), false));
    }
    let mut agree = 0;
    let mut expected = 0;
    for (q, bir) in &corpus {
        if let Ok(w) = birat::is_birational_quadratic(q, &cfg()) {
            agree += w.agree() as usize;
            expected += (w.birational == *bir) as usize;
        }
    }
    let ok = ranks == [7, 7, 9] && agree == 50 && expected == 50;
    outcome(ok, format!("ranks {:?}; rank and contraction criteria agree on {}/50; expected answer on {}/50", ranks, agree, expected))
}

fn strata() -> Outcome {
    let id2 = RatMap::new([&x(0) * &x(0), &x(0) * &x(1), &x(0) * &x(2)]).unwrap();
    let cases = [(RatMap::sigma(), 3, 2), (RatMap::rho(), 2, 2), (RatMap::tau(), 1, 2), (id2, 0, 3)];
    let mut got = Vec::new();
    let mut ok = true;
    for (f, k, e) in &cases {
        let r = birat::classify_quadratic(f, &cfg()).unwrap();
        ok &= r.label == Label::Sigma(*k) && r.e == Some(*e);
        got.push(format!("{}/e={}", r.label, r.e.map(|v| v.to_string()).unwrap_or_default()));
    }
    outcome(ok, got.join(" "))
}

fn guillot() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut maps = vec![RatMap::sigma()];
    while maps.len() < 11 {
        let a = RatMap::linear(&random_invertible(&mut rng, 5)).unwrap();
        let f = a.compose(&RatMap::sigma()).unwrap();
        match birat::fixed_points(&f, &cfg()) {
            Ok(fx) if fx.len() == 4 && fx.iter().all(|z| z.multiplicity == 1) => maps.push(f),
            _ => {}
        }
    }
    let mut worst = 0.0f64;
    for f in &maps {
        match foliation::guillot_sums(f, &cfg()) {
            Ok((s1, s2)) => worst = worst.max((s1 + 4.0).norm()).max((s2 - 1.0).norm()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    outcome(worst <= 1e-8, format!("sigma and 10 seeded A sigma: max deviation {:.1e}", worst))
}

fn baum_bott() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut maps = vec![RatMap::sigma()];
    while maps.len() < 11 {
        let f = random_quadratic(&mut rng);
        let Ok(fol) = foliation::foliation_of(&f) else { continue };
        if fol.degree != 2 {
            continue;
        }
        match foliation::singular_points(&fol, &f, &cfg()) {
            Ok(p) if p.len() == 7 && p.iter().all(|s| s.multiplicity == 1) => maps.push(f),
            _ => {}
        }
    }
    let mut worst = 0.0f64;
    for f in &maps {
        match foliation::baum_bott_sum(f, &cfg()) {
            Ok(s) => worst = worst.max((s - Complex64::new(16.0, 0.0)).norm()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    outcome(worst <= 1e-6, format!("sigma and 10 seeded quadratics: max |sum - 16| {:.1e}", worst))
}

fn fiber() -> Outcome {
    let s = RatMap::sigma();
    let with = |l: HPoly| RatMap::from_comps([0, 1, 2].map(|i| &s.comps()[i] + &(&l * &x(i)))).unwrap();
    let lin = |a: i64, b: i64, c: i64| HPoly::linear(&[g(a), g(b), g(c)]);
    let expected = [s.clone(), with(lin(1, 1, 1)), with(lin(1, -1, -1)), with(lin(-1, -1, 1)), with(lin(-1, 1, -1))];
    let maps = foliation::foliation_fiber_sigma(&cfg()).unwrap();
    let matched = expected.iter().filter(|q| maps.contains(q)).count();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let pts: Vec<[GaussRat; 3]> = (0..7).map(|_| [0, 1, 2].map(|_| g(rng.gen_range(-9..=9)))).collect();
    let count = foliation::foliation_through_points(&pts).and_then(|fol| foliation::count_preimages(&fol, &cfg()));
    let ok = maps.len() == 5 && matched == 5 && count.as_ref().ok() == Some(&35);
    outcome(ok, format!("fiber of F(sigma) has {} maps, {} match the known list; generic preimage count {:?}", maps.len(), matched, count))
}

fn degrees() -> Outcome {
    let f23 = parse_map("[(2*x0 + x1)*x2 : 3*x1*(x0 + x2) : x2*(x0 + x2)]").unwrap();
    let pos = RatMap::linear_int([[1, 2, 3], [4, 1, 2], [2, 5, 1]]).unwrap().compose(&RatMap::sigma()).unwrap();
    let a = dynamics::degree_sequence(&f23, 7).unwrap().degrees;
    let b = dynamics::degree_sequence(&pos, 4).unwrap().degrees;
    let c = dynamics::degree_sequence(&RatMap::sigma(), 4).unwrap().degrees;
    let ok = a == [2, 2, 3, 3, 4, 4, 5] && b == [2, 4, 8, 16] && c == [2, 1, 2, 1];
    outcome(ok, format!("f23 {:?}, positive A sigma {:?}, sigma {:?}", a, b, c))
}

fn identities() -> Outcome {
    let ids = cubic::parse_identities(cubic::IDENTITIES).unwrap();
    let results = cubic::verify_identities(&ids);
    let held = results.iter().filter(|(_, ok)| *ok).count();
    let failed: Vec<&str> = results.iter().filter(|(_, ok)| !*ok).map(|(n, _)| n.as_str()).collect();
    let named = |n: &str| results.iter().any(|(m, ok)| m == n && *ok);
    let inverses = ids.iter().filter(|i| matches!(i.kind, IdentityKind::Inverse { .. })).count();
    let conjugations = ids.iter().filter(|i| i.name.starts_with('c') && i.name[1..2].parse::<u8>().is_ok()).count();
    let iso = cubic::rho_isotropy_samples(SEED, 5);
    let iso_ok = iso.iter().filter(|p| cubic::rho_isotropy_holds(&p[0], &p[1], &p[2], &p[3])).count();
    let ok = failed.is_empty() && named("rho_noether") && named("tau_noether") && inverses >= 2 && conjugations >= 10 && iso_ok == 5;
    let mut d = format!(
        "{}/{} identities ({} inverse pairs, {} conjugation identities), isotropy {}/5",
        held,
        results.len(),
        inverses,
        conjugations,
        iso_ok
    );
    if !failed.is_empty() {
        d.push_str(&format!("; failed: {}", failed.join(", ")));
    }
    outcome(ok, d)
}

fn cubic_classifier() -> Outcome {
    let index = cubic::builtin_corpus();
    let mut labelled = 0;
    let mut inverse_ok = 0;
    let mut inverse_err = Vec::new();
    for m in &index.models {
        if cubic::classify_cubic(&m.map, &cfg()).map(|c| c.label == m.label).unwrap_or(false) {
            labelled += 1;
        }
        let counts = birat::inverse(&m.map).map_err(|e| e.to_string()).and_then(|inv| {
            let a = cubic::exc_configuration(&m.map, &cfg()).map_err(|e| e.to_string())?;
            let b = birat::exc_components(&inv, &cfg()).map_err(|e| e.to_string())?;
            Ok((a.components.len(), b.len()))
        });
        match counts {
            Ok((a, b)) if a == b => inverse_ok += 1,
            Ok((a, b)) => inverse_err.push(format!("line {}: {} vs {}", m.line, a, b)),
            Err(e) => inverse_err.push(format!("line {}: {}", m.line, e)),
        }
    }
    let pairs = cubic::parse_identities(cubic::IDENTITIES).unwrap();
    let mut pair_total = 0;
    let mut pair_ok = 0;
    for id in &pairs {
        if let IdentityKind::Inverse { f, g } = &id.kind {
            pair_total += 1;
            let a = birat::exc_components(f, &cfg()).map(|c| c.len());
            let b = birat::exc_components(g, &cfg()).map(|c| c.len());
            pair_ok += matches!((a, b), (Ok(p), Ok(q)) if p == q) as usize;
        }
    }
    let n = index.models.len();
    let ok = labelled == n && index.separated() && inverse_ok == n && pair_ok == pair_total;
    let mut d = format!(
        "{}/{} canonical models labelled, signatures separated: {}, Exc counts agree for {}/{} model inverses and {}/{} encoded pairs",
        labelled,
        n,
        index.separated(),
        inverse_ok,
        n,
        pair_ok,
        pair_total
    );
    if !inverse_err.is_empty() {
        d.push_str(&format!("; {}", inverse_err.join("; ")));
    }
    outcome(ok, d)
}

fn flow_catalog() -> Outcome {
    let entries = flows::builtin_catalog();
    let controls = flows::builtin_controls();
    let reports = flows::verify_catalog(&entries, &cfg());
    let creports = flows::verify_catalog(&controls, &cfg());
    let passed = reports.iter().filter(|r| r.passed()).count();
    let numeric = entries.iter().filter(|e| e.is_numeric()).count();
    let rejected = controls.iter().zip(&creports).filter(|(e, r)| r.fails_as_expected(e)).count();
    let failing: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    let ok = passed == entries.len() && rejected == controls.len() && controls.len() == 3;
    let mut d = format!("{}/{} entries ({} numeric), {}/{} controls rejected", passed, entries.len(), numeric, rejected, controls.len());
    if !failing.is_empty() {
        d.push_str(&format!("; failing: {}", failing.join(", ")));
    }
    outcome(ok, d)
}

fn base_points() -> Outcome {
    let s = birat::ind_points(&RatMap::sigma(), &cfg()).unwrap();
    let model = cubic::builtin_corpus().models.iter().find(|m| m.label == Label::Config(15)).expect("a {15} model");
    let c = birat::ind_points(&model.map, &cfg()).unwrap();
    let mut orders: Vec<u32> = c.points.iter().map(|p| p.order).collect();
    orders.sort_unstable_by(|a, b| b.cmp(a));
    let ok = s.anc == AncStatus::Holds && (s.sum_mu, s.sum_mu2) == (3, 3) && c.anc == AncStatus::Holds && (c.sum_mu, c.sum_mu2) == (6, 8) && orders == [2, 1, 1, 1, 1];
    outcome(ok, format!("sigma: sums ({}, {}); {{15}} cubic: sums ({}, {}), orders {:?}", s.sum_mu, s.sum_mu2, c.sum_mu, c.sum_mu2, orders))
}

fn rendering() -> Outcome {
    let f = parse_map(HENON).unwrap();
    let p = RenderParams { width: 512, height: 512, window: (-3.0, 3.0, -3.0, 3.0), mode: RenderMode::Escape, max_iter: 100, escape_radius: 1e6, seed: SEED, ..RenderParams::default() };
    let t = Instant::now();
    let a = dynamics::render(&f, &p).unwrap();
    let elapsed = t.elapsed();
    let b = dynamics::render(&f, &p).unwrap();
    let c = dynamics::render(&f, &RenderParams { escape_radius: 1e7, ..p.clone() }).unwrap();
    let same = a.rgb.chunks(3).zip(c.rgb.chunks(3)).filter(|(u, v)| u == v).count();
    let frac = same as f64 / (512.0 * 512.0);
    let ok = a == b && frac > 0.99 && elapsed < Duration::from_secs(10);
    outcome(ok, format!("deterministic: {}, unchanged under radius 1e6 -> 1e7: {:.4}%, 512x512 in {:.2?}", a == b, 100.0 * frac, elapsed))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 11] = [
        ("birationality criterion", birationality, Some(Duration::from_secs(5))),
        ("stratum classification", strata, None),
        ("Guillot relations", guillot, None),
        ("Baum-Bott sum", baum_bott, None),
        ("foliation fiber", fiber, None),
        ("degree growth", degrees, None),
        ("identity corpus", identities, Some(Duration::from_secs(10))),
        ("cubic classifier", cubic_classifier, None),
        ("flow catalog", flow_catalog, None),
        ("base-point equations", base_points, None),
        ("rendering", rendering, None),
    ];
    let mut failures = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut o = check();
        let dt = t.elapsed();
        if let Some(b) = budget {
            if dt > *b {
                o.ok = false;
                o.detail.push_str(&format!("; took {:.2?}, budget {:?}", dt, b));
            }
        }
        failures += !o.ok as usize;
        println!("{} {:>2} {}: {} [{:.2?}]", if o.ok { "PASS" } else { "FAIL" }, k + 1, name, o.detail, dt);
    }
    if failures > 0 {
        println!("{} criteria failed", failures);
        std::process::exit(1);
    }
}
