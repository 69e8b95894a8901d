use proptest::prelude::*;

use cremona::birat::{self, Mat3};
use cremona::cli::commands::{cmd_classify, cmd_guillot, Options};
use cremona::cli::{parse_map, parse_map_raw};
use cremona::foliation::foliation_of;
use cremona::polycore::linalg;
use cremona::polycore::{GaussRat, HPoly, Mono};
use cremona::ratmap::RatMap;

fn g(n: i64) -> GaussRat {
    GaussRat::from_int(n)
}

fn monomials(d: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    for a in (0..=d).rev() {
        for b in (0..=d - a).rev() {
            out.push([a, b, d - a - b]);
        }
    }
    out
}

fn invertible() -> impl Strategy<Value = Mat3> {
    proptest::array::uniform9(-3i64..=3)
        .prop_map(|v| [0, 1, 2].map(|i| [0, 1, 2].map(|j| g(v[3 * i + j]))))
        .prop_filter("singular", |m| !linalg::det(&linalg::from_array3(m)).is_zero())
}

fn gauss() -> impl Strategy<Value = GaussRat> {
    (-4i64..=4, 1i64..=3, -2i64..=2).prop_map(|(a, d, b)| &GaussRat::from_frac(a, d) + &(&GaussRat::i() * &g(b)))
}

/// A map of degree `d` with random coefficients; most monomials are present.
fn random_map(d: u32) -> impl Strategy<Value = RatMap> {
    let n = monomials(d).len();
    proptest::collection::vec(proptest::option::weighted(0.8, gauss()), 3 * n).prop_filter_map("degenerate", move |cs| {
        let ms = monomials(d);
        let comps = [0, 1, 2].map(|i| {
            HPoly::from_terms(ms.iter().enumerate().filter_map(|(k, e)| cs[i * n + k].clone().map(|c| (*e, c)))).unwrap()
        });
        RatMap::new(comps).ok().filter(|f| f.degree() == d)
    })
}

fn involution() -> impl Strategy<Value = RatMap> {
    prop_oneof![Just(RatMap::sigma()), Just(RatMap::rho()), Just(RatMap::tau())]
}

/// A q B with q one of the three involutions.
fn birational_quadratic() -> impl Strategy<Value = (Mat3, RatMap, Mat3)> {
    (invertible(), involution(), invertible())
}

fn lin(m: &Mat3) -> RatMap {
    RatMap::linear(m).unwrap()
}

fn inv(m: &Mat3) -> Mat3 {
    linalg::to_array3(&linalg::inverse(&linalg::from_array3(m)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn rank_of_m_complements_relations(f in prop_oneof![
        random_map(2),
        birational_quadratic().prop_map(|(a, q, b)| RatMap::compose_all(&[lin(&a), q, lin(&b)]).unwrap()),
    ]) {
        prop_assume!(f.degree() == 2);
        let e = birat::relation_space(&f).dim;
        prop_assert_eq!(birat::rank_m(&f).unwrap(), 9 - e);
    }

    #[test]
    fn foliation_is_conjugation_equivariant(f in random_map(2), a in invertible()) {
        let conj = RatMap::compose_all(&[lin(&inv(&a)), f.clone(), lin(&a)]).unwrap();
        let lhs = foliation_of(&conj).unwrap();
        let rhs = foliation_of(&f).unwrap().pullback_linear(&a).unwrap();
        prop_assert!(lhs.same_foliation(&rhs));
    }

    #[test]
    fn degree_is_submultiplicative(
        (a, p, b) in birational_quadratic(),
        (c, q, d) in birational_quadratic(),
    ) {
        let f = RatMap::compose_all(&[lin(&a), p, lin(&b)]).unwrap();
        let h = RatMap::compose_all(&[lin(&c), q, lin(&d)]).unwrap();
        let fh = f.compose(&h).unwrap();
        prop_assert!(fh.degree() <= f.degree() * h.degree());
        prop_assert!(fh.degree() >= 1);
    }

    #[test]
    fn inverse_matches_composition_route((a, q, b) in birational_quadratic()) {
        let f = RatMap::compose_all(&[lin(&a), q.clone(), lin(&b)]).unwrap();
        let expected = RatMap::compose_all(&[lin(&inv(&b)), q, lin(&inv(&a))]).unwrap();
        prop_assert_eq!(birat::inverse(&f).unwrap(), expected);
    }

    #[test]
    fn printed_maps_parse_back(f in prop_oneof![random_map(1), random_map(2), random_map(3)]) {
        let text = f.to_string();
        prop_assert_eq!(parse_map_raw(&text).unwrap(), f.clone());
        prop_assert_eq!(parse_map(&text).unwrap(), f.reduce());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn records_are_byte_stable(a in invertible(), seed in 0u64..1000) {
        let f = lin(&a).compose(&RatMap::sigma()).unwrap();
        let opt = Options { seed, ..Options::default() };
        let first = cmd_classify(&f, &opt).unwrap().record.to_string();
        let again = cmd_classify(&f, &opt).unwrap().record.to_string();
        prop_assert_eq!(first, again);
        if let (Ok(x), Ok(y)) = (cmd_guillot(&f, &opt), cmd_guillot(&f, &opt)) {
            prop_assert_eq!(x.record.to_string(), y.record.to_string());
        }
    }
}
