use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use weil_core::expr::{parse, Primitive};
use weil_core::poly::{Monomial, Polynomial};
use weil_core::presets::{family, morphisms};
use weil_core::scalar::ratio;
use weil_core::{Expr, Rational, Scalar, WeilAlgebra};

fn config() -> Config {
    Config {
        cases: 1000,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn expr(arity: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        small_rational().prop_map(Expr::Const),
        (0..arity).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Sum),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::Prod),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::quot(a, b)),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| a.pow(n)),
            (prop::sample::select(Primitive::ALL.to_vec()), inner).prop_map(|(p, a)| Expr::call(p, a)),
        ]
    })
}

fn polynomial(nvars: usize) -> impl Strategy<Value = Polynomial> {
    let term = (prop::collection::vec(0u32..3, nvars), small_rational());
    prop::collection::vec(term, 0..6).prop_map(move |terms| {
        let mut p = Polynomial::zero(nvars);
        for (e, c) in terms {
            if e.iter().sum::<u32>() <= 4 {
                p.add_term(Monomial(e), c);
            }
        }
        p
    })
}

fn algebra() -> impl Strategy<Value = Arc<WeilAlgebra>> {
    prop::sample::select(family().into_iter().map(|(_, w)| w).collect::<Vec<_>>())
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn printing_is_a_fixed_point_of_parsing(e in expr(3)) {
        let printed = e.to_string();
        let reparsed = parse(&printed, 3).unwrap();
        prop_assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn normal_forms_are_idempotent_and_multiplicative(
        (w, p, q) in algebra().prop_flat_map(|w| {
            let n = w.n_gens();
            (Just(w), polynomial(n), polynomial(n))
        })
    ) {
        let np = w.normal_form(&p).unwrap();
        prop_assert_eq!(w.normal_form(&w.coords_to_poly(&np)).unwrap(), np.clone());
        let nq = w.normal_form(&q).unwrap();
        let lhs = w.normal_form(&p.mul(&q)).unwrap();
        let rhs = w.normal_form(&w.coords_to_poly(&np).mul(&w.coords_to_poly(&nq))).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn morphisms_are_multiplicative(
        (k, p, q) in {
            let catalog = morphisms(&family());
            (0..catalog.len()).prop_flat_map(move |k| {
                let n = catalog[k].morphism.source().n_gens();
                (Just(k), polynomial(n), polynomial(n))
            })
        }
    ) {
        let phi = &morphisms(&family())[k].morphism;
        let w = phi.source();
        let (a, b) = (w.from_poly(&p).unwrap(), w.from_poly(&q).unwrap());
        let lhs = phi.apply(&a.mul(&b).unwrap()).unwrap();
        let rhs = phi.apply(&a).unwrap().mul(&phi.apply(&b).unwrap()).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        prop_assert_eq!(phi.apply_by_evaluation(&a).unwrap(), phi.apply(&a).unwrap());
    }
}

fn edge_rational() -> impl Strategy<Value = Rational> {
    let part = prop_oneof![
        -1000i64..1000,
        Just(i64::MAX),
        Just(i64::MIN),
        Just(i64::MAX - 1),
        Just(1i64 << 62),
        any::<i64>(),
    ];
    (part.clone(), part).prop_filter_map("nonzero denominator", |(n, d)| {
        (d != 0).then(|| Rational::new(BigInt::from(n), BigInt::from(d)))
    })
}

proptest! {
    #![proptest_config(Config { cases: 2000, ..config() })]

    #[test]
    fn rational_fast_paths_agree_with_big_arithmetic(a in edge_rational(), b in edge_rational(), c in edge_rational()) {
        prop_assert_eq!(a.mul_ref(&b), a.clone() * b.clone());
        let mut s = a.clone();
        s.add_ref(&b);
        prop_assert_eq!(s, a.clone() + b.clone());
        let mut t = c.clone();
        t.add_mul(&a, &b);
        prop_assert_eq!(t, c + a * b);
    }

    #[test]
    fn structure_products_agree_with_big_arithmetic(
        (w, x, y) in algebra().prop_flat_map(|w| {
            let d = w.dim();
            (Just(w), prop::collection::vec(edge_rational(), d), prop::collection::vec(edge_rational(), d))
        })
    ) {
        let table = w.structure_exact();
        let d = w.dim();
        let mut oracle = vec![Rational::from_integer(0.into()); d];
        for i in 0..d {
            for j in 0..d {
                for (k, c) in &table[i * d + j] {
                    oracle[*k] = oracle[*k].clone() + x[i].clone() * y[j].clone() * c.clone();
                }
            }
        }
        prop_assert_eq!(Rational::structure_mul(&x, &y, table), oracle);
    }
}
